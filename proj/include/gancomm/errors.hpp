#pragma once

#include <stdexcept>
#include <string>

namespace gancomm {

// Every failure the library reports derives from Error so callers (the CLI in
// particular) can map categories onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that do not conform for an operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration: bad hyperparameter, unsupported layer, malformed file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Value outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Bit or symbol stream whose length does not fit the code/modulation framing.
class FramingError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a usage contract (e.g. backward on a non-scalar).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values during training or evaluation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace gancomm
