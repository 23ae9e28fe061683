#pragma once

#include <span>

#include "gancomm/nn/tape.hpp"

namespace gancomm::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update of every parameter, then zeroes the grads.
/// Throws ConfigError when lr <= 0.
void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg);

void zero_grads(std::span<Parameter* const> params);

}  // namespace gancomm::nn
