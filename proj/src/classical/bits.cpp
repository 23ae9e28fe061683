#include "gancomm/classical/bits.hpp"

#include <string>

#include "gancomm/errors.hpp"

namespace gancomm::classical {

std::size_t bit_errors(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx) {
  if (tx.size() != rx.size())
    throw FramingError("bit blocks differ in length (" + std::to_string(tx.size()) + " vs " +
                       std::to_string(rx.size()) + ")");
  std::size_t e = 0;
  for (std::size_t i = 0; i < tx.size(); ++i) e += (tx[i] != rx[i]);
  return e;
}

double ber(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx) {
  const std::size_t e = bit_errors(tx, rx);
  return tx.empty() ? 0.0 : static_cast<double>(e) / static_cast<double>(tx.size());
}

double bler(std::span<const BitBlock> tx, std::span<const BitBlock> rx) {
  if (tx.size() != rx.size()) throw FramingError("block lists differ in length");
  if (tx.empty()) return 0.0;
  std::size_t errs = 0;
  for (std::size_t i = 0; i < tx.size(); ++i) errs += bit_errors(tx[i], rx[i]) > 0;
  return static_cast<double>(errs) / static_cast<double>(tx.size());
}

}  // namespace gancomm::classical
