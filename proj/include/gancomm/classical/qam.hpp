#pragma once

#include <span>
#include <vector>

#include "gancomm/channel/channels.hpp"
#include "gancomm/classical/bits.hpp"

namespace gancomm::classical {

using channel::cd;
using channel::ComplexBlock;

// Gray labelling, first bit(s) on I and the rest on Q. Per axis:
//   4-QAM:  bit 0 -> +1, bit 1 -> -1, scaled by 1/sqrt(2)
//           (00 -> ++, 01 -> +-, 11 -> --, 10 -> -+)
//   16-QAM: (sign, inner) pairs 00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3,
//           scaled by 1/sqrt(10)
// Both constellations have unit average energy.

int bits_per_symbol(int order);

/// Constellation points indexed by label, first bit most significant.
const std::vector<cd>& constellation(int order);

/// Throws FramingError if the bit count is not a multiple of log2(order).
ComplexBlock qam_mod(std::span<const std::uint8_t> bits, int order);

struct Demodulated {
  BitBlock hard;
  /// log P(b=0)/P(b=1), max-log, one per bit; positive favours 0.
  std::vector<double> llr;
};

/// Nearest-point hard decisions and max-log LLRs scaled by 1/noise_var.
/// With gains, each symbol is equalized as y/h first and its LLRs use the
/// post-equalization noise noise_var/|h|^2; a zero gain is an erasure
/// (LLR 0, hard bit 0).
Demodulated qam_demod(const ComplexBlock& y, std::span<const cd> gains, int order, double noise_var);

}  // namespace gancomm::classical
