#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gancomm::classical {

/// Sequence of bits, one per byte, each 0 or 1.
using BitBlock = std::vector<std::uint8_t>;

/// Fraction of positions where the blocks differ. Throws FramingError on a
/// length mismatch; an empty pair has rate 0.
double ber(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx);

std::size_t bit_errors(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx);

/// Fraction of blocks with at least one differing bit.
double bler(std::span<const BitBlock> tx, std::span<const BitBlock> rx);

}  // namespace gancomm::classical
