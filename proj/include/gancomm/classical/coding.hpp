#pragma once

#include <array>
#include <span>

#include "gancomm/classical/bits.hpp"

namespace gancomm::classical {

// Hamming(7,4), systematic: G = [I4 | P] with P rows 110, 101, 011, 111.

/// Exactly 4 info bits, otherwise FramingError.
BitBlock hamming74_encode(std::span<const std::uint8_t> info);

/// All 16 codewords, indexed by the info bits read most significant first.
const std::array<BitBlock, 16>& hamming74_codebook();

/// Exhaustive maximum-likelihood decoding of 7 soft values under BPSK
/// (code bit 0 -> +1, 1 -> -1). With real per-position gains g the metric is
/// sum_i y_i g_i s_i. Ties go to the lowest codeword index.
BitBlock hamming74_mld(std::span<const double> y, std::span<const double> gains = {});

/// Concatenated codewords for a multiple of 4 info bits.
BitBlock hamming74_encode_stream(std::span<const std::uint8_t> info);

struct TrellisSpec {
  int constraint = 3;
  unsigned feedback = 07;     // octal, most significant bit is the D^0 tap
  unsigned feedforward = 05;  // octal, same convention
  bool systematic = true;
  bool terminated = true;

  int memory() const { return constraint - 1; }
  int states() const { return 1 << memory(); }
  int tail() const { return terminated ? memory() : 0; }
};

/// Recursive systematic encoder. Output interleaves (info_t, parity_t) and,
/// when terminated, appends memory() tail steps driving the register to zero,
/// for 2 (N + tail) bits in total.
BitBlock rsc_encode(std::span<const std::uint8_t> info, const TrellisSpec& trellis = {});

/// Soft maximum-likelihood sequence decoding. `llr` holds one value per coded
/// bit, positive favouring 0; the path metric is sum llr_i (1 - 2 c_i).
/// Traceback starts from the zero state when terminated, otherwise from the
/// best state; ties favour the lower-indexed predecessor.
BitBlock viterbi_decode(std::span<const double> llr, const TrellisSpec& trellis = {});

}  // namespace gancomm::classical
