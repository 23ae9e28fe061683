#pragma once

#include "gancomm/channel/channels.hpp"
#include "gancomm/classical/bits.hpp"
#include "gancomm/classical/coding.hpp"

namespace gancomm::classical {

using channel::cd;
using channel::ComplexBlock;

/// Radix-2 decimation-in-time DFT, X_k = sum_n x_n e^{-j 2 pi k n / n_len}.
/// Throws ConfigError unless the length is a power of two.
ComplexBlock fft(const ComplexBlock& x);
/// Inverse with the 1/n normalization, so ifft(fft(x)) = x.
ComplexBlock ifft(const ComplexBlock& x);

struct OfdmSpec {
  std::size_t subcarriers = 64;
  std::size_t cyclic_prefix = 16;
  int order = 4;  // QAM order on every subcarrier
};

enum class CsiMode { estimated, perfect };

/// Known pilot values on each subcarrier of the pilot OFDM symbol
/// (a fixed unit-modulus QPSK sequence).
ComplexBlock ofdm_pilot_symbol(const OfdmSpec& spec);

/// Per-subcarrier frequency response of a realization.
ComplexBlock frequency_response(const channel::ChannelRealization& realization, std::size_t subcarriers);

struct OfdmResult {
  BitBlock bits;                 // recovered info bits
  std::size_t ofdm_symbols = 0;  // data symbols, pilot excluded
  std::size_t bit_errors_raw = 0;  // channel-bit errors before decoding
  ComplexBlock channel_estimate;   // per subcarrier, as used by the equalizer
  double estimate_mse = 0.0;       // mean |H_hat - H|^2 over subcarriers
};

/// One frame: [RSC encode ->] QAM -> S/P -> IFFT -> CP -> channel -> strip CP
/// -> FFT -> LS estimate from the leading pilot symbol (or the true response)
/// -> one-tap equalization -> demod [-> Viterbi].
///
/// Subcarrier symbols have unit power and the time-domain samples are scaled
/// to unit power too, so the realization's noise_var is the per-subcarrier
/// noise variance. Uncoded frames need bits to fill whole OFDM symbols;
/// coded frames zero-pad the codeword to a whole number of OFDM symbols.
/// The channel impulse response must fit inside the cyclic prefix.
OfdmResult ofdm_chain(const BitBlock& bits, const OfdmSpec& spec, const channel::ChannelRealization& realization,
                      Rng& rng, bool coded = false, CsiMode csi = CsiMode::estimated, const TrellisSpec& trellis = {});

}  // namespace gancomm::classical
