#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "gancomm/rng.hpp"

namespace gancomm::channel {

using cd = std::complex<double>;

/// K complex baseband symbols. std::complex<double> is layout-compatible with
/// double[2], so a block is K x 2 reals (I/Q) in memory.
using ComplexBlock = std::vector<cd>;

enum class ChannelKind { awgn, rayleigh, multipath };
enum class FadingMode { block, symbol };
enum class PdpKind { equal, exponential };

ChannelKind parse_channel_kind(std::string_view s);
FadingMode parse_fading_mode(std::string_view s);
PdpKind parse_pdp(std::string_view s);
std::string_view to_string(ChannelKind k);
std::string_view to_string(PdpKind k);

struct ChannelProfile {
  ChannelKind kind = ChannelKind::awgn;
  /// Rayleigh only: one gain per block (block) or per symbol (symbol).
  FadingMode fading = FadingMode::block;
  PdpKind pdp = PdpKind::equal;
  std::size_t taps = 3;
  /// Known pilot symbols sent through the same realization. All pilots are
  /// 1 + 0j; zero pilots means no pilot observation.
  std::size_t pilot_len = 1;

  /// E|b_k|^2 per tap: 1 (equal) or 2^-k (exponential), k = 0..taps-1.
  std::vector<double> pdp_weights() const;
  ComplexBlock pilots() const { return ComplexBlock(pilot_len, cd{1.0, 0.0}); }
  /// Received length for a K-symbol block (K + taps - 1 for multipath).
  std::size_t output_length(std::size_t block_len) const;
  /// Pilot observations are only meaningful for fading channels.
  bool uses_pilots() const { return kind != ChannelKind::awgn && pilot_len > 0; }
};

struct Tap {
  double gain = 0.0;   // b_k >= 0
  double phase = 0.0;  // theta_k in [0, 2 pi)
  std::size_t delay = 0;  // in symbol periods
  cd coefficient() const { return std::polar(gain, phase); }
};

/// One draw of the channel state.
struct ChannelRealization {
  ChannelKind kind = ChannelKind::awgn;
  ComplexBlock flat_gains;  // rayleigh: one entry (block) or K entries (symbol)
  std::vector<Tap> taps;    // multipath
  double noise_var = 0.0;   // sigma^2 per complex symbol

  /// Dense impulse response h[0..max_delay].
  ComplexBlock impulse_response() const;
};

/// Eb/N0 in dB to noise variance per complex symbol, assuming unit average
/// symbol power: sigma^2 = K / (N * 10^(snr_db / 10)), half in each of I and Q.
double snr_to_noise_var(double snr_db, std::size_t bits_per_block, std::size_t symbols_per_block);

/// y = x + w, w ~ CN(0, noise_var).
ComplexBlock awgn(const ComplexBlock& x, double noise_var, Rng& rng);

struct FlatFadingOutput {
  ComplexBlock y;
  ComplexBlock h;  // for oracle-CSI baselines only
};

/// Per-symbol i.i.d. Rayleigh: y_n = h_n x_n + w_n, h_n ~ CN(0, 1).
FlatFadingOutput rayleigh_flat(const ComplexBlock& x, double noise_var, Rng& rng);

/// Draws the per-block state for `profile`. Multipath taps are b_k e^{j theta_k}
/// with b_k = |CN(0, PDP_k)| and theta_k uniform, at delays 0, 1, 2, ...
ChannelRealization draw_realization(const ChannelProfile& profile, std::size_t block_len, double noise_var,
                                    Rng& rng);

/// Full linear convolution with the tap vector plus AWGN; output length is
/// K + max_delay.
ComplexBlock multipath(const ComplexBlock& x, const ChannelRealization& realization, double noise_var, Rng& rng);

/// Sends `x` through a drawn realization with its noise variance.
ComplexBlock apply_channel(const ComplexBlock& x, const ChannelRealization& realization, Rng& rng);

/// The profile's pilots through the same realization with independent noise:
/// the first pilot_len samples of (pilots * h) + w.
ComplexBlock transmit_pilots(const ChannelProfile& profile, const ChannelRealization& realization, Rng& rng);

/// CSV dump "tap,delay,real,imag" of a realization's taps or flat gains.
void write_realization_csv(std::ostream& os, const ChannelRealization& realization);

}  // namespace gancomm::channel
