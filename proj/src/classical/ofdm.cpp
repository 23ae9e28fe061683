#include "gancomm/classical/ofdm.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "gancomm/classical/qam.hpp"
#include "gancomm/errors.hpp"

namespace gancomm::classical {

namespace {

ComplexBlock transform(ComplexBlock a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || !std::has_single_bit(n)) throw ConfigError("FFT length " + std::to_string(n) + " is not a power of two");
  const int bits = std::countr_zero(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
    if (r > i) std::swap(a[i], a[r]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      const cd w = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len));
      for (std::size_t start = 0; start < n; start += len) {
        const cd u = a[start + k];
        const cd v = w * a[start + k + half];
        a[start + k] = u + v;
        a[start + k + half] = u - v;
      }
    }
  }
  if (inverse)
    for (auto& v : a) v /= static_cast<double>(n);
  return a;
}

}  // namespace

ComplexBlock fft(const ComplexBlock& x) { return transform(x, false); }
ComplexBlock ifft(const ComplexBlock& x) { return transform(x, true); }

ComplexBlock ofdm_pilot_symbol(const OfdmSpec& spec) {
  // QPSK points from a fixed-seed stream, so every run sees the same pilots.
  Rng rng(0x0FD3u);
  ComplexBlock p(spec.subcarriers);
  const double a = 1.0 / std::sqrt(2.0);
  for (auto& v : p) v = {rng.bit() ? -a : a, rng.bit() ? -a : a};
  return p;
}

ComplexBlock frequency_response(const channel::ChannelRealization& realization, std::size_t subcarriers) {
  ComplexBlock h = realization.impulse_response();
  if (h.size() > subcarriers) throw ConfigError("impulse response longer than the FFT size");
  h.resize(subcarriers);
  return fft(h);
}

OfdmResult ofdm_chain(const BitBlock& bits, const OfdmSpec& spec, const channel::ChannelRealization& realization,
                      Rng& rng, bool coded, CsiMode csi, const TrellisSpec& trellis) {
  const std::size_t nc = spec.subcarriers, cp = spec.cyclic_prefix;
  const std::size_t m = static_cast<std::size_t>(bits_per_symbol(spec.order));
  const std::size_t bits_per_ofdm = nc * m;
  const ComplexBlock h = realization.impulse_response();
  if (h.size() - 1 > cp) throw ConfigError("channel delay spread exceeds the cyclic prefix");

  BitBlock channel_bits = coded ? rsc_encode(bits, trellis) : bits;
  const std::size_t coded_len = channel_bits.size();
  if (!coded && bits.size() % bits_per_ofdm != 0)
    throw FramingError(std::to_string(bits.size()) + " bits do not fill whole OFDM symbols of " +
                       std::to_string(bits_per_ofdm) + " bits");
  channel_bits.resize((coded_len + bits_per_ofdm - 1) / bits_per_ofdm * bits_per_ofdm, 0);
  const std::size_t n_sym = channel_bits.size() / bits_per_ofdm;

  const ComplexBlock pilot = ofdm_pilot_symbol(spec);
  const ComplexBlock data = qam_mod(channel_bits, spec.order);
  const double unitary = std::sqrt(static_cast<double>(nc));

  // Time-domain stream: pilot symbol then data symbols, each with its CP.
  ComplexBlock stream;
  stream.reserve((n_sym + 1) * (nc + cp));
  auto append = [&](const cd* freq) {
    ComplexBlock t = ifft(ComplexBlock(freq, freq + nc));
    for (auto& v : t) v *= unitary;
    stream.insert(stream.end(), t.end() - static_cast<std::ptrdiff_t>(cp), t.end());
    stream.insert(stream.end(), t.begin(), t.end());
  };
  append(pilot.data());
  for (std::size_t s = 0; s < n_sym; ++s) append(data.data() + s * nc);

  ComplexBlock rx(stream.size());
  for (std::size_t n = 0; n < stream.size(); ++n)
    for (std::size_t k = 0; k < h.size() && k <= n; ++k) rx[n] += h[k] * stream[n - k];
  rx = channel::awgn(rx, realization.noise_var, rng);

  auto demux = [&](std::size_t s) {
    const auto first = rx.begin() + static_cast<std::ptrdiff_t>(s * (nc + cp) + cp);
    ComplexBlock f = fft(ComplexBlock(first, first + static_cast<std::ptrdiff_t>(nc)));
    for (auto& v : f) v /= unitary;
    return f;
  };

  OfdmResult out;
  out.ofdm_symbols = n_sym;
  const ComplexBlock truth = frequency_response(realization, nc);
  if (csi == CsiMode::perfect) {
    out.channel_estimate = truth;
  } else {
    const ComplexBlock yp = demux(0);
    out.channel_estimate.resize(nc);
    for (std::size_t k = 0; k < nc; ++k) out.channel_estimate[k] = yp[k] / pilot[k];
  }
  for (std::size_t k = 0; k < nc; ++k) out.estimate_mse += std::norm(out.channel_estimate[k] - truth[k]);
  out.estimate_mse /= static_cast<double>(nc);

  ComplexBlock y_data, gains;
  y_data.reserve(n_sym * nc);
  gains.reserve(n_sym * nc);
  for (std::size_t s = 0; s < n_sym; ++s) {
    const ComplexBlock f = demux(s + 1);
    y_data.insert(y_data.end(), f.begin(), f.end());
    gains.insert(gains.end(), out.channel_estimate.begin(), out.channel_estimate.end());
  }
  Demodulated d = qam_demod(y_data, gains, spec.order, realization.noise_var);
  out.bit_errors_raw = bit_errors(channel_bits, d.hard);
  if (coded) {
    d.llr.resize(coded_len);
    out.bits = viterbi_decode(d.llr, trellis);
  } else {
    out.bits = std::move(d.hard);
  }
  return out;
}

}  // namespace gancomm::classical
