#include "gancomm/channel/channels.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "gancomm/errors.hpp"

namespace gancomm::channel {

ChannelKind parse_channel_kind(std::string_view s) {
  if (s == "awgn") return ChannelKind::awgn;
  if (s == "rayleigh" || s == "rayleigh_flat") return ChannelKind::rayleigh;
  if (s == "multipath") return ChannelKind::multipath;
  throw ConfigError("unknown channel kind '" + std::string(s) + "'");
}

FadingMode parse_fading_mode(std::string_view s) {
  if (s == "block") return FadingMode::block;
  if (s == "symbol") return FadingMode::symbol;
  throw ConfigError("unknown fading mode '" + std::string(s) + "'");
}

PdpKind parse_pdp(std::string_view s) {
  if (s == "equal") return PdpKind::equal;
  if (s == "exponential") return PdpKind::exponential;
  throw ConfigError("unknown power-delay profile '" + std::string(s) + "'");
}

std::string_view to_string(ChannelKind k) {
  switch (k) {
    case ChannelKind::rayleigh:
      return "rayleigh";
    case ChannelKind::multipath:
      return "multipath";
    default:
      return "awgn";
  }
}

std::string_view to_string(PdpKind k) { return k == PdpKind::equal ? "equal" : "exponential"; }

std::vector<double> ChannelProfile::pdp_weights() const {
  if (taps == 0) throw ConfigError("multipath profile needs at least one tap");
  std::vector<double> w(taps);
  for (std::size_t k = 0; k < taps; ++k) w[k] = pdp == PdpKind::equal ? 1.0 : std::ldexp(1.0, -static_cast<int>(k));
  return w;
}

std::size_t ChannelProfile::output_length(std::size_t block_len) const {
  return kind == ChannelKind::multipath ? block_len + taps - 1 : block_len;
}

ComplexBlock ChannelRealization::impulse_response() const {
  if (kind == ChannelKind::multipath) {
    std::size_t span = 0;
    for (const auto& t : taps) span = std::max(span, t.delay + 1);
    ComplexBlock h(span);
    for (const auto& t : taps) h[t.delay] += t.coefficient();
    return h;
  }
  if (kind == ChannelKind::rayleigh) return {flat_gains.empty() ? cd{1.0, 0.0} : flat_gains.front()};
  return {cd{1.0, 0.0}};
}

double snr_to_noise_var(double snr_db, std::size_t bits_per_block, std::size_t symbols_per_block) {
  if (symbols_per_block == 0 || bits_per_block == 0) throw ConfigError("snr_to_noise_var needs positive N and K");
  return static_cast<double>(symbols_per_block) /
         (static_cast<double>(bits_per_block) * std::pow(10.0, snr_db / 10.0));
}

ComplexBlock awgn(const ComplexBlock& x, double noise_var, Rng& rng) {
  if (noise_var < 0.0) throw DomainError("noise variance must be non-negative");
  ComplexBlock y(x);
  if (noise_var == 0.0) return y;
  for (auto& v : y) v += rng.complex_normal(noise_var);
  return y;
}

FlatFadingOutput rayleigh_flat(const ComplexBlock& x, double noise_var, Rng& rng) {
  FlatFadingOutput out;
  out.h.resize(x.size());
  for (auto& h : out.h) h = rng.complex_normal(1.0);
  out.y.resize(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) out.y[n] = out.h[n] * x[n];
  out.y = awgn(out.y, noise_var, rng);
  return out;
}

ChannelRealization draw_realization(const ChannelProfile& profile, std::size_t block_len, double noise_var,
                                    Rng& rng) {
  ChannelRealization r;
  r.kind = profile.kind;
  r.noise_var = noise_var;
  switch (profile.kind) {
    case ChannelKind::awgn:
      break;
    case ChannelKind::rayleigh: {
      const std::size_t count = profile.fading == FadingMode::block ? 1 : block_len;
      r.flat_gains.resize(count);
      for (auto& h : r.flat_gains) h = rng.complex_normal(1.0);
      break;
    }
    case ChannelKind::multipath: {
      const auto weights = profile.pdp_weights();
      for (std::size_t k = 0; k < weights.size(); ++k) {
        const double gain = std::abs(rng.complex_normal(weights[k]));
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        r.taps.push_back({gain, phase, k});
      }
      break;
    }
  }
  return r;
}

ComplexBlock multipath(const ComplexBlock& x, const ChannelRealization& realization, double noise_var, Rng& rng) {
  if (realization.kind != ChannelKind::multipath || realization.taps.empty())
    throw ConfigError("multipath channel needs a realization with taps");
  std::size_t max_delay = 0;
  for (const auto& t : realization.taps) max_delay = std::max(max_delay, t.delay);
  ComplexBlock y(x.size() + max_delay);
  for (const auto& t : realization.taps) {
    const cd c = t.coefficient();
    for (std::size_t n = 0; n < x.size(); ++n) y[n + t.delay] += c * x[n];
  }
  return awgn(y, noise_var, rng);
}

ComplexBlock apply_channel(const ComplexBlock& x, const ChannelRealization& realization, Rng& rng) {
  switch (realization.kind) {
    case ChannelKind::awgn:
      return awgn(x, realization.noise_var, rng);
    case ChannelKind::rayleigh: {
      const auto& g = realization.flat_gains;
      if (g.size() != 1 && g.size() != x.size())
        throw DimensionError("rayleigh realization has " + std::to_string(g.size()) + " gains for " +
                             std::to_string(x.size()) + " symbols");
      ComplexBlock y(x.size());
      for (std::size_t n = 0; n < x.size(); ++n) y[n] = (g.size() == 1 ? g[0] : g[n]) * x[n];
      return awgn(y, realization.noise_var, rng);
    }
    case ChannelKind::multipath:
      return multipath(x, realization, realization.noise_var, rng);
  }
  return {};
}

ComplexBlock transmit_pilots(const ChannelProfile& profile, const ChannelRealization& realization, Rng& rng) {
  const ComplexBlock p = profile.pilots();
  ComplexBlock y(p.size());
  if (realization.kind == ChannelKind::awgn) {
    y = p;
  } else if (realization.kind == ChannelKind::rayleigh) {
    // Per-symbol fading sounds the first gain; block fading has only one.
    const cd h = realization.flat_gains.empty() ? cd{1.0, 0.0} : realization.flat_gains.front();
    for (std::size_t n = 0; n < p.size(); ++n) y[n] = h * p[n];
  } else {
    const ComplexBlock h = realization.impulse_response();
    for (std::size_t n = 0; n < p.size(); ++n)
      for (std::size_t k = 0; k < h.size() && k <= n; ++k) y[n] += h[k] * p[n - k];
  }
  return awgn(y, realization.noise_var, rng);
}

void write_realization_csv(std::ostream& os, const ChannelRealization& realization) {
  os << "tap,delay,real,imag\n";
  os.precision(17);
  if (realization.kind == ChannelKind::multipath) {
    for (std::size_t k = 0; k < realization.taps.size(); ++k) {
      const cd c = realization.taps[k].coefficient();
      os << k << ',' << realization.taps[k].delay << ',' << c.real() << ',' << c.imag() << '\n';
    }
  } else {
    for (std::size_t k = 0; k < realization.flat_gains.size(); ++k)
      os << k << ",0," << realization.flat_gains[k].real() << ',' << realization.flat_gains[k].imag() << '\n';
  }
}

}  // namespace gancomm::channel
