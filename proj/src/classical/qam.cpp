#include "gancomm/classical/qam.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gancomm/errors.hpp"

namespace gancomm::classical {

namespace {

std::vector<cd> build(int order) {
  std::vector<cd> pts(static_cast<std::size_t>(order));
  if (order == 4) {
    const double a = 1.0 / std::sqrt(2.0);
    for (int label = 0; label < 4; ++label) {
      const double i = (label & 2) ? -a : a;
      const double q = (label & 1) ? -a : a;
      pts[static_cast<std::size_t>(label)] = {i, q};
    }
  } else {
    const double a = 1.0 / std::sqrt(10.0);
    auto level = [&](int two_bits) {
      const double sign = (two_bits & 2) ? -1.0 : 1.0;
      const double mag = (two_bits & 1) ? 1.0 : 3.0;
      return sign * mag * a;
    };
    for (int label = 0; label < 16; ++label) pts[static_cast<std::size_t>(label)] = {level(label >> 2), level(label & 3)};
  }
  return pts;
}

}  // namespace

int bits_per_symbol(int order) {
  if (order == 4) return 2;
  if (order == 16) return 4;
  throw ConfigError("unsupported QAM order " + std::to_string(order));
}

const std::vector<cd>& constellation(int order) {
  static const std::vector<cd> qam4 = build(4);
  static const std::vector<cd> qam16 = build(16);
  bits_per_symbol(order);
  return order == 4 ? qam4 : qam16;
}

ComplexBlock qam_mod(std::span<const std::uint8_t> bits, int order) {
  const int m = bits_per_symbol(order);
  if (bits.size() % static_cast<std::size_t>(m) != 0)
    throw FramingError(std::to_string(bits.size()) + " bits do not fill whole " + std::to_string(order) +
                       "-QAM symbols");
  const auto& pts = constellation(order);
  ComplexBlock out(bits.size() / static_cast<std::size_t>(m));
  for (std::size_t s = 0; s < out.size(); ++s) {
    std::size_t label = 0;
    for (int b = 0; b < m; ++b) label = (label << 1) | (bits[s * m + b] & 1u);
    out[s] = pts[label];
  }
  return out;
}

Demodulated qam_demod(const ComplexBlock& y, std::span<const cd> gains, int order, double noise_var) {
  const int m = bits_per_symbol(order);
  const auto& pts = constellation(order);
  if (!gains.empty() && gains.size() != y.size() && gains.size() != 1)
    throw DimensionError("qam_demod: gain count does not match symbols");
  const double base_scale = 1.0 / std::max(noise_var, 1e-12);
  Demodulated out;
  out.hard.assign(y.size() * static_cast<std::size_t>(m), 0);
  out.llr.assign(y.size() * static_cast<std::size_t>(m), 0.0);
  for (std::size_t s = 0; s < y.size(); ++s) {
    cd z = y[s];
    double scale = base_scale;
    if (!gains.empty()) {
      const cd h = gains.size() == 1 ? gains[0] : gains[s];
      if (std::norm(h) == 0.0) continue;  // erasure
      z /= h;
      scale = std::norm(h) * base_scale;
    }
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_label = 0;
    std::vector<double> d0(static_cast<std::size_t>(m), best), d1(static_cast<std::size_t>(m), best);
    for (std::size_t label = 0; label < pts.size(); ++label) {
      const double d = std::norm(z - pts[label]);
      if (d < best) {
        best = d;
        best_label = label;
      }
      for (int b = 0; b < m; ++b) {
        const bool one = (label >> (m - 1 - b)) & 1u;
        auto& slot = one ? d1[static_cast<std::size_t>(b)] : d0[static_cast<std::size_t>(b)];
        slot = std::min(slot, d);
      }
    }
    for (int b = 0; b < m; ++b) {
      const std::size_t i = s * static_cast<std::size_t>(m) + static_cast<std::size_t>(b);
      out.hard[i] = static_cast<std::uint8_t>((best_label >> (m - 1 - b)) & 1u);
      out.llr[i] = (d1[static_cast<std::size_t>(b)] - d0[static_cast<std::size_t>(b)]) * scale;
    }
  }
  return out;
}

}  // namespace gancomm::classical
