#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <bit>
#include <algorithm>

#include "gancomm/classical/coding.hpp"
#include "gancomm/classical/ofdm.hpp"
#include "gancomm/classical/qam.hpp"
#include "gancomm/errors.hpp"

using namespace gancomm;
using namespace gancomm::classical;

namespace {

BitBlock random_bits(std::size_t n, Rng& rng) {
  BitBlock b(n);
  for (auto& v : b) v = static_cast<std::uint8_t>(rng.bit());
  return b;
}

BitBlock xor_bits(const BitBlock& a, const BitBlock& b) {
  BitBlock c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] ^ b[i];
  return c;
}

// Plain O(n^2) DFT.
ComplexBlock dft(const ComplexBlock& x) {
  const std::size_t n = x.size();
  ComplexBlock X(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t t = 0; t < n; ++t)
      X[k] += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n));
  return X;
}

// Independent RSC (1, 5/7) written directly from the recursion
// a_t = u_t + a_{t-1} + a_{t-2}, p_t = a_t + a_{t-2}.
BitBlock rsc57(const BitBlock& u) {
  BitBlock out;
  int a1 = 0, a2 = 0;
  auto emit = [&](int ut) {
    const int a = ut ^ a1 ^ a2;
    out.push_back(static_cast<std::uint8_t>(ut));
    out.push_back(static_cast<std::uint8_t>(a ^ a2));
    a2 = a1;
    a1 = a;
  };
  for (auto b : u) emit(b);
  for (int i = 0; i < 2; ++i) emit(a1 ^ a2);
  return out;
}

// Exhaustive ML over all 2^N inputs under the correlation metric.
BitBlock brute_force_ml(const std::vector<double>& llr, std::size_t n) {
  double best = -std::numeric_limits<double>::infinity();
  BitBlock arg;
  for (std::uint32_t m = 0; m < (1u << n); ++m) {
    BitBlock u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = (m >> i) & 1u;
    const BitBlock c = rsc57(u);
    double metric = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) metric += c[i] ? -llr[i] : llr[i];
    if (metric > best) {
      best = metric;
      arg = u;
    }
  }
  return arg;
}

}  // namespace

TEST_CASE("bit error counting") {
  const BitBlock a{0, 1, 1, 0}, b{0, 0, 1, 1};
  CHECK(bit_errors(a, b) == 2);
  CHECK(ber(a, b) == 0.5);
  CHECK(ber(BitBlock{}, BitBlock{}) == 0.0);
  CHECK_THROWS_AS(ber(a, BitBlock{1}), FramingError);
  const std::vector<BitBlock> tx{a, a, b}, rx{a, b, b};
  CHECK(bler(tx, rx) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("qam mapping") {
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(qam_mod(BitBlock{0, 0}, 4)[0] == cd{r, r});
  CHECK(qam_mod(BitBlock{0, 1}, 4)[0] == cd{r, -r});
  CHECK(qam_mod(BitBlock{1, 1}, 4)[0] == cd{-r, -r});
  CHECK(qam_mod(BitBlock{1, 0}, 4)[0] == cd{-r, r});
  CHECK_THROWS_AS(qam_mod(BitBlock{0, 1, 1}, 4), FramingError);
  CHECK_THROWS_AS(qam_mod(BitBlock{0, 1}, 8), ConfigError);

  for (int order : {4, 16}) {
    const auto& pts = constellation(order);
    double p = 0.0;
    for (const auto& v : pts) p += std::norm(v);
    CHECK(p / order == doctest::Approx(1.0).epsilon(1e-15));
  }
  // 16 distinct points on a 4x4 grid of levels {-3,-1,1,3}/sqrt(10).
  const auto& pts = constellation(16);
  std::set<std::pair<long, long>> grid;
  for (const auto& v : pts) {
    const double i = v.real() * std::sqrt(10.0), q = v.imag() * std::sqrt(10.0);
    CHECK(std::abs(i - std::round(i)) < 1e-12);
    CHECK(std::abs(q - std::round(q)) < 1e-12);
    CHECK(std::abs(std::lround(i)) % 2 == 1);
    grid.insert({std::lround(i), std::lround(q)});
  }
  CHECK(grid.size() == 16);
  // Gray: horizontally or vertically adjacent points differ in one bit.
  for (int a = 0; a < 16; ++a)
    for (int b = a + 1; b < 16; ++b)
      if (std::abs(std::abs(pts[a] - pts[b]) - 2.0 / std::sqrt(10.0)) < 1e-12) CHECK(std::popcount(unsigned(a ^ b)) == 1);
}

TEST_CASE("qam noiseless round trip") {
  for (int order : {4, 16}) {
    const int m = bits_per_symbol(order);
    for (int label = 0; label < order; ++label) {
      BitBlock b(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) b[static_cast<std::size_t>(i)] = (label >> (m - 1 - i)) & 1;
      CHECK(qam_demod(qam_mod(b, order), {}, order, 0.1).hard == b);
    }
  }
}

TEST_CASE("llr signs agree with hard decisions") {
  Rng rng(5);
  for (int order : {4, 16}) {
    const BitBlock b = random_bits(100'000 / 4 * static_cast<std::size_t>(bits_per_symbol(order)), rng);
    const auto y = channel::awgn(qam_mod(b, order), 0.3, rng);
    const auto d = qam_demod(y, {}, order, 0.3);
    for (std::size_t i = 0; i < b.size(); ++i)
      if (d.llr[i] != 0.0) REQUIRE((d.llr[i] < 0) == (d.hard[i] == 1));
  }
}

TEST_CASE("equalized demodulation and erasures") {
  const BitBlock b{1, 0, 0, 1};
  const auto x = qam_mod(b, 4);
  const ComplexBlock h{cd{0.3, -1.1}, cd{}};
  const ComplexBlock y{h[0] * x[0], cd{0.7, 0.7}};
  const auto d = qam_demod(y, h, 4, 0.5);
  CHECK(d.hard[0] == 1);
  CHECK(d.hard[1] == 0);
  CHECK(d.llr[2] == 0.0);
  CHECK(d.llr[3] == 0.0);
  // With y = h x exactly the competing point is sqrt(2) away: |llr| = 2 |h|^2 / sigma^2.
  CHECK(std::abs(d.llr[0]) == doctest::Approx(2.0 * std::norm(h[0]) / 0.5));
}

TEST_CASE("hamming encoder") {
  CHECK(hamming74_encode(BitBlock{0, 0, 0, 0}) == BitBlock(7, 0));
  CHECK(hamming74_encode(BitBlock{1, 0, 0, 0}) == BitBlock{1, 0, 0, 0, 1, 1, 0});
  CHECK(hamming74_encode(BitBlock{0, 0, 0, 1}) == BitBlock{0, 0, 0, 1, 1, 1, 1});
  CHECK_THROWS_AS(hamming74_encode(BitBlock{1, 0, 0}), FramingError);
  CHECK_THROWS_AS(hamming74_encode_stream(BitBlock{1, 0, 0}), FramingError);

  int min_weight = 7;
  const auto& book = hamming74_codebook();
  for (int m = 1; m < 16; ++m) min_weight = std::min(min_weight, static_cast<int>(std::count(book[m].begin(), book[m].end(), 1)));
  CHECK(min_weight == 3);
  // Linearity over GF(2).
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b) CHECK(book[a ^ b] == xor_bits(book[a], book[b]));
}

TEST_CASE("hamming mld") {
  const auto& book = hamming74_codebook();
  int corrected = 0;
  for (int m = 0; m < 16; ++m) {
    std::vector<double> y(7);
    for (int i = 0; i < 7; ++i) y[i] = book[m][i] ? -1.0 : 1.0;
    const BitBlock info(book[m].begin(), book[m].begin() + 4);
    CHECK(hamming74_mld(y) == info);
    for (int i = 0; i < 7; ++i) {
      auto flipped = y;
      flipped[i] = -flipped[i];
      corrected += hamming74_mld(flipped) == info;
    }
  }
  CHECK(corrected == 112);
  CHECK_THROWS_AS(hamming74_mld(std::vector<double>(6)), FramingError);

  // Against minimum Euclidean distance over the codebook, with and without gains.
  Rng rng(6);
  for (int trial = 0; trial < 5000; ++trial) {
    std::vector<double> y(7), g(7);
    for (int i = 0; i < 7; ++i) {
      y[i] = rng.normal();
      g[i] = std::abs(rng.normal());
    }
    double best = 1e300, best_g = 1e300;
    int arg = 0, arg_g = 0;
    for (int m = 0; m < 16; ++m) {
      double d = 0.0, dg = 0.0;
      for (int i = 0; i < 7; ++i) {
        const double s = book[m][i] ? -1.0 : 1.0;
        d += (y[i] - s) * (y[i] - s);
        dg += (y[i] - g[i] * s) * (y[i] - g[i] * s);
      }
      if (d < best) best = d, arg = m;
      if (dg < best_g) best_g = dg, arg_g = m;
    }
    REQUIRE(hamming74_mld(y) == BitBlock(book[arg].begin(), book[arg].begin() + 4));
    REQUIRE(hamming74_mld(y, g) == BitBlock(book[arg_g].begin(), book[arg_g].begin() + 4));
  }
}

TEST_CASE("rsc encoder") {
  CHECK(rsc_encode(BitBlock(6, 0)) == BitBlock(16, 0));
  CHECK(rsc_encode(BitBlock{1, 0, 0, 0}) == BitBlock{1, 1, 0, 1, 0, 1, 0, 0, 1, 0, 1, 1});
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.next_u64() % 20;
    const BitBlock a = random_bits(n, rng), b = random_bits(n, rng);
    const BitBlock ca = rsc_encode(a);
    REQUIRE(ca.size() == 2 * (n + 2));
    REQUIRE(ca == rsc57(a));
    REQUIRE(rsc_encode(xor_bits(a, b)) == xor_bits(ca, rsc_encode(b)));
  }
}

TEST_CASE("viterbi decoding") {
  Rng rng(8);
  auto to_llr = [](const BitBlock& c, double mag) {
    std::vector<double> l(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) l[i] = c[i] ? -mag : mag;
    return l;
  };
  SUBCASE("noiseless round trip") {
    for (int t = 0; t < 1000; ++t) {
      const BitBlock u = random_bits(12, rng);
      REQUIRE(viterbi_decode(to_llr(rsc_encode(u), 4.0)) == u);
    }
  }
  SUBCASE("one flipped parity llr is still recovered") {
    for (int t = 0; t < 200; ++t) {
      const BitBlock u = random_bits(12, rng);
      auto l = to_llr(rsc_encode(u), 10.0);
      const std::size_t i = 2 * (rng.next_u64() % 14) + 1;
      l[i] = -l[i];
      REQUIRE(viterbi_decode(l) == u);
    }
  }
  SUBCASE("equals exhaustive ML on noisy blocks") {
    int agree = 0;
    for (int t = 0; t < 300; ++t) {
      const BitBlock u = random_bits(10, rng);
      auto l = to_llr(rsc_encode(u), 1.0);
      for (auto& v : l) v += rng.normal() * 1.2;
      agree += viterbi_decode(l) == brute_force_ml(l, 10);
    }
    CHECK(agree == 300);
  }
  SUBCASE("unterminated trellis picks the best end state") {
    TrellisSpec open{.terminated = false};
    const BitBlock u = random_bits(9, rng);
    const BitBlock c = rsc_encode(u, open);
    REQUIRE(c.size() == 18);
    CHECK(viterbi_decode(to_llr(c, 3.0), open) == u);
  }
  CHECK_THROWS_AS(viterbi_decode(std::vector<double>(5)), FramingError);
  CHECK_THROWS_AS(rsc_encode(BitBlock{1}, TrellisSpec{.systematic = false}), ConfigError);
}

TEST_CASE("fft") {
  ComplexBlock delta(64);
  delta[0] = 1.0;
  for (const auto& v : fft(delta)) CHECK(std::abs(v - cd{1.0, 0.0}) < 1e-15);

  for (std::size_t k : {0u, 1u, 17u, 63u}) {
    ComplexBlock tone(64);
    for (std::size_t n = 0; n < 64; ++n) tone[n] = std::polar(1.0, 2.0 * std::numbers::pi * double(k * n) / 64.0);
    const auto X = fft(tone);
    for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(X[i] - (i == k ? cd{64.0, 0.0} : cd{})) < 1e-11);
  }

  Rng rng(9);
  for (std::size_t n : {1u, 2u, 8u, 64u, 256u}) {
    ComplexBlock x(n);
    for (auto& v : x) v = rng.complex_normal(1.0);
    const auto X = fft(x);
    const auto ref = dft(x);
    double e = 0.0, px = 0.0, pX = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      e = std::max(e, std::abs(X[i] - ref[i]));
      px += std::norm(x[i]);
      pX += std::norm(X[i]);
    }
    CHECK(e < 1e-10);
    CHECK(pX == doctest::Approx(double(n) * px).epsilon(1e-12));
    const auto back = ifft(X);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(back[i] - x[i]) < 1e-12);
  }
  CHECK_THROWS_AS(fft(ComplexBlock(48)), ConfigError);
  CHECK_THROWS_AS(ifft(ComplexBlock{}), ConfigError);
}

TEST_CASE("ofdm chain") {
  Rng rng(10);
  const OfdmSpec spec;
  channel::ChannelProfile prof{.kind = channel::ChannelKind::multipath};

  SUBCASE("noiseless frames are recovered exactly") {
    for (int f = 0; f < 100; ++f) {
      const auto r = channel::draw_realization(prof, 64, 0.0, rng);
      const BitBlock b = random_bits(128 * 3, rng);
      REQUIRE(ofdm_chain(b, spec, r, rng, false, CsiMode::perfect).bits == b);
      REQUIRE(ofdm_chain(b, spec, r, rng, false, CsiMode::estimated).bits == b);
    }
  }
  SUBCASE("coded noiseless frames are recovered exactly") {
    const auto r = channel::draw_realization(prof, 64, 0.0, rng);
    const BitBlock b = random_bits(100, rng);
    const auto out = ofdm_chain(b, spec, r, rng, true, CsiMode::estimated);
    CHECK(out.bits == b);
    CHECK(out.ofdm_symbols == 2);  // 204 coded bits over 128-bit symbols
  }
  SUBCASE("framing and cyclic prefix checks") {
    const auto r = channel::draw_realization(prof, 64, 0.0, rng);
    CHECK_THROWS_AS(ofdm_chain(BitBlock(100), spec, r, rng), FramingError);
    channel::ChannelRealization long_r = r;
    long_r.taps.push_back({1.0, 0.0, 17});
    CHECK_THROWS_AS(ofdm_chain(BitBlock(128), spec, long_r, rng), ConfigError);
  }
  SUBCASE("perfect-CSI BER matches flat Rayleigh and LS is no better") {
    // 3 unit-power taps: E|H_k|^2 = 3, mean bit SNR 3 / (2 sigma^2) = 10.
    const double var = 0.15;
    std::size_t errs_p = 0, errs_ls = 0, total = 0;
    for (int f = 0; f < 2000; ++f) {
      const auto r = channel::draw_realization(prof, 64, var, rng);
      const BitBlock b = random_bits(128, rng);
      errs_p += bit_errors(b, ofdm_chain(b, spec, r, rng, false, CsiMode::perfect).bits);
      errs_ls += bit_errors(b, ofdm_chain(b, spec, r, rng, false, CsiMode::estimated).bits);
      total += b.size();
    }
    const double analytic = 0.5 * (1.0 - std::sqrt(10.0 / 11.0));
    const double sim = double(errs_p) / double(total);
    CHECK(std::abs(sim - analytic) < 0.15 * analytic);
    CHECK(errs_ls >= errs_p);
  }
}
