#include "goldens.hpp"

#include <cstdint>
#include <fstream>
#include <limits>
#include <vector>

#include "gancomm/errors.hpp"
#include "gancomm/rng.hpp"

namespace gancomm::tools {

namespace {

using Bits = std::vector<int>;

// Hamming(7,4) from the parity-check view: c = (d1..d4, p1, p2, p3) with
// p1 = d1+d2+d4, p2 = d1+d3+d4, p3 = d2+d3+d4.
Bits hamming(const Bits& d) {
  return {d[0], d[1], d[2], d[3], d[0] ^ d[1] ^ d[3], d[0] ^ d[2] ^ d[3], d[1] ^ d[2] ^ d[3]};
}

// (1, 5/7) recursive systematic code, terminated with two tail steps.
Bits rsc(const Bits& u) {
  Bits out;
  int a1 = 0, a2 = 0;
  auto step = [&](int in) {
    const int a = in ^ a1 ^ a2;
    out.push_back(in);
    out.push_back(a ^ a2);
    a2 = a1;
    a1 = a;
  };
  for (int b : u) step(b);
  step(a1 ^ a2);
  step(a1 ^ a2);
  return out;
}

std::string join(const Bits& b) {
  std::string s;
  for (int v : b) s += static_cast<char>('0' + v);
  return s;
}

Bits bits_of(std::uint32_t m, std::size_t n) {
  Bits b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = (m >> (n - 1 - i)) & 1u;
  return b;
}

}  // namespace

void write_goldens(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "hamming74.csv");
    os << "info,codeword\n";
    for (std::uint32_t m = 0; m < 16; ++m) os << join(bits_of(m, 4)) << ',' << join(hamming(bits_of(m, 4))) << '\n';
  }
  Rng rng(20240531);
  {
    std::ofstream os(dir / "rsc57.csv");
    os << "info,codeword\n";
    for (int i = 0; i < 32; ++i) {
      Bits u(1 + rng.next_u64() % 16);
      for (int& b : u) b = rng.bit();
      os << join(u) << ',' << join(rsc(u)) << '\n';
    }
  }
  {
    // Noisy soft values of random codewords, decoded by exhaustive search.
    std::ofstream os(dir / "viterbi_ml.csv");
    os << "llr,decoded\n";
    os.precision(17);
    constexpr std::size_t n = 8;
    for (int i = 0; i < 40; ++i) {
      Bits u(n);
      for (int& b : u) b = rng.bit();
      const Bits c = rsc(u);
      std::vector<double> llr(c.size());
      for (std::size_t j = 0; j < c.size(); ++j) llr[j] = (c[j] ? -1.0 : 1.0) + 1.1 * rng.normal();
      double best = -std::numeric_limits<double>::infinity();
      Bits arg;
      for (std::uint32_t m = 0; m < (1u << n); ++m) {
        const Bits cand = bits_of(m, n);
        const Bits cc = rsc(cand);
        double metric = 0.0;
        for (std::size_t j = 0; j < cc.size(); ++j) metric += cc[j] ? -llr[j] : llr[j];
        if (metric > best) best = metric, arg = cand;
      }
      for (std::size_t j = 0; j < llr.size(); ++j) os << (j ? " " : "") << llr[j];
      os << ',' << join(arg) << '\n';
    }
  }
  if (!std::filesystem::exists(dir / "viterbi_ml.csv")) throw ConfigError("could not write goldens to " + dir.string());
}

}  // namespace gancomm::tools
