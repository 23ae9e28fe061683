#include "gancomm/classical/coding.hpp"

#include <limits>
#include <string>

#include "gancomm/errors.hpp"

namespace gancomm::classical {

namespace {

constexpr std::uint8_t kParity[4][3] = {{1, 1, 0}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}};

BitBlock encode_unchecked(const std::uint8_t* info) {
  BitBlock c(7, 0);
  for (int i = 0; i < 4; ++i) {
    c[static_cast<std::size_t>(i)] = info[i] & 1u;
    for (int j = 0; j < 3; ++j) c[4 + static_cast<std::size_t>(j)] ^= (info[i] & kParity[i][j]);
  }
  return c;
}

// Coefficient of D^i in a polynomial written with D^0 as its top bit.
unsigned tap(unsigned poly, int memory, int i) { return (poly >> (memory - i)) & 1u; }

void check_trellis(const TrellisSpec& t) {
  if (t.constraint < 2 || t.constraint > 16) throw ConfigError("trellis constraint length out of range");
  if (!t.systematic) throw ConfigError("only systematic trellises are supported");
  if (tap(t.feedback, t.memory(), 0) != 1) throw ConfigError("feedback polynomial needs a D^0 tap");
}

// state bit i-1 holds a_{t-i}
unsigned feedback_sum(const TrellisSpec& t, unsigned state) {
  unsigned s = 0;
  for (int i = 1; i <= t.memory(); ++i) s ^= tap(t.feedback, t.memory(), i) & (state >> (i - 1));
  return s & 1u;
}

struct Branch {
  unsigned next;
  std::uint8_t u;
  std::uint8_t p;
};

Branch step(const TrellisSpec& t, unsigned state, unsigned a) {
  unsigned p = tap(t.feedforward, t.memory(), 0) & a;
  for (int i = 1; i <= t.memory(); ++i) p ^= tap(t.feedforward, t.memory(), i) & (state >> (i - 1));
  const unsigned u = a ^ feedback_sum(t, state);
  const unsigned next = ((state << 1) | a) & static_cast<unsigned>(t.states() - 1);
  return {next, static_cast<std::uint8_t>(u), static_cast<std::uint8_t>(p & 1u)};
}

}  // namespace

BitBlock hamming74_encode(std::span<const std::uint8_t> info) {
  if (info.size() != 4) throw FramingError("Hamming(7,4) encodes exactly 4 bits, got " + std::to_string(info.size()));
  return encode_unchecked(info.data());
}

const std::array<BitBlock, 16>& hamming74_codebook() {
  static const std::array<BitBlock, 16> book = [] {
    std::array<BitBlock, 16> b;
    for (int m = 0; m < 16; ++m) {
      const std::uint8_t info[4] = {static_cast<std::uint8_t>((m >> 3) & 1), static_cast<std::uint8_t>((m >> 2) & 1),
                                    static_cast<std::uint8_t>((m >> 1) & 1), static_cast<std::uint8_t>(m & 1)};
      b[static_cast<std::size_t>(m)] = encode_unchecked(info);
    }
    return b;
  }();
  return book;
}

BitBlock hamming74_mld(std::span<const double> y, std::span<const double> gains) {
  if (y.size() != 7) throw FramingError("Hamming(7,4) decoding needs 7 values, got " + std::to_string(y.size()));
  if (!gains.empty() && gains.size() != 7) throw DimensionError("Hamming(7,4) decoding needs 7 gains");
  const auto& book = hamming74_codebook();
  double best = -std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t m = 0; m < book.size(); ++m) {
    double metric = 0.0;
    for (std::size_t i = 0; i < 7; ++i) {
      const double g = gains.empty() ? 1.0 : gains[i];
      metric += y[i] * g * (book[m][i] ? -1.0 : 1.0);
    }
    if (metric > best) {
      best = metric;
      arg = m;
    }
  }
  return BitBlock(book[arg].begin(), book[arg].begin() + 4);
}

BitBlock hamming74_encode_stream(std::span<const std::uint8_t> info) {
  if (info.size() % 4 != 0) throw FramingError("Hamming(7,4) stream needs a multiple of 4 bits");
  BitBlock out;
  out.reserve(info.size() / 4 * 7);
  for (std::size_t i = 0; i < info.size(); i += 4) {
    const BitBlock c = encode_unchecked(info.data() + i);
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

BitBlock rsc_encode(std::span<const std::uint8_t> info, const TrellisSpec& trellis) {
  check_trellis(trellis);
  BitBlock out;
  out.reserve(2 * (info.size() + static_cast<std::size_t>(trellis.tail())));
  unsigned state = 0;
  for (const std::uint8_t u : info) {
    const Branch b = step(trellis, state, (u & 1u) ^ feedback_sum(trellis, state));
    out.push_back(b.u);
    out.push_back(b.p);
    state = b.next;
  }
  for (int i = 0; i < trellis.tail(); ++i) {
    const Branch b = step(trellis, state, 0);
    out.push_back(b.u);
    out.push_back(b.p);
    state = b.next;
  }
  return out;
}

BitBlock viterbi_decode(std::span<const double> llr, const TrellisSpec& trellis) {
  check_trellis(trellis);
  const std::size_t tail = static_cast<std::size_t>(trellis.tail());
  if (llr.size() % 2 != 0 || llr.size() / 2 < tail)
    throw FramingError("viterbi_decode: " + std::to_string(llr.size()) + " values do not fit the trellis");
  const std::size_t steps = llr.size() / 2;
  const std::size_t n_info = steps - tail;
  const std::size_t S = static_cast<std::size_t>(trellis.states());
  constexpr double kNone = -std::numeric_limits<double>::infinity();

  std::vector<double> metric(S, kNone), next(S);
  metric[0] = 0.0;
  // survivors[t * S + s] = predecessor state, info bit packed in bit 31
  std::vector<unsigned> survivors(steps * S);
  std::vector<Branch> table(S * 2);
  for (unsigned s = 0; s < S; ++s)
    for (unsigned a = 0; a < 2; ++a) table[s * 2 + a] = step(trellis, s, a);

  for (std::size_t t = 0; t < steps; ++t) {
    std::fill(next.begin(), next.end(), kNone);
    const double lu = llr[2 * t], lp = llr[2 * t + 1];
    const unsigned a_max = t < n_info ? 2 : 1;
    for (unsigned s = 0; s < S; ++s) {
      if (metric[s] == kNone) continue;
      for (unsigned a = 0; a < a_max; ++a) {
        const Branch& b = table[s * 2 + a];
        const double m = metric[s] + (b.u ? -lu : lu) + (b.p ? -lp : lp);
        if (m > next[b.next]) {
          next[b.next] = m;
          survivors[t * S + b.next] = s | (static_cast<unsigned>(b.u) << 31);
        }
      }
    }
    metric.swap(next);
  }

  unsigned state = 0;
  if (!trellis.terminated) {
    for (unsigned s = 1; s < S; ++s)
      if (metric[s] > metric[state]) state = s;
  }
  BitBlock info(steps);
  for (std::size_t t = steps; t-- > 0;) {
    const unsigned sv = survivors[t * S + state];
    info[t] = static_cast<std::uint8_t>(sv >> 31);
    state = sv & 0x7fffffffu;
  }
  info.resize(n_info);
  return info;
}

}  // namespace gancomm::classical
