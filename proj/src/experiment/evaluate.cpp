#include "gancomm/experiment/evaluate.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "gancomm/classical/coding.hpp"
#include "gancomm/classical/ofdm.hpp"
#include "gancomm/classical/qam.hpp"
#include "gancomm/errors.hpp"
#include "gancomm/experiment/trainer.hpp"

namespace gancomm::experiment {

using channel::cd;
using channel::ChannelKind;
using channel::ComplexBlock;
using classical::BitBlock;

double wilson_halfwidth(std::size_t errors, std::size_t trials, double z) {
  if (trials == 0) return 0.0;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(errors) / n;
  return z / (1.0 + z * z / n) * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
}

Rng block_rng(std::uint64_t seed, double snr_db, std::uint64_t block) {
  return Rng::derive(seed, {0xE7A1, std::bit_cast<std::uint64_t>(snr_db), block});
}

namespace {

BitBlock random_bits(std::size_t n, Rng& rng) {
  BitBlock b(n);
  for (auto& v : b) v = rng.bit();
  return b;
}

void tally(UnitCounts& c, const BitBlock& tx, const BitBlock& rx) {
  const std::size_t e = classical::bit_errors(tx, rx);
  c.bits += tx.size();
  c.bit_errors += e;
  c.blocks += 1;
  c.block_errors += e > 0;
}

// Flat channel seen by one block: per-symbol gains (CSI) plus received y.
struct FlatLink {
  ComplexBlock y;
  ComplexBlock gains;  // empty for AWGN
};

class Baseline : public LinkSimulator {
 public:
  explicit Baseline(const ExperimentConfig& cfg) : cfg_(cfg), ch_(cfg.eval.channel) {
    const std::size_t n = cfg.n;
    switch (cfg.system) {
      case SystemKind::baseline_uncoded:
        if (n % 2) throw ConfigError("uncoded 4-QAM needs an even number of bits per block");
        break;
      case SystemKind::baseline_hamming:
        if (n % 4) throw ConfigError("Hamming(7,4) needs a multiple of 4 bits per block");
        break;
      case SystemKind::baseline_ofdm:
        if (n % 128) throw ConfigError("uncoded OFDM needs whole 128-bit OFDM symbols per block");
        break;
      default:
        break;
    }
    const bool ofdm = cfg.system == SystemKind::baseline_ofdm || cfg.system == SystemKind::baseline_ofdm_coded;
    if (!ofdm && ch_.kind == ChannelKind::multipath)
      throw ConfigError("single-carrier baselines are defined for AWGN and Rayleigh only; use baseline_ofdm");
  }

  std::size_t bits_per_block() const override { return cfg_.n; }

  UnitCounts run_blocks(double snr_db, std::uint64_t first, std::size_t count) const override {
    UnitCounts c;
    for (std::size_t i = 0; i < count; ++i) {
      Rng rng = block_rng(cfg_.seed, snr_db, first + i);
      const BitBlock bits = random_bits(cfg_.n, rng);
      tally(c, bits, run_one(bits, snr_db, rng));
    }
    return c;
  }

 private:
  // Complex symbols through an AWGN or Rayleigh channel, with the gains the
  // receiver uses: the true ones or a per-block LS pilot estimate.
  FlatLink flat(const ComplexBlock& x, double var, Rng& rng) const {
    const auto r = channel::draw_realization(ch_, x.size(), var, rng);
    FlatLink out;
    if (ch_.kind == ChannelKind::rayleigh) {
      out.gains = r.flat_gains.size() == 1 ? ComplexBlock(x.size(), r.flat_gains[0]) : r.flat_gains;
      if (cfg_.eval.csi == classical::CsiMode::estimated) {
        const ComplexBlock yp = channel::transmit_pilots(ch_, r, rng);
        const ComplexBlock p = ch_.pilots();
        if (yp.empty()) throw ConfigError("estimated CSI needs pilot_len > 0");
        out.gains.assign(x.size(), yp[0] / p[0]);
      }
    }
    out.y = channel::apply_channel(x, r, rng);
    return out;
  }

  BitBlock run_one(const BitBlock& bits, double snr_db, Rng& rng) const {
    const std::size_t n = cfg_.n;
    switch (cfg_.system) {
      case SystemKind::baseline_uncoded: {
        const double var = channel::snr_to_noise_var(snr_db, n, n / 2);
        const FlatLink l = flat(classical::qam_mod(bits, 4), var, rng);
        return classical::qam_demod(l.y, l.gains, 4, var).hard;
      }
      case SystemKind::baseline_hamming: {
        const BitBlock code = classical::hamming74_encode_stream(bits);
        const double var = channel::snr_to_noise_var(snr_db, n, code.size());
        ComplexBlock x(code.size());
        for (std::size_t i = 0; i < code.size(); ++i) x[i] = code[i] ? -1.0 : 1.0;
        std::vector<double> soft(code.size()), gain(code.size(), 1.0);
        if (ch_.kind == ChannelKind::awgn) {
          // Real signalling: only the in-phase noise component matters.
          const double sd = std::sqrt(var / 2.0);
          for (std::size_t i = 0; i < x.size(); ++i) soft[i] = x[i].real() + sd * rng.normal();
        } else {
          const FlatLink l = flat(x, var, rng);
          for (std::size_t i = 0; i < x.size(); ++i) {
            const double g = std::abs(l.gains[i]);
            gain[i] = g;
            soft[i] = g > 0.0 ? (std::conj(l.gains[i]) * l.y[i]).real() / g : 0.0;
          }
        }
        BitBlock out;
        for (std::size_t i = 0; i < code.size(); i += 7) {
          const BitBlock d = classical::hamming74_mld(std::span(soft).subspan(i, 7), std::span(gain).subspan(i, 7));
          out.insert(out.end(), d.begin(), d.end());
        }
        return out;
      }
      case SystemKind::baseline_rsc: {
        const BitBlock code = classical::rsc_encode(bits);
        const double var = channel::snr_to_noise_var(snr_db, n, code.size() / 2);
        const FlatLink l = flat(classical::qam_mod(code, 4), var, rng);
        return classical::viterbi_decode(classical::qam_demod(l.y, l.gains, 4, var).llr);
      }
      case SystemKind::baseline_ofdm:
      case SystemKind::baseline_ofdm_coded: {
        const bool coded = cfg_.system == SystemKind::baseline_ofdm_coded;
        const std::size_t channel_bits = coded ? 2 * (n + 2) : n;
        const double var = channel::snr_to_noise_var(snr_db, n, channel_bits / 2);
        const auto r = channel::draw_realization(ch_, 64, var, rng);
        return classical::ofdm_chain(bits, {}, r, rng, coded, cfg_.eval.csi).bits;
      }
      default:
        throw ConfigError("not a baseline system: " + std::string(to_string(cfg_.system)));
    }
  }

  ExperimentConfig cfg_;
  channel::ChannelProfile ch_;
};

class Learned : public LinkSimulator {
 public:
  Learned(const ExperimentConfig& cfg, const model::Transceiver& tr) : cfg_(cfg), tr_(tr), layout_(cfg.layout()) {}

  std::size_t bits_per_block() const override { return cfg_.n; }

  UnitCounts run_blocks(double snr_db, std::uint64_t first, std::size_t count) const override {
    UnitCounts c;
    constexpr std::size_t kChunk = 256;
    for (std::size_t done = 0; done < count; done += kChunk) {
      const std::size_t B = std::min(kChunk, count - done);
      std::vector<Rng> rngs;
      rngs.reserve(B);
      nn::Tensor bits(layout_.bits_shape(B));
      for (std::size_t b = 0; b < B; ++b) {
        rngs.push_back(block_rng(cfg_.seed, snr_db, first + done + b));
        for (std::size_t i = 0; i < cfg_.n; ++i) bits.at(b, i) = rngs.back().bit();
      }
      const Batch batch = channel_batch(layout_, cfg_.eval.channel, tr_.tx, bits, snr_db, rngs);
      nn::Tape tape(false);
      const nn::Tensor soft = model::receive(tr_.rx, tape.constant(batch.y), batch.pilots, layout_).value();
      for (std::size_t b = 0; b < B; ++b) {
        BitBlock tx(cfg_.n), rx(cfg_.n);
        for (std::size_t i = 0; i < cfg_.n; ++i) {
          tx[i] = static_cast<std::uint8_t>(bits.at(b, i));
          rx[i] = soft.at(b, i) > 0.5;
        }
        tally(c, tx, rx);
      }
    }
    return c;
  }

 private:
  ExperimentConfig cfg_;
  const model::Transceiver& tr_;
  model::Layout layout_;
};

}  // namespace

std::unique_ptr<LinkSimulator> make_baseline(const ExperimentConfig& cfg) {
  if (is_learned(cfg.system)) throw ConfigError("make_baseline: " + std::string(to_string(cfg.system)) + " is learned");
  return std::make_unique<Baseline>(cfg);
}

std::unique_ptr<LinkSimulator> make_learned(const ExperimentConfig& cfg, const model::Transceiver& tr, bool trained) {
  if (!is_learned(cfg.system)) throw ConfigError("make_learned: " + std::string(to_string(cfg.system)) + " is not learned");
  if (!trained) throw ContractError("the learned system has not been trained");
  return std::make_unique<Learned>(cfg, tr);
}

std::vector<BerPoint> monte_carlo_curve(const LinkSimulator& sim, const EvalConfig& eval) {
  std::vector<BerPoint> out;
  const std::size_t U = eval.unit_blocks;
  const std::size_t workers = std::max<std::size_t>(1, eval.workers);
  for (double snr : eval.snr_list) {
    UnitCounts total;
    std::uint64_t next_unit = 0;
    bool done = false;
    while (!done) {
      std::vector<std::pair<std::uint64_t, std::size_t>> wave;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::uint64_t first = (next_unit + w) * U;
        if (first >= eval.max_blocks) break;
        wave.emplace_back(first, std::min<std::size_t>(U, eval.max_blocks - first));
      }
      std::vector<UnitCounts> results(wave.size());
      if (wave.size() == 1) {
        results[0] = sim.run_blocks(snr, wave[0].first, wave[0].second);
      } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(wave.size());
        for (std::size_t i = 0; i < wave.size(); ++i)
          pool.emplace_back([&, i] {
            try {
              results[i] = sim.run_blocks(snr, wave[i].first, wave[i].second);
            } catch (...) {
              errors[i] = std::current_exception();
            }
          });
        for (auto& t : pool) t.join();
        for (auto& e : errors)
          if (e) std::rethrow_exception(e);
      }
      for (std::size_t i = 0; i < results.size() && !done; ++i) {
        total.bits += results[i].bits;
        total.bit_errors += results[i].bit_errors;
        total.blocks += results[i].blocks;
        total.block_errors += results[i].block_errors;
        ++next_unit;
        done = total.bit_errors >= eval.min_errors || total.blocks >= eval.max_blocks;
      }
      if (wave.empty()) done = true;
    }
    BerPoint p;
    p.snr_db = snr;
    p.bits = total.bits;
    p.bit_errors = total.bit_errors;
    p.blocks = total.blocks;
    p.block_errors = total.block_errors;
    p.ber = total.bits ? static_cast<double>(total.bit_errors) / static_cast<double>(total.bits) : 0.0;
    p.bler = total.blocks ? static_cast<double>(total.block_errors) / static_cast<double>(total.blocks) : 0.0;
    p.ci95 = wilson_halfwidth(total.bit_errors, total.bits);
    p.capped = total.bit_errors < eval.min_errors;
    out.push_back(p);
  }
  return out;
}

void write_curve_csv(std::ostream& os, const std::vector<BerPoint>& points, const ExperimentConfig& cfg) {
  os << "# gancomm curve: " << cfg.name << " (" << to_string(cfg.system) << ")\n";
  os << "# config_hash=" << cfg.hash() << '\n';
  os << "# snr_db axis is Eb/N0 in dB; ci95 is the Wilson 95% half-width on ber\n";
  os << "# stop rule: min_errors=" << cfg.eval.min_errors << " max_blocks=" << cfg.eval.max_blocks << '\n';
  std::string capped;
  for (const auto& p : points) {
    if (!p.capped) continue;
    std::ostringstream s;
    s << p.snr_db;
    capped += (capped.empty() ? "" : " ") + s.str();
  }
  if (!capped.empty()) os << "# max_blocks reached before min_errors at snr_db: " << capped << '\n';
  os << "snr_db,ber,bler,bits,blocks,ci95\n";
  char buf[256];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.6g,%.10e,%.10e,%zu,%zu,%.6e\n", p.snr_db, p.ber, p.bler, p.bits, p.blocks,
                  p.ci95);
    os << buf;
  }
}

void write_gnuplot(const std::filesystem::path& stem, const std::vector<BerPoint>& points) {
  std::ofstream ber(stem.string() + ".ber.dat"), bler(stem.string() + ".bler.dat");
  ber << "# snr_db ber\n";
  bler << "# snr_db bler\n";
  char buf[128];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.6g %.10e\n", p.snr_db, p.ber);
    ber << buf;
    std::snprintf(buf, sizeof buf, "%.6g %.10e\n", p.snr_db, p.bler);
    bler << buf;
  }
}

}  // namespace gancomm::experiment
