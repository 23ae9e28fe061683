#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <vector>

#include "gancomm/experiment/config.hpp"
#include "gancomm/model/transceiver.hpp"

namespace gancomm::experiment {

struct BerPoint {
  double snr_db = 0.0;
  std::size_t bits = 0;
  std::size_t bit_errors = 0;
  std::size_t blocks = 0;
  std::size_t block_errors = 0;
  double ber = 0.0;
  double bler = 0.0;
  double ci95 = 0.0;    // Wilson half-width on the BER
  bool capped = false;  // stopped at max_blocks before reaching min_errors
};

/// Wilson score interval half-width for `errors` out of `trials`.
double wilson_halfwidth(std::size_t errors, std::size_t trials, double z = 1.959963984540054);

struct UnitCounts {
  std::size_t bits = 0;
  std::size_t bit_errors = 0;
  std::size_t blocks = 0;
  std::size_t block_errors = 0;
};

/// A link simulated block by block. Block i at a given SNR draws everything
/// (bits, channel, noise) from block_rng(seed, snr, i), so any partition of
/// the blocks across workers yields the same counts.
class LinkSimulator {
 public:
  virtual ~LinkSimulator() = default;
  /// Blocks [first, first + count). Must be safe to call concurrently.
  virtual UnitCounts run_blocks(double snr_db, std::uint64_t first, std::size_t count) const = 0;
  virtual std::size_t bits_per_block() const = 0;
};

Rng block_rng(std::uint64_t seed, double snr_db, std::uint64_t block);

std::unique_ptr<LinkSimulator> make_baseline(const ExperimentConfig& cfg);
/// Evaluates the learned transmitter/receiver over the real channel
/// cfg.eval.channel. `trained` must be true (ContractError otherwise).
std::unique_ptr<LinkSimulator> make_learned(const ExperimentConfig& cfg, const model::Transceiver& tr, bool trained);

/// Per SNR: whole work units of unit_blocks blocks until the bit errors reach
/// min_errors or max_blocks blocks have run. Work units are spread over
/// `workers` threads and consumed in order, so the result does not depend on
/// the worker count.
std::vector<BerPoint> monte_carlo_curve(const LinkSimulator& sim, const EvalConfig& eval);

/// Comment lines (config hash, axis convention, capped points), then
/// "snr_db,ber,bler,bits,blocks,ci95".
void write_curve_csv(std::ostream& os, const std::vector<BerPoint>& points, const ExperimentConfig& cfg);
/// <stem>.ber.dat and <stem>.bler.dat, two whitespace-separated columns.
void write_gnuplot(const std::filesystem::path& stem, const std::vector<BerPoint>& points);

}  // namespace gancomm::experiment
