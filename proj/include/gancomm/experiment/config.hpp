#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gancomm/channel/channels.hpp"
#include "gancomm/classical/ofdm.hpp"
#include "gancomm/model/transceiver.hpp"

namespace gancomm::experiment {

enum class SystemKind {
  e2e_fcn,
  e2e_cnn,
  baseline_uncoded,  // Gray 4-QAM, coherent detection
  baseline_hamming,  // Hamming(7,4) + MLD on real BPSK symbols
  baseline_rsc,      // RSC (1, 5/7) + soft Viterbi on 4-QAM
  baseline_ofdm,
  baseline_ofdm_coded,
};

SystemKind parse_system(std::string_view s);
std::string_view to_string(SystemKind k);
bool is_learned(SystemKind k);

/// How the transmitter phase sees the channel: through the trained
/// generator, or through a differentiable copy of the true channel.
enum class Surrogate { gan, direct };

struct TrainConfig {
  std::size_t batch = 320;
  double snr_db = 3.0;
  std::size_t steps_r = 200;
  std::size_t steps_t = 200;
  std::size_t steps_gan = 200;
  std::size_t warmup_gan = 200;  // GAN-only steps before the first outer iteration
  std::size_t outer = 50;        // hard cap on outer iterations
  std::size_t plateau_window = 5;
  double plateau_tol = 0.01;
  double lr_tx = 1e-3;
  double lr_rx = 1e-3;
  double lr_gan = 1e-4;
  double gan_beta1 = 0.5;  // Adam first-moment decay for G and D
  int k_d = 1;
  Surrogate surrogate = Surrogate::gan;
  /// Symbols the GAN phases condition on: the current transmitter's output,
  /// or uniformly drawn 16-QAM points (for channel-modelling runs).
  bool gan_on_qam16 = false;
  double width_scale = 1.0;
  std::size_t checkpoint_every = 1;  // outer iterations; 0 disables periodic checkpoints
  std::size_t log_every = 10;        // steps between log rows
};

struct EvalConfig {
  std::vector<double> snr_list;
  std::size_t min_errors = 200;
  std::size_t max_blocks = 1'000'000;
  std::size_t unit_blocks = 500;  // blocks per work unit
  std::size_t workers = 1;
  classical::CsiMode csi = classical::CsiMode::perfect;
  /// Test-time channel; differs from the training channel in mismatch runs.
  channel::ChannelProfile channel;
};

struct ExperimentConfig {
  std::string name = "experiment";
  SystemKind system = SystemKind::e2e_fcn;
  channel::ChannelProfile channel;  // training channel
  std::size_t n = 4;
  std::size_t k = 7;
  bool real_symbols = false;
  TrainConfig train;
  EvalConfig eval;
  std::uint64_t seed = 1;
  std::filesystem::path model_dir = "runs/experiment";

  /// Canonical JSON of the full, defaults-filled config. The worker count
  /// and model_dir are left out since they never change results.
  std::string canonical_json() const;
  /// FNV-1a of canonical_json(), as 16 hex digits.
  std::string hash() const;
  /// Hash over everything except the evaluation section: identifies the
  /// trained model, so evaluation settings can change without retraining.
  std::string train_hash() const;
  model::Layout layout() const;
};

/// Strict parser: unknown keys and out-of-range values throw ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// "a:b:step", inclusive of b within rounding.
std::vector<double> parse_snr_range(const std::string& spec);

}  // namespace gancomm::experiment
