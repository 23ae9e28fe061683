#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gancomm/experiment/config.hpp"
#include "gancomm/model/gan.hpp"

namespace gancomm::experiment {

using nn::Tensor;

/// One training or evaluation batch drawn from the true channel.
struct Batch {
  Tensor bits;  // [B, N]
  Tensor x;     // [B, K, dims], from the current transmitter
  Tensor y;     // [B, y_len, dims], real channel output
  std::optional<Tensor> pilots;  // [B, P, 2]
  std::vector<channel::ChannelRealization> realizations;
  Tensor noise;  // the additive noise inside y
};

/// Noiseless channel response to x, shaped [y_len, dims] per block.
channel::ComplexBlock propagate(const channel::ComplexBlock& x, const channel::ChannelRealization& r);

/// Differentiable batch version of propagate over [B, K, dims] symbols. Real
/// symbols (dims = 1) pass through unchanged, which is the AWGN response.
nn::Var propagate_var(nn::Var x, const std::vector<channel::ChannelRealization>& realizations,
                      const model::Layout& layout);

/// Fresh bits, one channel realization per block, pilots and noise, all from
/// `rng`, with x produced by `tx` off the gradient tape. The noise variance
/// follows snr_to_noise_var(snr_db, N, K); real symbols get half of it.
Batch generate_batch(const model::Layout& layout, const channel::ChannelProfile& profile, const model::Network& tx,
                     std::size_t batch, double snr_db, Rng& rng);

/// Builds a batch from explicit bits with one Rng per block (for
/// counter-seeded evaluation). block_rngs[i] draws block i's channel.
Batch channel_batch(const model::Layout& layout, const channel::ChannelProfile& profile, const model::Network& tx,
                    Tensor bits, double snr_db, std::vector<Rng>& block_rngs);

struct LogRow {
  std::size_t outer = 0;
  std::string phase;  // warmup, receiver, transmitter, joint, gan
  std::size_t step = 0;
  double loss = 0.0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  double wall_ms = 0.0;
};

/// The alternating schedule: an optional GAN warm-up, then per outer
/// iteration a receiver phase on real channel data, a transmitter phase
/// through the surrogate with the receiver and generator frozen, and a GAN
/// phase with the transmitter frozen. With the direct surrogate the GAN is
/// never trained and the transmitter phase updates transmitter and receiver
/// together through the differentiable true channel.
///
/// Training stops when the mean receiver loss improves by less than
/// plateau_tol (relative) over plateau_window outer iterations, or at the
/// outer-iteration cap.
class Trainer {
 public:
  explicit Trainer(ExperimentConfig cfg);

  const ExperimentConfig& config() const { return cfg_; }
  const model::Layout& layout() const { return layout_; }
  model::Transceiver& transceiver() { return tr_; }
  const model::Transceiver& transceiver() const { return tr_; }
  model::ChannelGan& gan() { return gan_; }
  const model::ChannelGan& gan() const { return gan_; }
  Rng& rng() { return rng_; }

  Batch generate_batch(std::size_t batch);
  Batch generate_batch() { return generate_batch(cfg_.train.batch); }
  /// Batch for the GAN phases: as generate_batch, or with uniform 16-QAM
  /// symbols in place of the transmitter output when gan_inputs = qam16.
  Batch generate_gan_batch();

  // Single optimizer steps. Each one checks that the networks it must not
  // touch are bit-identical afterwards (ContractError otherwise).
  double receiver_step(const Batch& b);
  double transmitter_step(const Batch& b);
  model::GanLosses gan_step(const Batch& b);

  double train_receiver_phase(std::size_t steps);
  double train_transmitter_phase(std::size_t steps);
  model::GanLosses train_gan_phase(std::size_t steps, const char* phase = "gan");

  /// Runs the warm-up if pending, then one outer iteration. Returns false
  /// once the stopping rule has fired.
  bool run_outer_iteration();

  /// Trains to completion. With a directory, checkpoints every
  /// checkpoint_every outer iterations and at the end; a NaN or infinity
  /// aborts with a diagnostic checkpoint in <dir>/diagnostic and rethrows.
  void run(const std::optional<std::filesystem::path>& dir = std::nullopt,
           const std::function<void(const Trainer&)>& on_outer = {});

  bool finished() const { return finished_; }
  std::size_t outer_done() const { return outer_done_; }
  const std::vector<LogRow>& log() const { return log_; }
  const std::vector<double>& outer_losses() const { return outer_losses_; }

  /// model.gckp (all parameters with optimizer state), state.json (schedule
  /// position, RNG state, loss history) and train_log.csv.
  void save(const std::filesystem::path& dir);
  /// Restores a saved run; the config hash must match.
  static Trainer load(const std::filesystem::path& dir, ExperimentConfig cfg);

  void write_log_csv(std::ostream& os) const;

 private:
  std::vector<nn::Parameter*> all_parameters();
  void log_row(LogRow row);
  bool plateaued() const;

  ExperimentConfig cfg_;
  model::Layout layout_;
  model::Transceiver tr_;
  model::ChannelGan gan_;
  Rng rng_;
  std::size_t outer_done_ = 0;
  bool warmup_done_ = false;
  bool finished_ = false;
  std::vector<double> outer_losses_;
  std::vector<LogRow> log_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
  double wall_offset_ms_ = 0.0;
};

}  // namespace gancomm::experiment
