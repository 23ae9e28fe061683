#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gancomm/experiment/trainer.hpp"

namespace gancomm::experiment {

struct GradcheckResult {
  std::string kind;
  double max_rel_error = 0.0;
  std::size_t trials = 0;
};

/// Reverse-mode gradients of every differentiable layer kind against central
/// finite differences, over `seeds` random shapes and values each.
std::vector<GradcheckResult> gradcheck_suite(std::size_t seeds = 100);

struct ConstellationRow {
  std::size_t condition = 0;
  bool gan = false;
  channel::cd x;
  channel::cd pilot;  // received pilot used as conditioning (0 without pilots)
  channel::cd y;      // first output symbol
};

/// Default conditioning grid: pilots h = r e^{j pi m / 4} with r in
/// {0.5, 1, 1.5} and m = 0..7 for fading channels, one empty condition for AWGN.
std::vector<channel::cd> default_conditions(const channel::ChannelProfile& profile);

/// For each condition and each 16-QAM point (placed on every symbol of the
/// block), `samples` outputs of the true channel (flat gain equal to the
/// pilot, noise at the training SNR) and of the generator conditioned on the
/// same noiseless pilot.
std::vector<ConstellationRow> constellation_dump(const Trainer& trainer, const std::vector<channel::cd>& conditions,
                                                 std::size_t samples, Rng& rng);

void write_constellation_csv(std::ostream& os, const std::vector<ConstellationRow>& rows);

}  // namespace gancomm::experiment
