#pragma once

#include "gancomm/model/transceiver.hpp"
#include "gancomm/nn/optim.hpp"

namespace gancomm::model {

/// Standard normal prior with Layout::noise_shape.
Tensor sample_noise(const Layout& layout, std::size_t batch, Rng& rng);

/// Surrogate channel output G(z | x, y_p), shaped like the real y.
Var generator_forward(const ChannelGan& gan, Var x, const Tensor& z, const std::optional<Tensor>& pilots,
                      const Layout& layout);

/// D(y | x, y_p): [B, 1] scores in (0, 1).
Var discriminator_forward(const ChannelGan& gan, Var y, Var x, const std::optional<Tensor>& pilots,
                          const Layout& layout);

/// -mean log D(real) - mean log(1 - D(fake)).
Var discriminator_loss(Var real_scores, Var fake_scores);
/// Non-saturating form -mean log D(fake).
Var generator_loss(Var fake_scores);

struct GanBatch {
  Tensor x;       // transmitted symbols [B, K, dims]
  Tensor y_real;  // real channel output [B, y_len, dims]
  std::optional<Tensor> pilots;
};

struct GanLosses {
  double d_loss = 0.0;
  double g_loss = 0.0;
};

/// One Adam step on D against a given batch of generated outputs; G is not
/// touched. Returns the loss before the step.
double discriminator_step(ChannelGan& gan, const GanBatch& batch, const Tensor& fake, const Layout& layout,
                          const nn::AdamConfig& adam);

/// One Adam step on G through a frozen D; D is not touched. Returns the loss
/// before the step.
double generator_step(ChannelGan& gan, const GanBatch& batch, const Tensor& z, const Layout& layout,
                      const nn::AdamConfig& adam);

/// Generated outputs for a batch, off the gradient tape.
Tensor generate(const ChannelGan& gan, const Tensor& x, const Tensor& z, const std::optional<Tensor>& pilots,
                const Layout& layout);

/// k_d discriminator Adam steps (fresh z each) then one generator step.
/// Each step only updates the network it trains.
GanLosses train_gan_step(ChannelGan& gan, const GanBatch& batch, const Layout& layout, const nn::AdamConfig& adam,
                         int k_d, Rng& rng);

}  // namespace gancomm::model
