#include "gancomm/model/gan.hpp"

#include "gancomm/errors.hpp"

namespace gancomm::model {

namespace {

Var flatten(Var v) {
  const std::size_t b = v.shape().front();
  return nn::reshape(v, {b, shape_size(v.shape()) / b});
}

void check_pilots(const std::optional<Tensor>& pilots, const Layout& l, std::size_t b) {
  if (l.pilot_len > 0 && (!pilots || pilots->shape() != l.pilot_shape(b)))
    throw ConfigError("expected received pilots " + shape_string(l.pilot_shape(b)));
}

}  // namespace

Tensor sample_noise(const Layout& layout, std::size_t batch, Rng& rng) {
  Tensor z(layout.noise_shape(batch));
  for (double& v : z.data()) v = rng.normal();
  return z;
}

Var generator_forward(const ChannelGan& gan, Var x, const Tensor& z, const std::optional<Tensor>& pilots,
                      const Layout& l) {
  const std::size_t b = x.shape().front();
  if (x.shape() != l.x_shape(b)) throw ConfigError("generator: unexpected x shape " + shape_string(x.shape()));
  if (z.shape() != l.noise_shape(b)) throw ConfigError("generator: unexpected z shape " + shape_string(z.shape()));
  check_pilots(pilots, l, b);
  Tape& tape = x.tape();
  std::vector<Var> parts;
  if (l.arch == Arch::fcn) {
    parts = {flatten(x), tape.constant(z)};
    if (l.pilot_len > 0) parts.push_back(tape.constant(pilots->reshaped({b, 2 * l.pilot_len})));
    return nn::reshape(gan.gen.forward(nn::concat(parts)), l.y_shape(b));
  }
  parts = {l.y_len > l.k ? nn::pad_axis1(x, 0, l.y_len - l.k) : x, tape.constant(z)};
  if (l.pilot_len > 0) parts.push_back(tape.constant(tile_pilots(*pilots, l.y_len)));
  return gan.gen.forward(nn::concat(parts));
}

Var discriminator_forward(const ChannelGan& gan, Var y, Var x, const std::optional<Tensor>& pilots, const Layout& l) {
  const std::size_t b = y.shape().front();
  if (y.shape() != l.y_shape(b) || x.shape() != l.x_shape(b))
    throw ConfigError("discriminator: unexpected input shapes");
  check_pilots(pilots, l, b);
  Tape& tape = y.tape();
  std::vector<Var> parts;
  if (l.arch == Arch::fcn) {
    parts = {flatten(y), flatten(x)};
    if (l.pilot_len > 0) parts.push_back(tape.constant(pilots->reshaped({b, 2 * l.pilot_len})));
  } else {
    parts = {y, l.y_len > l.k ? nn::pad_axis1(x, 0, l.y_len - l.k) : x};
    if (l.pilot_len > 0) parts.push_back(tape.constant(tile_pilots(*pilots, l.y_len)));
  }
  return gan.disc.forward(nn::concat(parts));
}

Var discriminator_loss(Var real_scores, Var fake_scores) {
  return nn::add(nn::bce_loss(real_scores, Tensor(real_scores.shape(), 1.0)),
                 nn::bce_loss(fake_scores, Tensor(fake_scores.shape(), 0.0)));
}

Var generator_loss(Var fake_scores) { return nn::bce_loss(fake_scores, Tensor(fake_scores.shape(), 1.0)); }

Tensor generate(const ChannelGan& gan, const Tensor& x, const Tensor& z, const std::optional<Tensor>& pilots,
                const Layout& l) {
  Tape t(false);
  return generator_forward(gan, t.constant(x), z, pilots, l).value();
}

double discriminator_step(ChannelGan& gan, const GanBatch& batch, const Tensor& fake, const Layout& l,
                          const nn::AdamConfig& adam) {
  double loss_value = 0.0;
  {
    Tape tape;
    Var x = tape.constant(batch.x);
    Var real_s = discriminator_forward(gan, tape.constant(batch.y_real), x, batch.pilots, l);
    Var fake_s = discriminator_forward(gan, tape.constant(fake), x, batch.pilots, l);
    Var loss = discriminator_loss(real_s, fake_s);
    loss_value = loss.value()[0];
    tape.backward(loss);
  }
  nn::adam_step(gan.disc.parameters(), adam);
  return loss_value;
}

double generator_step(ChannelGan& gan, const GanBatch& batch, const Tensor& z, const Layout& l,
                      const nn::AdamConfig& adam) {
  double loss_value = 0.0;
  gan.disc.set_trainable(false);
  try {
    Tape tape;
    Var x = tape.constant(batch.x);
    Var fake = generator_forward(gan, x, z, batch.pilots, l);
    Var loss = generator_loss(discriminator_forward(gan, fake, x, batch.pilots, l));
    loss_value = loss.value()[0];
    tape.backward(loss);
  } catch (...) {
    gan.disc.set_trainable(true);
    throw;
  }
  gan.disc.set_trainable(true);
  nn::adam_step(gan.gen.parameters(), adam);
  return loss_value;
}

GanLosses train_gan_step(ChannelGan& gan, const GanBatch& batch, const Layout& l, const nn::AdamConfig& adam, int k_d,
                         Rng& rng) {
  if (k_d < 1) throw ConfigError("k_d must be at least 1");
  const std::size_t b = batch.x.extent(0);
  GanLosses out;
  for (int i = 0; i < k_d; ++i)
    out.d_loss = discriminator_step(gan, batch, generate(gan, batch.x, sample_noise(l, b, rng), batch.pilots, l), l, adam);
  out.g_loss = generator_step(gan, batch, sample_noise(l, b, rng), l, adam);
  return out;
}

}  // namespace gancomm::model
