#include "gancomm/experiment/trainer.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "gancomm/classical/qam.hpp"
#include "gancomm/errors.hpp"
#include "gancomm/nn/checkpoint.hpp"

namespace gancomm::experiment {

using channel::cd;
using channel::ChannelKind;
using channel::ComplexBlock;
using nlohmann::json;
using nn::Var;

namespace {

ComplexBlock block_symbols(const Tensor& x, std::size_t b, std::size_t len) {
  ComplexBlock out(len);
  for (std::size_t n = 0; n < len; ++n) out[n] = {x.at(b, n, 0), x.at(b, n, 1)};
  return out;
}

// Per-symbol gains for symbol-rate Rayleigh, otherwise the impulse response.
struct Response {
  bool per_symbol = false;
  ComplexBlock h;
};

Response response(const channel::ChannelRealization& r) {
  if (r.kind == ChannelKind::rayleigh && r.flat_gains.size() > 1) return {true, r.flat_gains};
  return {false, r.impulse_response()};
}

}  // namespace

ComplexBlock propagate(const ComplexBlock& x, const channel::ChannelRealization& r) {
  channel::ChannelRealization clean = r;
  clean.noise_var = 0.0;
  Rng unused(0);
  return channel::apply_channel(x, clean, unused);
}

Var propagate_var(Var x, const std::vector<channel::ChannelRealization>& realizations, const model::Layout& l) {
  const std::size_t B = x.shape().front();
  if (x.shape() != l.x_shape(B) || realizations.size() != B)
    throw DimensionError("propagate_var: symbols and realizations disagree");
  if (l.dims == 1) {
    for (const auto& r : realizations)
      if (r.kind != ChannelKind::awgn) throw ConfigError("real symbols only pass through the AWGN channel");
    return x;
  }
  std::vector<Response> resp;
  resp.reserve(B);
  for (const auto& r : realizations) resp.push_back(response(r));
  Tensor y(l.y_shape(B));
  for (std::size_t b = 0; b < B; ++b) {
    const ComplexBlock out = propagate(block_symbols(x.value(), b, l.k), realizations[b]);
    if (out.size() != l.y_len) throw DimensionError("propagate_var: channel output length differs from the layout");
    for (std::size_t n = 0; n < l.y_len; ++n) {
      y.at(b, n, 0) = out[n].real();
      y.at(b, n, 1) = out[n].imag();
    }
  }
  const auto xi = x.id();
  const std::size_t K = l.k, Ly = l.y_len;
  return x.tape().record(std::move(y), {x}, [xi, resp = std::move(resp), K, Ly](nn::Tape& t, std::size_t self) {
    const Tensor& gy = t.grad_buffer(self);
    Tensor& gx = t.grad_buffer(xi);
    // d/dx of Re<g, h x> is conj(h) g in complex notation.
    for (std::size_t b = 0; b < resp.size(); ++b) {
      const Response& r = resp[b];
      for (std::size_t m = 0; m < K; ++m) {
        cd acc{};
        if (r.per_symbol) {
          acc = std::conj(r.h[m]) * cd{gy.at(b, m, 0), gy.at(b, m, 1)};
        } else {
          for (std::size_t d = 0; d < r.h.size() && m + d < Ly; ++d)
            acc += std::conj(r.h[d]) * cd{gy.at(b, m + d, 0), gy.at(b, m + d, 1)};
        }
        gx.at(b, m, 0) += acc.real();
        gx.at(b, m, 1) += acc.imag();
      }
    }
  });
}

Batch channel_batch(const model::Layout& l, const channel::ChannelProfile& profile, const model::Network& tx,
                    Tensor bits, double snr_db, std::vector<Rng>& rngs) {
  const std::size_t B = bits.extent(0);
  if (rngs.size() != B && rngs.size() != 1) throw DimensionError("channel_batch: need one Rng per block or one shared");
  Batch out;
  {
    nn::Tape t(false);
    out.x = model::transmit(tx, t.constant(bits), l).value();
  }
  out.bits = std::move(bits);
  const double var = channel::snr_to_noise_var(snr_db, l.n, l.k);
  out.y = Tensor(l.y_shape(B));
  out.noise = Tensor(l.y_shape(B));
  if (l.pilot_len > 0) out.pilots = Tensor(l.pilot_shape(B));
  out.realizations.reserve(B);
  for (std::size_t b = 0; b < B; ++b) {
    Rng& rng = rngs.size() == 1 ? rngs[0] : rngs[b];
    auto r = channel::draw_realization(profile, l.k, var, rng);
    if (l.pilot_len > 0) {
      const ComplexBlock yp = channel::transmit_pilots(profile, r, rng);
      for (std::size_t p = 0; p < l.pilot_len; ++p) {
        out.pilots->at(b, p, 0) = yp[p].real();
        out.pilots->at(b, p, 1) = yp[p].imag();
      }
    }
    if (l.dims == 1) {
      const double sd = std::sqrt(var / 2.0);
      for (std::size_t n = 0; n < l.y_len; ++n) {
        out.noise.at(b, n, 0) = sd * rng.normal();
        out.y.at(b, n, 0) = out.x.at(b, n, 0) + out.noise.at(b, n, 0);
      }
    } else {
      const ComplexBlock clean = propagate(block_symbols(out.x, b, l.k), r);
      for (std::size_t n = 0; n < l.y_len; ++n) {
        const cd w = var > 0.0 ? rng.complex_normal(var) : cd{};
        out.noise.at(b, n, 0) = w.real();
        out.noise.at(b, n, 1) = w.imag();
        out.y.at(b, n, 0) = clean[n].real() + w.real();
        out.y.at(b, n, 1) = clean[n].imag() + w.imag();
      }
    }
    out.realizations.push_back(std::move(r));
  }
  return out;
}

Batch generate_batch(const model::Layout& l, const channel::ChannelProfile& profile, const model::Network& tx,
                     std::size_t batch, double snr_db, Rng& rng) {
  Tensor bits(l.bits_shape(batch));
  for (double& v : bits.data()) v = rng.bit();
  std::vector<Rng> shared;
  shared.push_back(rng);
  Batch b = channel_batch(l, profile, tx, std::move(bits), snr_db, shared);
  rng = shared[0];
  return b;
}

Trainer::Trainer(ExperimentConfig cfg) : cfg_(std::move(cfg)), layout_(cfg_.layout()) {
  if (!is_learned(cfg_.system)) throw ConfigError("only learned systems can be trained");
  Rng init = Rng::derive(cfg_.seed, {0x1717});
  tr_ = model::build_from_table(layout_, init, cfg_.train.width_scale);
  gan_ = model::build_gan(layout_, init, cfg_.train.width_scale);
  rng_ = Rng::derive(cfg_.seed, {0x7a7a});
  if (cfg_.train.surrogate == Surrogate::direct) warmup_done_ = true;
}

Batch Trainer::generate_batch(std::size_t batch) {
  return experiment::generate_batch(layout_, cfg_.channel, tr_.tx, batch, cfg_.train.snr_db, rng_);
}

Batch Trainer::generate_gan_batch() {
  if (!cfg_.train.gan_on_qam16) return generate_batch();
  if (layout_.dims != 2) throw ConfigError("16-QAM GAN inputs need complex symbols");
  const std::size_t B = cfg_.train.batch;
  const auto& pts = classical::constellation(16);
  Tensor x(layout_.x_shape(B));
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t k = 0; k < layout_.k; ++k) {
      const cd p = pts[rng_.next_u64() % 16];
      x.at(b, k, 0) = p.real();
      x.at(b, k, 1) = p.imag();
    }
  Batch out = experiment::generate_batch(layout_, cfg_.channel, tr_.tx, B, cfg_.train.snr_db, rng_);
  // Re-run the same channel draws on the 16-QAM symbols.
  out.x = x;
  for (std::size_t b = 0; b < B; ++b) {
    ComplexBlock xb(layout_.k);
    for (std::size_t k = 0; k < layout_.k; ++k) xb[k] = {x.at(b, k, 0), x.at(b, k, 1)};
    const ComplexBlock clean = propagate(xb, out.realizations[b]);
    for (std::size_t n = 0; n < layout_.y_len; ++n) {
      out.y.at(b, n, 0) = clean[n].real() + out.noise.at(b, n, 0);
      out.y.at(b, n, 1) = clean[n].imag() + out.noise.at(b, n, 1);
    }
  }
  return out;
}

namespace {

struct Guard {
  std::vector<const model::Network*> nets;
  std::vector<std::uint64_t> hashes;
  const char* what;
  Guard(std::initializer_list<const model::Network*> n, const char* w) : nets(n), what(w) {
    for (auto* net : nets) hashes.push_back(net->hash());
  }
  void check() const {
    for (std::size_t i = 0; i < nets.size(); ++i)
      if (nets[i]->hash() != hashes[i])
        throw ContractError(std::string(what) + " modified frozen network '" + nets[i]->prefix() + "'");
  }
};

void check_loss(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string(what) + " loss is not finite");
}

}  // namespace

double Trainer::receiver_step(const Batch& b) {
  const Guard guard({&tr_.tx, &gan_.gen, &gan_.disc}, "receiver step");
  double loss_value = 0.0;
  {
    nn::Tape tape;
    Var loss = nn::bce_loss(model::receive(tr_.rx, tape.constant(b.y), b.pilots, layout_), b.bits);
    loss_value = loss.value()[0];
    check_loss(loss_value, "receiver");
    tape.backward(loss);
  }
  nn::adam_step(tr_.rx.parameters(), {.lr = cfg_.train.lr_rx});
  guard.check();
  return loss_value;
}

double Trainer::transmitter_step(const Batch& b) {
  const bool direct = cfg_.train.surrogate == Surrogate::direct;
  const Guard guard = direct ? Guard({&gan_.gen, &gan_.disc}, "joint step")
                             : Guard({&tr_.rx, &gan_.gen, &gan_.disc}, "transmitter step");
  double loss_value = 0.0;
  if (!direct) {
    tr_.rx.set_trainable(false);
    gan_.gen.set_trainable(false);
  }
  try {
    nn::Tape tape;
    Var x = model::transmit(tr_.tx, tape.constant(b.bits), layout_);
    Var y = direct ? nn::add(propagate_var(x, b.realizations, layout_), tape.constant(b.noise))
                   : model::generator_forward(gan_, x, model::sample_noise(layout_, b.bits.extent(0), rng_), b.pilots,
                                              layout_);
    Var loss = nn::bce_loss(model::receive(tr_.rx, y, b.pilots, layout_), b.bits);
    loss_value = loss.value()[0];
    check_loss(loss_value, "transmitter");
    tape.backward(loss);
  } catch (...) {
    tr_.rx.set_trainable(true);
    gan_.gen.set_trainable(true);
    throw;
  }
  tr_.rx.set_trainable(true);
  gan_.gen.set_trainable(true);
  nn::adam_step(tr_.tx.parameters(), {.lr = cfg_.train.lr_tx});
  if (direct) nn::adam_step(tr_.rx.parameters(), {.lr = cfg_.train.lr_rx});
  guard.check();
  return loss_value;
}

model::GanLosses Trainer::gan_step(const Batch& b) {
  const Guard guard({&tr_.tx, &tr_.rx}, "GAN step");
  const model::GanBatch gb{b.x, b.y, b.pilots};
  const auto losses = model::train_gan_step(gan_, gb, layout_, {.lr = cfg_.train.lr_gan, .beta1 = cfg_.train.gan_beta1}, cfg_.train.k_d, rng_);
  check_loss(losses.d_loss, "discriminator");
  check_loss(losses.g_loss, "generator");
  guard.check();
  return losses;
}

void Trainer::log_row(LogRow row) {
  row.wall_ms =
      wall_offset_ms_ + std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  log_.push_back(std::move(row));
}

double Trainer::train_receiver_phase(std::size_t steps) {
  double total = 0.0, window = 0.0;
  for (std::size_t s = 0; s < steps; ++s) {
    const double l = receiver_step(generate_batch());
    total += l;
    window += l;
    if ((s + 1) % cfg_.train.log_every == 0 || s + 1 == steps) {
      const std::size_t n = (s % cfg_.train.log_every) + 1;
      log_row({outer_done_, "receiver", s + 1, window / static_cast<double>(n)});
      window = 0.0;
    }
  }
  return steps ? total / static_cast<double>(steps) : 0.0;
}

double Trainer::train_transmitter_phase(std::size_t steps) {
  const char* phase = cfg_.train.surrogate == Surrogate::direct ? "joint" : "transmitter";
  double total = 0.0, window = 0.0;
  for (std::size_t s = 0; s < steps; ++s) {
    const double l = transmitter_step(generate_batch());
    total += l;
    window += l;
    if ((s + 1) % cfg_.train.log_every == 0 || s + 1 == steps) {
      const std::size_t n = (s % cfg_.train.log_every) + 1;
      log_row({outer_done_, phase, s + 1, window / static_cast<double>(n)});
      window = 0.0;
    }
  }
  return steps ? total / static_cast<double>(steps) : 0.0;
}

model::GanLosses Trainer::train_gan_phase(std::size_t steps, const char* phase) {
  model::GanLosses last, window;
  for (std::size_t s = 0; s < steps; ++s) {
    last = gan_step(generate_gan_batch());
    window.d_loss += last.d_loss;
    window.g_loss += last.g_loss;
    if ((s + 1) % cfg_.train.log_every == 0 || s + 1 == steps) {
      const double n = static_cast<double>((s % cfg_.train.log_every) + 1);
      log_row({outer_done_, phase, s + 1, 0.0, window.d_loss / n, window.g_loss / n});
      window = {};
    }
  }
  return last;
}

bool Trainer::plateaued() const {
  const std::size_t w = cfg_.train.plateau_window;
  if (w == 0 || outer_losses_.size() <= w) return false;
  const double then = outer_losses_[outer_losses_.size() - 1 - w];
  const double now = outer_losses_.back();
  return then <= 0.0 || (then - now) / then < cfg_.train.plateau_tol;
}

bool Trainer::run_outer_iteration() {
  if (finished_) return false;
  const bool gan = cfg_.train.surrogate == Surrogate::gan;
  if (!warmup_done_) {
    if (gan) train_gan_phase(cfg_.train.warmup_gan, "warmup");
    warmup_done_ = true;
  }
  const double r_loss = train_receiver_phase(cfg_.train.steps_r);
  train_transmitter_phase(cfg_.train.steps_t);
  if (gan) train_gan_phase(cfg_.train.steps_gan);
  outer_losses_.push_back(r_loss);
  ++outer_done_;
  if (outer_done_ >= cfg_.train.outer || plateaued()) finished_ = true;
  return !finished_;
}

void Trainer::run(const std::optional<std::filesystem::path>& dir, const std::function<void(const Trainer&)>& on_outer) {
  try {
    while (!finished_) {
      run_outer_iteration();
      if (on_outer) on_outer(*this);
      if (dir && (finished_ || (cfg_.train.checkpoint_every > 0 && outer_done_ % cfg_.train.checkpoint_every == 0)))
        save(*dir);
    }
  } catch (const NumericalError&) {
    if (dir) save(*dir / "diagnostic");
    throw;
  }
}

std::vector<nn::Parameter*> Trainer::all_parameters() {
  std::vector<nn::Parameter*> out;
  for (model::Network* n : {&tr_.tx, &tr_.rx, &gan_.gen, &gan_.disc}) {
    auto p = n->parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

void Trainer::write_log_csv(std::ostream& os) const {
  os << "outer_iter,phase,step,loss,d_loss,g_loss,wall_ms\n";
  os.precision(10);
  for (const auto& r : log_) {
    os << r.outer << ',' << r.phase << ',' << r.step << ',';
    const bool gan_row = r.phase == "gan" || r.phase == "warmup";
    if (!gan_row) os << r.loss;
    os << ',';
    if (gan_row) os << r.d_loss << ',' << r.g_loss;
    else os << ',';
    os << ',' << static_cast<long long>(r.wall_ms) << '\n';
  }
}

void Trainer::save(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nn::save_tensors(dir / "model.gckp", nn::export_parameters(all_parameters()));
  json rows = json::array();
  for (const auto& r : log_) rows.push_back({r.outer, r.phase, r.step, r.loss, r.d_loss, r.g_loss, r.wall_ms});
  const json state = {{"config_hash", cfg_.train_hash()},
                      {"outer_done", outer_done_},
                      {"warmup_done", warmup_done_},
                      {"finished", finished_},
                      {"rng", rng_.serialize()},
                      {"outer_losses", outer_losses_},
                      {"log", rows}};
  std::ofstream(dir / "state.json") << state.dump(1) << '\n';
  std::ofstream log_out(dir / "train_log.csv");
  write_log_csv(log_out);
}

Trainer Trainer::load(const std::filesystem::path& dir, ExperimentConfig cfg) {
  std::ifstream in(dir / "state.json");
  if (!in) throw ConfigError("no saved run in " + dir.string());
  json state;
  try {
    in >> state;
  } catch (const json::exception& e) {
    throw ConfigError("corrupt state.json: " + std::string(e.what()));
  }
  Trainer t(std::move(cfg));
  if (state.at("config_hash").get<std::string>() != t.cfg_.train_hash())
    throw ConfigError("saved run in " + dir.string() + " was trained with a different config");
  nn::import_parameters(nn::load_tensors(dir / "model.gckp"), t.all_parameters());
  t.outer_done_ = state.at("outer_done").get<std::size_t>();
  t.warmup_done_ = state.at("warmup_done").get<bool>();
  t.finished_ = state.at("finished").get<bool>();
  t.rng_ = Rng::deserialize(state.at("rng").get<std::string>());
  t.outer_losses_ = state.at("outer_losses").get<std::vector<double>>();
  for (const auto& r : state.at("log")) {
    t.log_.push_back({r[0].get<std::size_t>(), r[1].get<std::string>(), r[2].get<std::size_t>(), r[3].get<double>(),
                      r[4].get<double>(), r[5].get<double>(), r[6].get<double>()});
  }
  if (!t.log_.empty()) t.wall_offset_ms_ = t.log_.back().wall_ms;
  return t;
}

}  // namespace gancomm::experiment
