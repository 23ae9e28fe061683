#include "gancomm/experiment/diagnostics.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>

#include "gancomm/classical/qam.hpp"
#include "gancomm/errors.hpp"
#include "gancomm/nn/gradcheck.hpp"

namespace gancomm::experiment {

using channel::cd;
using nn::Parameter;
using nn::Tape;
using nn::Var;

namespace {

Tensor random_tensor(nn::Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.normal();
  return t;
}

double check(const std::function<Var(Tape&)>& build, const std::vector<Parameter*>& params) {
  for (auto* p : params) p->zero_grad();
  {
    Tape tape;
    tape.backward(build(tape));
  }
  double worst = 0.0;
  for (auto* p : params) {
    auto f = [&] {
      Tape t(false);
      return build(t).value()[0];
    };
    worst = std::max(worst, nn::max_relative_error(p->grad, nn::finite_difference_grad(f, *p, 1e-4), 1e-6));
  }
  return worst;
}

}  // namespace

std::vector<GradcheckResult> gradcheck_suite(std::size_t seeds) {
  std::vector<GradcheckResult> out = {{"dense"},   {"conv1d_k3"}, {"conv1d_k5"},   {"power_normalize"},
                                      {"sigmoid"}, {"relu"},      {"bce_loss"},    {"discriminator_loss"}};
  auto record = [&](std::size_t i, double e) {
    out[i].max_rel_error = std::max(out[i].max_rel_error, e);
    ++out[i].trials;
  };
  for (std::size_t seed = 0; seed < seeds; ++seed) {
    Rng rng = Rng::derive(seed, {0x96AD});
    const std::size_t B = 1 + rng.next_u64() % 3;
    {
      const std::size_t in = 1 + rng.next_u64() % 6, o = 1 + rng.next_u64() % 6;
      Parameter x("x", random_tensor({B, in}, rng)), w("w", random_tensor({o, in}, rng)), b("b", random_tensor({o}, rng));
      const Tensor r = random_tensor({B, o}, rng);
      record(0, check([&](Tape& t) { return nn::weighted_sum(nn::dense(t.param(x), t.param(w), t.param(b)), r); },
                      {&x, &w, &b}));
    }
    for (std::size_t L : {3u, 5u}) {
      const std::size_t K = 1 + rng.next_u64() % 9, ci = 1 + rng.next_u64() % 4, co = 1 + rng.next_u64() % 4;
      Parameter x("x", random_tensor({B, K, ci}, rng)), w("w", random_tensor({L, ci, co}, rng)),
          b("b", random_tensor({co}, rng));
      const Tensor r = random_tensor({B, K, co}, rng);
      record(L == 3 ? 1 : 2,
             check([&](Tape& t) { return nn::weighted_sum(nn::conv1d(t.param(x), t.param(w), t.param(b)), r); },
                   {&x, &w, &b}));
    }
    {
      const std::size_t K = 1 + rng.next_u64() % 10, d = 1 + rng.next_u64() % 2;
      Parameter x("x", random_tensor({B, K, d}, rng));
      const Tensor r = random_tensor({B, K, d}, rng);
      record(3, check([&](Tape& t) { return nn::weighted_sum(nn::power_normalize(t.param(x), d), r); }, {&x}));
    }
    {
      Tensor init = random_tensor({B, 7}, rng);
      for (double& v : init.data()) v += v >= 0 ? 0.05 : -0.05;  // away from the relu kink
      Parameter x("x", init);
      const Tensor r = random_tensor({B, 7}, rng);
      record(4, check([&](Tape& t) { return nn::weighted_sum(nn::sigmoid(t.param(x)), r); }, {&x}));
      record(5, check([&](Tape& t) { return nn::weighted_sum(nn::relu(t.param(x)), r); }, {&x}));
    }
    {
      const std::size_t n = 1 + rng.next_u64() % 8;
      Tensor p({B, n}), s({B, n});
      for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = rng.uniform(0.05, 0.95);
        s[i] = rng.bit();
      }
      Parameter x("x", p);
      record(6, check([&](Tape& t) { return nn::bce_loss(t.param(x), s); }, {&x}));
    }
    {
      Tensor a({B, 1}), c({B, 1});
      for (std::size_t i = 0; i < B; ++i) a[i] = rng.uniform(0.05, 0.95), c[i] = rng.uniform(0.05, 0.95);
      Parameter real("real", a), fake("fake", c);
      record(7, check([&](Tape& t) { return model::discriminator_loss(t.param(real), t.param(fake)); }, {&real, &fake}));
    }
  }
  return out;
}

std::vector<cd> default_conditions(const channel::ChannelProfile& profile) {
  if (!profile.uses_pilots()) return {cd{}};
  std::vector<cd> out;
  for (double r : {0.5, 1.0, 1.5})
    for (int m = 0; m < 8; ++m) out.push_back(std::polar(r, std::numbers::pi * m / 4.0));
  return out;
}

std::vector<ConstellationRow> constellation_dump(const Trainer& trainer, const std::vector<cd>& conditions,
                                                 std::size_t samples, Rng& rng) {
  const model::Layout& l = trainer.layout();
  const auto& profile = trainer.config().channel;
  if (l.dims != 2) throw ConfigError("constellation dumps need complex symbols");
  if (profile.kind == channel::ChannelKind::multipath) throw ConfigError("constellation dumps need a flat channel");
  const double var = channel::snr_to_noise_var(trainer.config().train.snr_db, l.n, l.k);
  const auto& pts = classical::constellation(16);
  std::vector<ConstellationRow> rows;
  for (std::size_t c = 0; c < conditions.size(); ++c) {
    const cd h = l.pilot_len > 0 ? conditions[c] : cd{1.0, 0.0};
    const std::size_t B = pts.size() * samples;
    Tensor x(l.x_shape(B));
    std::optional<Tensor> pilots;
    if (l.pilot_len > 0) {
      pilots = Tensor(l.pilot_shape(B));
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t p = 0; p < l.pilot_len; ++p) {
          pilots->at(b, p, 0) = conditions[c].real();
          pilots->at(b, p, 1) = conditions[c].imag();
        }
    }
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t k = 0; k < l.k; ++k) {
        x.at(b, k, 0) = pts[b / samples].real();
        x.at(b, k, 1) = pts[b / samples].imag();
      }
    const Tensor fake = model::generate(trainer.gan(), x, model::sample_noise(l, B, rng), pilots, l);
    const cd pilot = l.pilot_len > 0 ? conditions[c] : cd{};
    for (std::size_t b = 0; b < B; ++b) {
      const cd xv = pts[b / samples];
      rows.push_back({c, false, xv, pilot, h * xv + rng.complex_normal(var)});
    }
    for (std::size_t b = 0; b < B; ++b)
      rows.push_back({c, true, pts[b / samples], pilot, {fake.at(b, 0, 0), fake.at(b, 0, 1)}});
  }
  return rows;
}

void write_constellation_csv(std::ostream& os, const std::vector<ConstellationRow>& rows) {
  os << "condition_id,source,x_re,x_im,pilot_re,pilot_im,re,im\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%s,%.6f,%.6f,%.6f,%.6f,%.9e,%.9e\n", r.condition, r.gan ? "gan" : "real",
                  r.x.real(), r.x.imag(), r.pilot.real(), r.pilot.imag(), r.y.real(), r.y.imag());
    os << buf;
  }
}

}  // namespace gancomm::experiment
