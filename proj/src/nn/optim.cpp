#include "gancomm/nn/optim.hpp"

#include <cmath>

#include "gancomm/errors.hpp"

namespace gancomm::nn {

void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg) {
  if (!(cfg.lr > 0.0)) throw ConfigError("Adam learning rate must be positive");
  for (Parameter* p : params) {
    if (!p->trainable) continue;
    ++p->step;
    const double t = static_cast<double>(p->step);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    auto w = p->value.data();
    auto g = p->grad.data();
    auto m = p->m.data();
    auto v = p->v.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
    p->zero_grad();
  }
}

void zero_grads(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace gancomm::nn
