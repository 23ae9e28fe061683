#include "gancomm/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "gancomm/errors.hpp"

namespace gancomm::nn {

Tensor finite_difference_grad(const std::function<double()>& f, Parameter& p, double h) {
  Tensor g(p.value.shape(), 0.0);
  for (std::size_t i = 0; i < p.value.size(); ++i) {
    const double w = p.value[i];
    p.value[i] = w + h;
    const double up = f();
    p.value[i] = w - h;
    const double down = f();
    p.value[i] = w;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double max_relative_error(const Tensor& a, const Tensor& b, double floor) {
  if (a.size() != b.size()) throw DimensionError("max_relative_error: size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max(std::abs(a[i]), std::abs(b[i]));
    if (scale <= floor) continue;
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

}  // namespace gancomm::nn
