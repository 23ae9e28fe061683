#pragma once

#include <functional>

#include "gancomm/nn/tape.hpp"

namespace gancomm::nn {

/// Central-difference estimate of d f / d p.value, one coordinate at a time:
///   (f(w + h e_i) - f(w - h e_i)) / 2h.
/// `f` must evaluate the scalar from the parameter's current value.
Tensor finite_difference_grad(const std::function<double()>& f, Parameter& p, double h = 1e-4);

/// Largest |a - b| / max(|a|, |b|) over coordinates where max(|a|, |b|) > floor.
double max_relative_error(const Tensor& a, const Tensor& b, double floor = 1e-6);

}  // namespace gancomm::nn
