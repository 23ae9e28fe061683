#pragma once

#include <string_view>
#include <vector>

#include "gancomm/nn/tape.hpp"

namespace gancomm::nn {

enum class Activation { none, relu, sigmoid };

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation a);

/// Log clamp used by every cross-entropy style loss.
inline constexpr double kLogClamp = 1e-12;

// All network-facing operations treat axis 0 as the batch axis.

/// y[b,n] = act(sum_k W[n,k] x[b,k] + bias[n]); x is [B, in], W is [out, in].
Var dense(Var x, Var weights, Var bias, Activation act = Activation::none);

/// Same-padded 1-D convolution over [B, K, C_in] with kernels [L, C_in, C_out]:
///   y[b,n,c] = act(sum_{k=1..L} sum_j w[k-1,j,c] x[b, n-k+ceil(L/2), j] + bias[c])
/// Reads outside [0, K) are zero, so the output keeps length K. L must be odd.
Var conv1d(Var x, Var kernels, Var bias, Activation act = Activation::none);

Var relu(Var x);
Var sigmoid(Var x);
Var activate(Var x, Activation act);

/// Scales each batch item so its mean power per symbol is one:
///   y = x * sqrt(S / sum(x^2)),  S = items_per_batch_entry / values_per_symbol.
/// values_per_symbol is 2 for I/Q symbols, 1 for real symbols. An all-zero
/// item passes through as zeros.
Var power_normalize(Var x, std::size_t values_per_symbol);

/// Concatenation along the last axis; leading extents must agree.
Var concat(const std::vector<Var>& parts);

Var reshape(Var x, Shape shape);

/// x[:, begin:begin+count, ...] along axis 1.
Var slice_axis1(Var x, std::size_t begin, std::size_t count);

/// Zero padding along axis 1.
Var pad_axis1(Var x, std::size_t before, std::size_t after);

Var add(Var a, Var b);
Var scale(Var x, double factor);

/// Scalar sum of all elements.
Var sum(Var x);

/// Scalar sum_i w_i x_i with a constant weight tensor.
Var weighted_sum(Var x, const Tensor& weights);

/// Binary cross-entropy, summed over each batch item and averaged over the
/// batch:  (1/B) sum_b sum_n -(s log p + (1 - s) log(1 - p)),
/// with p clamped to [kLogClamp, 1 - kLogClamp]. Targets must be 0 or 1.
Var bce_loss(Var pred, const Tensor& target);

}  // namespace gancomm::nn
