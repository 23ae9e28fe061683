#include "gancomm/nn/tape.hpp"

#include "gancomm/errors.hpp"

namespace gancomm::nn {

Parameter::Parameter(std::string name_, Tensor value_)
    : name(std::move(name_)),
      value(std::move(value_)),
      grad(value.shape()),
      m(value.shape()),
      v(value.shape()) {}

Var Tape::constant(Tensor value) {
  value.check_finite("constant input");
  nodes_.push_back(Node{std::move(value), {}, false, nullptr, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(Parameter& p) {
  p.value.check_finite(p.name);
  const bool track = grad_enabled_ && p.trainable;
  nodes_.push_back(Node{p.value, {}, track, track ? &p : nullptr, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, const Var* inputs, std::size_t count, BackwardFn fn) {
  value.check_finite("operation output");
  bool needs = false;
  if (grad_enabled_)
    for (std::size_t i = 0; i < count; ++i) needs = needs || nodes_[inputs[i].id()].requires_grad;
  nodes_.push_back(Node{std::move(value), {}, needs, nullptr, needs ? std::move(fn) : BackwardFn{}});
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(n.value.shape(), 0.0);
  return n.grad;
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[v.id()];
  return n.grad.empty() ? Tensor(n.value.shape(), 0.0) : n.grad;
}

void Tape::backward(Var loss) {
  if (loss.value().size() != 1) throw ContractError("backward requires a scalar loss");
  if (!grad_enabled_) throw ContractError("backward on a tape recorded without gradients");
  if (!nodes_[loss.id()].requires_grad) return;
  grad_buffer(loss.id())[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) {
      n.backward(*this, i);
    } else if (n.param != nullptr) {
      auto dst = n.param->grad.data();
      auto src = n.grad.data();
      for (std::size_t k = 0; k < src.size(); ++k) dst[k] += src[k];
    }
  }
}

}  // namespace gancomm::nn
