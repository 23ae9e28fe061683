#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "gancomm/nn/tensor.hpp"

namespace gancomm::nn {

/// A learnable tensor with its gradient and Adam moments.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value);

  std::string name;
  Tensor value;
  Tensor grad;  // same shape as value
  Tensor m;     // Adam first moment
  Tensor v;     // Adam second moment
  std::int64_t step = 0;
  /// Frozen parameters still pass gradients to their inputs but never
  /// accumulate into `grad`.
  bool trainable = true;

  void zero_grad() { grad.fill(0.0); }
};

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// owning tape is alive.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Linear record of executed operations.
///
/// Nodes are appended in execution order, so every node follows all of its
/// producers and a reverse sweep visits them in a valid adjoint order. With
/// gradients disabled the tape only holds forward values (inference mode).
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var param(Parameter& p);

  /// Appends an operation result. `fn` runs during backward() when the result
  /// requires a gradient; it receives the result's node id, reads its gradient
  /// and accumulates into the inputs that need one.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
    return record(std::move(value), inputs.begin(), inputs.size(), std::move(fn));
  }
  Var record(Tensor value, const std::vector<Var>& inputs, BackwardFn fn) {
    return record(std::move(value), inputs.data(), inputs.size(), std::move(fn));
  }

  /// Reverse sweep from a scalar loss. Accumulates dloss/dvalue into every
  /// trainable Parameter reached.
  void backward(Var loss);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool grad_enabled() const { return grad_enabled_; }
  std::size_t size() const { return nodes_.size(); }

  /// Gradient held for a node; all zeros if nothing flowed into it.
  Tensor grad(Var v) const;

  /// Gradient buffer of node `id` (allocated as zeros on first access).
  Tensor& grad_buffer(std::size_t id);

 private:
  Var record(Tensor value, const Var* inputs, std::size_t count, BackwardFn fn);

  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
  bool grad_enabled_;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }

}  // namespace gancomm::nn
