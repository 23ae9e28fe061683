#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gancomm/nn/ops.hpp"
#include "gancomm/rng.hpp"

namespace gancomm::model {

using nn::Activation;
using nn::Parameter;
using nn::Shape;
using nn::shape_size;
using nn::shape_string;
using nn::Tape;
using nn::Tensor;
using nn::Var;

enum class LayerKind { dense, conv1d, normalize };

LayerKind parse_layer_kind(std::string_view s);
std::string_view to_string(LayerKind k);

struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  /// dense: output units; conv1d: output channels; normalize: values per symbol.
  std::size_t width = 0;
  std::size_t kernel = 0;  // conv1d only, odd
  Activation act = Activation::none;

  bool operator==(const LayerSpec&) const = default;
};

struct NetworkSpec {
  std::vector<LayerSpec> layers;

  std::size_t parameter_layers() const;
  bool operator==(const NetworkSpec&) const = default;
};

/// A feed-forward stack built from a NetworkSpec.
///
/// Dense layers flatten everything after the batch axis; conv1d layers need a
/// [B, length, channels] input. Weights are Glorot-uniform, biases zero.
/// Parameters are named "<prefix>.<layer>.w" / ".b".
class Network {
 public:
  Network() = default;
  /// `input` is the per-item input shape, without the batch axis.
  Network(std::string prefix, NetworkSpec spec, Shape input, Rng& rng);

  Var forward(Var x) const;

  const NetworkSpec& spec() const { return spec_; }
  const std::string& prefix() const { return prefix_; }
  const Shape& input_shape() const { return input_; }
  /// Per-item output shape.
  const Shape& output_shape() const { return output_; }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  void set_trainable(bool trainable);
  std::size_t parameter_count() const;
  /// FNV-1a over parameter names and value bits.
  std::uint64_t hash() const;

 private:
  std::string prefix_;
  NetworkSpec spec_;
  Shape input_, output_;
  // Two entries (weights, bias) per dense/conv1d layer, in layer order.
  // Mutable because a forward pass on a gradient tape accumulates into them.
  mutable std::vector<Parameter> params_;
};

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng);

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace gancomm::model
