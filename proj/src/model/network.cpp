#include "gancomm/model/network.hpp"

#include <cmath>
#include <cstring>

#include "gancomm/errors.hpp"

namespace gancomm::model {

LayerKind parse_layer_kind(std::string_view s) {
  if (s == "dense") return LayerKind::dense;
  if (s == "conv1d") return LayerKind::conv1d;
  if (s == "normalize") return LayerKind::normalize;
  throw ConfigError("unknown layer kind '" + std::string(s) + "'");
}

std::string_view to_string(LayerKind k) {
  switch (k) {
    case LayerKind::conv1d:
      return "conv1d";
    case LayerKind::normalize:
      return "normalize";
    default:
      return "dense";
  }
}

std::size_t NetworkSpec::parameter_layers() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.kind != LayerKind::normalize;
  return n;
}

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(-limit, limit);
  return t;
}

Network::Network(std::string prefix, NetworkSpec spec, Shape input, Rng& rng)
    : prefix_(std::move(prefix)), spec_(std::move(spec)), input_(std::move(input)) {
  if (spec_.layers.empty()) throw ConfigError(prefix_ + ": network has no layers");
  if (input_.empty() || shape_size(input_) == 0) throw ConfigError(prefix_ + ": empty input shape");
  params_.reserve(2 * spec_.layers.size());
  Shape cur = input_;
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const LayerSpec& l = spec_.layers[i];
    const std::string base = prefix_ + "." + std::to_string(i);
    switch (l.kind) {
      case LayerKind::dense: {
        if (l.width == 0) throw ConfigError(base + ": dense layer needs a width");
        const std::size_t in = shape_size(cur);
        params_.emplace_back(base + ".w", glorot_uniform({l.width, in}, in, l.width, rng));
        params_.emplace_back(base + ".b", Tensor({l.width}, 0.0));
        cur = {l.width};
        break;
      }
      case LayerKind::conv1d: {
        if (cur.size() != 2)
          throw ConfigError(base + ": conv1d needs a [length, channels] input, got " + shape_string(cur));
        if (l.width == 0 || l.kernel % 2 == 0) throw ConfigError(base + ": conv1d needs channels and an odd kernel");
        const std::size_t ci = cur[1];
        params_.emplace_back(base + ".w",
                             glorot_uniform({l.kernel, ci, l.width}, l.kernel * ci, l.kernel * l.width, rng));
        params_.emplace_back(base + ".b", Tensor({l.width}, 0.0));
        cur = {cur[0], l.width};
        break;
      }
      case LayerKind::normalize:
        if (l.width == 0 || shape_size(cur) % l.width != 0)
          throw ConfigError(base + ": normalize width must divide the layer size");
        break;
    }
  }
  output_ = cur;
}

Var Network::forward(Var x) const {
  Shape want{x.shape().front()};
  want.insert(want.end(), input_.begin(), input_.end());
  if (x.shape() != want)
    throw DimensionError(prefix_ + ": expected input " + shape_string(want) + ", got " + shape_string(x.shape()));
  Tape& tape = x.tape();
  const std::size_t batch = want.front();
  std::size_t p = 0;
  for (const LayerSpec& l : spec_.layers) {
    switch (l.kind) {
      case LayerKind::dense: {
        if (x.shape().size() != 2) x = nn::reshape(x, {batch, shape_size(x.shape()) / batch});
        auto& w = params_[p];
        auto& b = params_[p + 1];
        x = nn::dense(x, tape.param(w), tape.param(b), l.act);
        p += 2;
        break;
      }
      case LayerKind::conv1d: {
        auto& w = params_[p];
        auto& b = params_[p + 1];
        x = nn::conv1d(x, tape.param(w), tape.param(b), l.act);
        p += 2;
        break;
      }
      case LayerKind::normalize:
        x = nn::power_normalize(x, l.width);
        break;
    }
  }
  return x;
}

std::vector<Parameter*> Network::parameters() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<const Parameter*> Network::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

void Network::set_trainable(bool trainable) {
  for (auto& p : params_) p.trainable = trainable;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::uint64_t Network::hash() const {
  std::uint64_t h = fnv1a(prefix_.data(), prefix_.size());
  for (const auto& p : params_) {
    h = fnv1a(p.name.data(), p.name.size(), h);
    h = fnv1a(p.value.raw(), p.value.size() * sizeof(double), h);
  }
  return h;
}

}  // namespace gancomm::model
