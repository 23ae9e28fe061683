#include "gancomm/model/transceiver.hpp"

#include <algorithm>
#include <cmath>

#include "gancomm/errors.hpp"

namespace gancomm::model {

namespace {

using nn::Activation;

LayerSpec dense(std::size_t w, Activation act) { return {LayerKind::dense, w, 0, act}; }
LayerSpec conv(std::size_t kernel, std::size_t ch, Activation act) { return {LayerKind::conv1d, ch, kernel, act}; }

std::size_t scaled(std::size_t w, double s) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(w) * s)));
}

std::vector<LayerSpec> hidden_dense(std::initializer_list<std::size_t> widths, double s) {
  std::vector<LayerSpec> out;
  for (auto w : widths) out.push_back(dense(scaled(w, s), Activation::relu));
  return out;
}

Var flatten(Var v) {
  const std::size_t b = v.shape().front();
  return nn::reshape(v, {b, shape_size(v.shape()) / b});
}

}  // namespace

Arch parse_arch(std::string_view s) {
  if (s == "fcn") return Arch::fcn;
  if (s == "cnn") return Arch::cnn;
  throw ConfigError("unknown architecture '" + std::string(s) + "'");
}

std::string_view to_string(Arch a) { return a == Arch::fcn ? "fcn" : "cnn"; }

Layout Layout::make(Arch arch, std::size_t n, std::size_t k, bool real_symbols, const channel::ChannelProfile& profile) {
  if (n == 0 || k == 0) throw ConfigError("block sizes must be positive");
  if (real_symbols && profile.kind != channel::ChannelKind::awgn)
    throw ConfigError("real-valued symbols are only supported on the AWGN channel");
  if (arch == Arch::cnn && n != k) throw ConfigError("the convolutional system needs N == K");
  Layout l;
  l.arch = arch;
  l.n = n;
  l.k = k;
  l.dims = real_symbols ? 1 : 2;
  l.y_len = profile.output_length(k);
  l.pilot_len = profile.uses_pilots() ? profile.pilot_len : 0;
  return l;
}

Shape Layout::noise_shape(std::size_t batch) const {
  if (arch == Arch::fcn) return {batch, noise_dim()};
  return {batch, y_len, dims};
}

NetworkSpec transmitter_spec(const Layout& l, double s) {
  NetworkSpec spec;
  if (l.arch == Arch::fcn) {
    spec.layers = hidden_dense({32, 32}, s);
    spec.layers.push_back(dense(l.k * l.dims, Activation::none));
  } else {
    spec.layers = {conv(5, scaled(256, s), Activation::relu), conv(3, scaled(128, s), Activation::relu),
                   conv(3, scaled(64, s), Activation::relu), conv(3, l.dims, Activation::none)};
  }
  spec.layers.push_back({LayerKind::normalize, l.dims, 0, Activation::none});
  return spec;
}

NetworkSpec receiver_spec(const Layout& l, double s) {
  NetworkSpec spec;
  if (l.arch == Arch::fcn) {
    spec.layers = hidden_dense({32, 32}, s);
    spec.layers.push_back(dense(l.n, Activation::sigmoid));
  } else {
    for (std::size_t w : {256, 128, 128, 128, 64, 64, 64}) spec.layers.push_back(conv(5, scaled(w, s), Activation::relu));
    spec.layers.push_back(conv(3, 1, Activation::sigmoid));
  }
  return spec;
}

NetworkSpec generator_spec(const Layout& l, double s) {
  NetworkSpec spec;
  if (l.arch == Arch::fcn) {
    spec.layers = hidden_dense({128, 128, 128}, s);
    spec.layers.push_back(dense(l.y_len * l.dims, Activation::none));
  } else {
    spec.layers = {conv(5, scaled(256, s), Activation::relu), conv(3, scaled(128, s), Activation::relu),
                   conv(3, scaled(64, s), Activation::relu), conv(3, l.dims, Activation::none)};
  }
  return spec;
}

NetworkSpec discriminator_spec(const Layout& l, double s) {
  NetworkSpec spec;
  if (l.arch == Arch::fcn) {
    spec.layers = hidden_dense({32, 32, 32}, s);
  } else {
    spec.layers = {conv(5, scaled(256, s), Activation::relu), conv(3, scaled(128, s), Activation::relu),
                   conv(3, scaled(64, s), Activation::relu), conv(3, scaled(16, s), Activation::relu),
                   dense(scaled(100, s), Activation::relu)};
  }
  spec.layers.push_back(dense(1, Activation::sigmoid));
  return spec;
}

Shape transmitter_input(const Layout& l) {
  if (l.arch == Arch::fcn) return {l.n};
  return {l.n, 1};
}

Shape receiver_input(const Layout& l) {
  if (l.arch == Arch::fcn) return {l.y_len * l.dims + 2 * l.pilot_len};
  return {l.y_len, l.dims + 2 * l.pilot_len};
}

Shape generator_input(const Layout& l) {
  if (l.arch == Arch::fcn) return {l.k * l.dims + 2 * l.pilot_len + l.noise_dim()};
  return {l.y_len, 2 * l.dims + 2 * l.pilot_len};
}

Shape discriminator_input(const Layout& l) {
  if (l.arch == Arch::fcn) return {l.y_len * l.dims + l.k * l.dims + 2 * l.pilot_len};
  return {l.y_len, 2 * l.dims + 2 * l.pilot_len};
}

Transceiver build_from_table(const Layout& l, Rng& rng, double s) {
  Transceiver t;
  t.tx = Network("tx", transmitter_spec(l, s), transmitter_input(l), rng);
  t.rx = Network("rx", receiver_spec(l, s), receiver_input(l), rng);
  return t;
}

ChannelGan build_gan(const Layout& l, Rng& rng, double s) {
  ChannelGan g;
  g.gen = Network("gen", generator_spec(l, s), generator_input(l), rng);
  g.disc = Network("disc", discriminator_spec(l, s), discriminator_input(l), rng);
  return g;
}

Var transmit(const Network& tx, Var bits, const Layout& l) {
  const std::size_t b = bits.shape().front();
  if (bits.shape() != l.bits_shape(b))
    throw ConfigError("transmit: expected bits " + shape_string(l.bits_shape(b)) + ", got " +
                      shape_string(bits.shape()));
  Shape in{b};
  const Shape per = transmitter_input(l);
  in.insert(in.end(), per.begin(), per.end());
  return nn::reshape(tx.forward(nn::reshape(bits, in)), l.x_shape(b));
}

Tensor tile_pilots(const Tensor& pilots, std::size_t len) {
  const std::size_t b = pilots.extent(0), w = pilots.size() / b;
  Tensor out({b, len, w});
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t n = 0; n < len; ++n)
      std::copy_n(pilots.raw() + i * w, w, out.raw() + (i * len + n) * w);
  return out;
}

Var receive(const Network& rx, Var y, const std::optional<Tensor>& pilots, const Layout& l) {
  const std::size_t b = y.shape().front();
  if (y.shape() != l.y_shape(b))
    throw FramingError("receive: expected y " + shape_string(l.y_shape(b)) + ", got " + shape_string(y.shape()));
  const bool with_pilots = l.pilot_len > 0;
  if (with_pilots && (!pilots || pilots->shape() != l.pilot_shape(b)))
    throw FramingError("receive: expected pilots " + shape_string(l.pilot_shape(b)));
  Tape& tape = y.tape();
  if (l.arch == Arch::fcn) {
    Var in = flatten(y);
    if (with_pilots) in = nn::concat({in, tape.constant(pilots->reshaped({b, 2 * l.pilot_len}))});
    return rx.forward(in);
  }
  Var in = y;
  if (with_pilots) in = nn::concat({y, tape.constant(tile_pilots(*pilots, l.y_len))});
  Var out = rx.forward(in);
  if (l.y_len != l.n) out = nn::slice_axis1(out, 0, l.n);
  return nn::reshape(out, {b, l.n});
}

Tensor hard_decisions(const Tensor& soft) {
  Tensor out(soft.shape());
  for (std::size_t i = 0; i < soft.size(); ++i) out[i] = soft[i] > 0.5 ? 1.0 : 0.0;
  return out;
}

}  // namespace gancomm::model
