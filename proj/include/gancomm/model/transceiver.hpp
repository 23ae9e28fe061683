#pragma once

#include <optional>

#include "gancomm/channel/channels.hpp"
#include "gancomm/model/network.hpp"

namespace gancomm::model {

enum class Arch { fcn, cnn };

Arch parse_arch(std::string_view s);
std::string_view to_string(Arch a);

/// Tensor shapes shared by all four networks of one system.
///   bits   [B, N]          transmitter input, receiver output
///   x      [B, K, dims]    transmitted symbols
///   y      [B, y_len, dims] channel output (K + taps - 1 for multipath)
///   pilots [B, pilot_len, 2] received pilots, complex, absent when pilot_len = 0
struct Layout {
  Arch arch = Arch::fcn;
  std::size_t n = 4;
  std::size_t k = 7;
  std::size_t dims = 2;  // 2 for I/Q symbols, 1 for real symbols
  std::size_t y_len = 7;
  std::size_t pilot_len = 0;

  /// Real symbols are only defined for AWGN. CNN systems need N == K.
  static Layout make(Arch arch, std::size_t n, std::size_t k, bool real_symbols,
                     const channel::ChannelProfile& profile);

  /// Generator noise: one standard normal per real output dimension.
  std::size_t noise_dim() const { return y_len * dims; }
  Shape bits_shape(std::size_t batch) const { return {batch, n}; }
  Shape x_shape(std::size_t batch) const { return {batch, k, dims}; }
  Shape y_shape(std::size_t batch) const { return {batch, y_len, dims}; }
  Shape pilot_shape(std::size_t batch) const { return {batch, pilot_len, 2}; }
  Shape noise_shape(std::size_t batch) const;
};

// Layer stacks. FCN hidden widths: transmitter {32, 32}, receiver {32, 32},
// generator {128, 128, 128}, discriminator {32, 32, 32}, all relu. CNN stacks
// follow the fixed convolutional tables. width_scale multiplies every hidden
// width (rounded, at least 1) and leaves the output layers alone.
NetworkSpec transmitter_spec(const Layout& layout, double width_scale = 1.0);
NetworkSpec receiver_spec(const Layout& layout, double width_scale = 1.0);
NetworkSpec generator_spec(const Layout& layout, double width_scale = 1.0);
NetworkSpec discriminator_spec(const Layout& layout, double width_scale = 1.0);

Shape transmitter_input(const Layout& layout);
Shape receiver_input(const Layout& layout);
Shape generator_input(const Layout& layout);
Shape discriminator_input(const Layout& layout);

struct Transceiver {
  Network tx;
  Network rx;
};

struct ChannelGan {
  Network gen;
  Network disc;
};

Transceiver build_from_table(const Layout& layout, Rng& rng, double width_scale = 1.0);
ChannelGan build_gan(const Layout& layout, Rng& rng, double width_scale = 1.0);

/// Bits as {0, 1} reals [B, N] -> unit-power symbols [B, K, dims].
Var transmit(const Network& tx, Var bits, const Layout& layout);

/// y [B, y_len, dims] plus received pilots -> N soft bits in (0, 1). The FCN
/// flattens and concatenates y and y_p; the CNN appends every pilot value as
/// extra channels at each position and keeps the first N outputs.
Var receive(const Network& rx, Var y, const std::optional<Tensor>& pilots, const Layout& layout);

/// [B, P, 2] pilots repeated along a length-`len` axis: [B, len, 2P].
Tensor tile_pilots(const Tensor& pilots, std::size_t len);

/// Hard decisions at 0.5.
Tensor hard_decisions(const Tensor& soft);

}  // namespace gancomm::model
