#include "gancomm/nn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "gancomm/errors.hpp"

namespace gancomm::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

auto idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

ConstMatMap as_matrix(const Tensor& t, std::size_t rows, std::size_t cols) {
  return ConstMatMap(t.raw(), idx(rows), idx(cols));
}
MatMap as_matrix(Tensor& t, std::size_t rows, std::size_t cols) { return MatMap(t.raw(), idx(rows), idx(cols)); }

void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

void accumulate(Tensor& dst, const Tensor& src) {
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

// Upper bound on im2col scratch (doubles) per chunk of batch items.
constexpr std::size_t kIm2colBudget = std::size_t{1} << 21;

struct ConvGeometry {
  std::size_t batch, length, c_in, c_out, kernel, pad;
  std::size_t patch() const { return kernel * c_in; }
};

// cols[(b - b0) * K + n, kk * C_in + j] = x[b, n - kk + pad, j] (zero outside).
void im2col(const double* x, const ConvGeometry& g, std::size_t b0, std::size_t b1, RowMat& cols) {
  cols.setZero(idx((b1 - b0) * g.length), idx(g.patch()));
  for (std::size_t b = b0; b < b1; ++b) {
    const double* xb = x + b * g.length * g.c_in;
    for (std::size_t n = 0; n < g.length; ++n) {
      double* row = cols.data() + ((b - b0) * g.length + n) * g.patch();
      for (std::size_t kk = 0; kk < g.kernel; ++kk) {
        const auto src = static_cast<std::ptrdiff_t>(n + g.pad) - static_cast<std::ptrdiff_t>(kk);
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(g.length)) continue;
        std::copy_n(xb + static_cast<std::size_t>(src) * g.c_in, g.c_in, row + kk * g.c_in);
      }
    }
  }
}

void col2im_add(const RowMat& cols, const ConvGeometry& g, std::size_t b0, std::size_t b1, double* dx) {
  for (std::size_t b = b0; b < b1; ++b) {
    double* db = dx + b * g.length * g.c_in;
    for (std::size_t n = 0; n < g.length; ++n) {
      const double* row = cols.data() + ((b - b0) * g.length + n) * g.patch();
      for (std::size_t kk = 0; kk < g.kernel; ++kk) {
        const auto src = static_cast<std::ptrdiff_t>(n + g.pad) - static_cast<std::ptrdiff_t>(kk);
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(g.length)) continue;
        double* dst = db + static_cast<std::size_t>(src) * g.c_in;
        const double* s = row + kk * g.c_in;
        for (std::size_t j = 0; j < g.c_in; ++j) dst[j] += s[j];
      }
    }
  }
}

std::size_t chunk_items(const ConvGeometry& g) {
  return std::max<std::size_t>(1, kIm2colBudget / std::max<std::size_t>(1, g.length * g.patch()));
}

double stable_sigmoid(double v) {
  // Kept strictly inside (0, 1) even where the exact value rounds to 0 or 1.
  constexpr double lo = 1e-300;
  constexpr double hi = 1.0 - 0x1.0p-53;
  const double s = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  return std::clamp(s, lo, hi);
}

Var affine(Var x, Var weights, Var bias) {
  const Tensor& X = x.value();
  const Tensor& W = weights.value();
  const Tensor& b = bias.value();
  require(X.rank() == 2, "dense expects [batch, features] input, got " + shape_string(X.shape()));
  require(W.rank() == 2 && W.extent(1) == X.extent(1),
          "dense weights " + shape_string(W.shape()) + " do not match input " + shape_string(X.shape()));
  require(b.rank() == 1 && b.extent(0) == W.extent(0), "dense bias does not match output width");
  const std::size_t batch = X.extent(0), in = X.extent(1), out = W.extent(0);

  Tensor Y({batch, out});
  auto ym = as_matrix(Y, batch, out);
  ym.noalias() = as_matrix(X, batch, in) * as_matrix(W, out, in).transpose();
  ym.rowwise() += ConstVecMap(b.raw(), idx(out)).transpose();

  const auto xi = x.id(), wi = weights.id(), bi = bias.id();
  return x.tape().record(std::move(Y), {x, weights, bias}, [=](Tape& t, std::size_t self) {
    const auto gy = as_matrix(t.grad_buffer(self), batch, out);
    if (t.requires_grad(xi))
      as_matrix(t.grad_buffer(xi), batch, in).noalias() += gy * as_matrix(t.value(wi), out, in);
    if (t.requires_grad(wi))
      as_matrix(t.grad_buffer(wi), out, in).noalias() += gy.transpose() * as_matrix(t.value(xi), batch, in);
    if (t.requires_grad(bi)) {
      auto& gb = t.grad_buffer(bi);
      for (std::size_t r = 0; r < batch; ++r)
        for (std::size_t c = 0; c < out; ++c) gb[c] += gy(idx(r), idx(c));
    }
  });
}

}  // namespace

Activation parse_activation(std::string_view name) {
  if (name == "none" || name == "linear") return Activation::none;
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::sigmoid:
      return "sigmoid";
    default:
      return "none";
  }
}

Var dense(Var x, Var weights, Var bias, Activation act) { return activate(affine(x, weights, bias), act); }

Var conv1d(Var x, Var kernels, Var bias, Activation act) {
  const Tensor& X = x.value();
  const Tensor& W = kernels.value();
  const Tensor& b = bias.value();
  require(X.rank() == 3, "conv1d expects [batch, length, channels] input, got " + shape_string(X.shape()));
  require(W.rank() == 3, "conv1d kernels must be [L, C_in, C_out]");
  if (W.extent(0) % 2 == 0) throw ConfigError("conv1d kernel size must be odd, got " + std::to_string(W.extent(0)));
  require(W.extent(1) == X.extent(2), "conv1d kernel expects " + std::to_string(W.extent(1)) +
                                          " input channels, input has " + std::to_string(X.extent(2)));
  require(b.rank() == 1 && b.extent(0) == W.extent(2), "conv1d bias does not match output channels");

  const ConvGeometry g{X.extent(0), X.extent(1), X.extent(2), W.extent(2), W.extent(0), (W.extent(0) - 1) / 2};
  const auto wm = as_matrix(W, g.patch(), g.c_out);
  Tensor Y({g.batch, g.length, g.c_out});
  auto ym = as_matrix(Y, g.batch * g.length, g.c_out);
  const std::size_t step = chunk_items(g);
  RowMat cols;
  for (std::size_t b0 = 0; b0 < g.batch; b0 += step) {
    const std::size_t b1 = std::min(g.batch, b0 + step);
    im2col(X.raw(), g, b0, b1, cols);
    ym.middleRows(idx(b0 * g.length), idx((b1 - b0) * g.length)).noalias() = cols * wm;
  }
  ym.rowwise() += ConstVecMap(b.raw(), idx(g.c_out)).transpose();

  const auto xi = x.id(), wi = kernels.id(), bi = bias.id();
  Var y = x.tape().record(std::move(Y), {x, kernels, bias}, [=](Tape& t, std::size_t self) {
    const auto gy = as_matrix(t.grad_buffer(self), g.batch * g.length, g.c_out);
    const bool need_x = t.requires_grad(xi), need_w = t.requires_grad(wi);
    const auto w = as_matrix(t.value(wi), g.patch(), g.c_out);
    RowMat c, dcols;
    for (std::size_t b0 = 0; b0 < g.batch; b0 += step) {
      const std::size_t b1 = std::min(g.batch, b0 + step);
      const auto gyc = gy.middleRows(idx(b0 * g.length), idx((b1 - b0) * g.length));
      if (need_w) {
        im2col(t.value(xi).raw(), g, b0, b1, c);
        as_matrix(t.grad_buffer(wi), g.patch(), g.c_out).noalias() += c.transpose() * gyc;
      }
      if (need_x) {
        dcols.noalias() = gyc * w.transpose();
        col2im_add(dcols, g, b0, b1, t.grad_buffer(xi).raw());
      }
    }
    if (t.requires_grad(bi)) {
      auto& gb = t.grad_buffer(bi);
      for (Eigen::Index r = 0; r < gy.rows(); ++r)
        for (std::size_t ch = 0; ch < g.c_out; ++ch) gb[ch] += gy(r, idx(ch));
    }
  });
  return activate(y, act);
}

Var relu(Var x) {
  Tensor y = x.value();
  for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
  const auto xi = x.id();
  return x.tape().record(std::move(y), {x}, [xi](Tape& t, std::size_t self) {
    const auto& g = t.grad_buffer(self);
    const auto& xv = t.value(xi);
    auto& gx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (xv[i] > 0.0) gx[i] += g[i];
  });
}

Var sigmoid(Var x) {
  Tensor y = x.value();
  for (double& v : y.data()) v = stable_sigmoid(v);
  const auto xi = x.id();
  return x.tape().record(std::move(y), {x}, [xi](Tape& t, std::size_t self) {
    const auto& g = t.grad_buffer(self);
    const auto& yv = t.value(self);
    auto& gx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * yv[i] * (1.0 - yv[i]);
  });
}

Var activate(Var x, Activation act) {
  switch (act) {
    case Activation::relu:
      return relu(x);
    case Activation::sigmoid:
      return sigmoid(x);
    default:
      return x;
  }
}

Var power_normalize(Var x, std::size_t values_per_symbol) {
  const Tensor& X = x.value();
  require(X.rank() >= 2, "power_normalize expects a leading batch axis");
  require(values_per_symbol == 1 || values_per_symbol == 2, "values_per_symbol must be 1 or 2");
  const std::size_t batch = X.extent(0), per = X.size() / batch;
  require(per % values_per_symbol == 0, "power_normalize: item size not a whole number of symbols");
  const double symbols = static_cast<double>(per / values_per_symbol);

  Tensor y = X;
  std::vector<double> energy(batch), gain(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < per; ++i) s += X[b * per + i] * X[b * per + i];
    energy[b] = s;
    gain[b] = s > 0.0 ? std::sqrt(symbols / s) : 0.0;
    for (std::size_t i = 0; i < per; ++i) y[b * per + i] *= gain[b];
  }
  const auto xi = x.id();
  return x.tape().record(std::move(y), {x}, [=](Tape& t, std::size_t self) {
    const auto& g = t.grad_buffer(self);
    const auto& xv = t.value(xi);
    auto& gx = t.grad_buffer(xi);
    for (std::size_t b = 0; b < batch; ++b) {
      if (energy[b] <= 0.0) continue;
      double dot = 0.0;
      for (std::size_t i = 0; i < per; ++i) dot += g[b * per + i] * xv[b * per + i];
      const double c = gain[b], k = c * dot / energy[b];
      for (std::size_t i = 0; i < per; ++i) gx[b * per + i] += c * g[b * per + i] - k * xv[b * per + i];
    }
  });
}

Var concat(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat of nothing");
  const Shape& first = parts.front().shape();
  const std::size_t rank = first.size();
  std::size_t outer = 1;
  for (std::size_t a = 0; a + 1 < rank; ++a) outer *= first[a];
  std::vector<std::size_t> widths, ids;
  std::size_t total = 0;
  for (const Var& p : parts) {
    const Shape& s = p.shape();
    require(s.size() == rank && std::equal(s.begin(), s.end() - 1, first.begin()),
            "concat: leading extents differ (" + shape_string(first) + " vs " + shape_string(s) + ")");
    widths.push_back(s.back());
    ids.push_back(p.id());
    total += s.back();
  }
  Shape out_shape = first;
  out_shape.back() = total;
  Tensor y(out_shape);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const Tensor& v = parts[p].value();
    for (std::size_t o = 0; o < outer; ++o)
      std::copy_n(v.raw() + o * widths[p], widths[p], y.raw() + o * total + offset);
    offset += widths[p];
  }
  return parts.front().tape().record(std::move(y), parts, [=](Tape& t, std::size_t self) {
    const auto& g = t.grad_buffer(self);
    std::size_t off = 0;
    for (std::size_t p = 0; p < ids.size(); ++p) {
      if (t.requires_grad(ids[p])) {
        auto& gp = t.grad_buffer(ids[p]);
        for (std::size_t o = 0; o < outer; ++o)
          for (std::size_t i = 0; i < widths[p]; ++i) gp[o * widths[p] + i] += g[o * total + off + i];
      }
      off += widths[p];
    }
  });
}

Var reshape(Var x, Shape shape) {
  Tensor y = x.value().reshaped(std::move(shape));
  const auto xi = x.id();
  return x.tape().record(std::move(y), {x}, [xi](Tape& t, std::size_t self) {
    accumulate(t.grad_buffer(xi), t.grad_buffer(self));
  });
}

Var slice_axis1(Var x, std::size_t begin, std::size_t count) {
  const Tensor& X = x.value();
  require(X.rank() >= 2 && begin + count <= X.extent(1) && count > 0, "slice_axis1 out of range");
  const std::size_t batch = X.extent(0), len = X.extent(1), inner = X.size() / (batch * len);
  Shape s = X.shape();
  s[1] = count;
  Tensor y(s);
  for (std::size_t b = 0; b < batch; ++b)
    std::copy_n(X.raw() + (b * len + begin) * inner, count * inner, y.raw() + b * count * inner);
  const auto xi = x.id();
  return x.tape().record(std::move(y), {x}, [=](Tape& t, std::size_t self) {
    const auto& g = t.grad_buffer(self);
    auto& gx = t.grad_buffer(xi);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t i = 0; i < count * inner; ++i) gx[(b * len + begin) * inner + i] += g[b * count * inner + i];
  });
}

Var pad_axis1(Var x, std::size_t before, std::size_t after) {
  const Tensor& X = x.value();
  require(X.rank() >= 2, "pad_axis1 expects rank >= 2");
  if (before == 0 && after == 0) return x;
  const std::size_t batch = X.extent(0), len = X.extent(1), inner = X.size() / (batch * len);
  const std::size_t out_len = len + before + after;
  Shape s = X.shape();
  s[1] = out_len;
  Tensor y(s, 0.0);
  for (std::size_t b = 0; b < batch; ++b)
    std::copy_n(X.raw() + b * len * inner, len * inner, y.raw() + (b * out_len + before) * inner);
  const auto xi = x.id();
  return x.tape().record(std::move(y), {x}, [=](Tape& t, std::size_t self) {
    const auto& g = t.grad_buffer(self);
    auto& gx = t.grad_buffer(xi);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t i = 0; i < len * inner; ++i) gx[b * len * inner + i] += g[(b * out_len + before) * inner + i];
  });
}

Var add(Var a, Var b) {
  require(a.shape() == b.shape(), "add: shapes differ " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b.value()[i];
  const auto ai = a.id(), bi = b.id();
  return a.tape().record(std::move(y), {a, b}, [ai, bi](Tape& t, std::size_t self) {
    const auto& g = t.grad_buffer(self);
    if (t.requires_grad(ai)) accumulate(t.grad_buffer(ai), g);
    if (t.requires_grad(bi)) accumulate(t.grad_buffer(bi), g);
  });
}

Var scale(Var x, double factor) {
  Tensor y = x.value();
  for (double& v : y.data()) v *= factor;
  const auto xi = x.id();
  return x.tape().record(std::move(y), {x}, [xi, factor](Tape& t, std::size_t self) {
    const auto& g = t.grad_buffer(self);
    auto& gx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
  });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  const auto xi = x.id();
  return x.tape().record(Tensor({1}, s), {x}, [xi](Tape& t, std::size_t self) {
    const double g = t.grad_buffer(self)[0];
    for (double& v : t.grad_buffer(xi).data()) v += g;
  });
}

Var weighted_sum(Var x, const Tensor& weights) {
  require(weights.size() == x.value().size(), "weighted_sum: weight count mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * x.value()[i];
  const auto xi = x.id();
  return x.tape().record(Tensor({1}, s), {x}, [xi, weights](Tape& t, std::size_t self) {
    const double g = t.grad_buffer(self)[0];
    auto& gx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < weights.size(); ++i) gx[i] += g * weights[i];
  });
}

Var bce_loss(Var pred, const Tensor& target) {
  const Tensor& P = pred.value();
  require(P.size() == target.size(), "bce_loss: prediction and target sizes differ");
  for (double s : target.data())
    if (s != 0.0 && s != 1.0) throw DomainError("bce_loss targets must be 0 or 1");
  const double inv_batch = 1.0 / static_cast<double>(P.rank() >= 2 ? P.extent(0) : 1);
  double loss = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const double p = std::clamp(P[i], kLogClamp, 1.0 - kLogClamp);
    loss -= target[i] == 1.0 ? std::log(p) : std::log(1.0 - p);
  }
  loss *= inv_batch;
  const auto pi = pred.id();
  return pred.tape().record(Tensor({1}, loss), {pred}, [pi, target, inv_batch](Tape& t, std::size_t self) {
    const double g = t.grad_buffer(self)[0] * inv_batch;
    const auto& pv = t.value(pi);
    auto& gp = t.grad_buffer(pi);
    for (std::size_t i = 0; i < pv.size(); ++i) {
      const double p = pv[i];
      if (p < kLogClamp || p > 1.0 - kLogClamp) continue;  // clamp has zero slope
      gp[i] += target[i] == 1.0 ? -g / p : g / (1.0 - p);
    }
  });
}

}  // namespace gancomm::nn
