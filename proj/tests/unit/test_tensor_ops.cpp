#include <doctest.h>

#include <cmath>

#include "gancomm/errors.hpp"
#include "gancomm/nn/ops.hpp"
#include "support/reference.hpp"

using namespace gancomm;
using namespace gancomm::nn;

namespace {

Parameter make_param(const std::string& name, Tensor t) { return Parameter(name, std::move(t)); }

}  // namespace

TEST_CASE("tensor rejects inconsistent shapes") {
  CHECK_THROWS_AS(Tensor({2, 3}, std::vector<double>(5)), DimensionError);
  CHECK_THROWS_AS(Tensor({0, 3}), DimensionError);
  Tensor t({2, 3}, 1.0);
  CHECK(t.reshaped({3, 2}).shape() == Shape{3, 2});
  CHECK_THROWS_AS(t.reshaped({4}), DimensionError);
  Tape tape;
  CHECK_THROWS_AS(tape.constant(Tensor::vector({1.0, NAN})), NumericalError);
  CHECK_THROWS_AS(tape.constant(Tensor::vector({INFINITY})), NumericalError);
}

TEST_CASE("dense forward examples") {
  Tape tape;
  SUBCASE("identity") {
    auto W = make_param("W", Tensor({2, 2}, {1, 0, 0, 1}));
    auto b = make_param("b", Tensor({2}, 0.0));
    auto y = dense(tape.constant(Tensor({1, 2}, {1, 0})), tape.param(W), tape.param(b));
    CHECK(y.value()[0] == 1.0);
    CHECK(y.value()[1] == 0.0);
  }
  SUBCASE("relu clamps negatives") {
    auto W = make_param("W", Tensor({1, 1}, {1}));
    auto b = make_param("b", Tensor({1}, 0.0));
    auto y = dense(tape.constant(Tensor({1, 1}, {-3})), tape.param(W), tape.param(b), Activation::relu);
    CHECK(y.value()[0] == 0.0);
  }
  SUBCASE("affine map") {
    auto W = make_param("W", Tensor({1, 2}, {2, 3}));
    auto b = make_param("b", Tensor({1}, {1}));
    auto y = dense(tape.constant(Tensor({1, 2}, {1, 1})), tape.param(W), tape.param(b));
    CHECK(y.value()[0] == 6.0);
  }
  SUBCASE("shape mismatch") {
    auto W = make_param("W", Tensor({1, 3}, 1.0));
    auto b = make_param("b", Tensor({1}, 0.0));
    CHECK_THROWS_AS(dense(tape.constant(Tensor({1, 2}, 1.0)), tape.param(W), tape.param(b)), DimensionError);
  }
}

TEST_CASE("conv1d forward examples") {
  Tape tape;
  auto zero_bias = make_param("b", Tensor({1}, 0.0));
  SUBCASE("delta kernel is identity") {
    auto w = make_param("w", Tensor({3, 1, 1}, {0, 1, 0}));
    Tensor x({1, 5, 1}, {0.3, -1.2, 4.0, 2.5, -0.7});
    auto y = conv1d(tape.constant(x), tape.param(w), tape.param(zero_bias));
    CHECK(y.value() == x);
  }
  SUBCASE("box kernel with zero padding") {
    auto w = make_param("w", Tensor({3, 1, 1}, {1, 1, 1}));
    auto y = conv1d(tape.constant(Tensor({1, 4, 1}, 1.0)), tape.param(w), tape.param(zero_bias));
    CHECK(y.value() == Tensor({1, 4, 1}, {2, 3, 3, 2}));
  }
  SUBCASE("transmitter first layer width") {
    Rng rng(3);
    auto w = make_param("w", ref::random_tensor({5, 1, 256}, rng));
    auto b = make_param("b", Tensor({256}, 0.0));
    auto y = conv1d(tape.constant(ref::random_tensor({2, 64, 1}, rng)), tape.param(w), tape.param(b),
                    Activation::relu);
    CHECK(y.shape() == Shape{2, 64, 256});
  }
  SUBCASE("kernel orientation follows n-k+ceil(L/2)") {
    // Only w_1 (k = 1) is non-zero: y[n] = x[n + 1].
    auto w = make_param("w", Tensor({3, 1, 1}, {1, 0, 0}));
    auto y = conv1d(tape.constant(Tensor({1, 4, 1}, {1, 2, 3, 4})), tape.param(w), tape.param(zero_bias));
    CHECK(y.value() == Tensor({1, 4, 1}, {2, 3, 4, 0}));
  }
  SUBCASE("even kernel is a config error") {
    auto w = make_param("w", Tensor({4, 1, 1}, 1.0));
    CHECK_THROWS_AS(conv1d(tape.constant(Tensor({1, 4, 1}, 1.0)), tape.param(w), tape.param(zero_bias)),
                    ConfigError);
  }
  SUBCASE("channel mismatch is a dimension error") {
    auto w = make_param("w", Tensor({3, 2, 1}, 1.0));
    CHECK_THROWS_AS(conv1d(tape.constant(Tensor({1, 4, 3}, 1.0)), tape.param(w), tape.param(zero_bias)),
                    DimensionError);
  }
}

TEST_CASE("conv1d equals the direct double sum") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    const std::size_t B = 1 + rng.next_u64() % 3, K = 1 + rng.next_u64() % 12;
    const std::size_t Ci = 1 + rng.next_u64() % 5, Co = 1 + rng.next_u64() % 5;
    const std::size_t L = (rng.next_u64() % 2) ? 5 : 3;
    // Integer data: every summation order is exact, so equality is bitwise.
    Tensor x = ref::integer_tensor({B, K, Ci}, rng);
    auto w = make_param("w", ref::integer_tensor({L, Ci, Co}, rng));
    auto b = make_param("b", ref::integer_tensor({Co}, rng));
    Tape tape;
    auto y = conv1d(tape.constant(x), tape.param(w), tape.param(b));
    CHECK(y.value() == ref::conv1d_direct(x, w.value, b.value));

    // Real-valued data agrees to rounding.
    Tensor xr = ref::random_tensor({B, K, Ci}, rng);
    auto wr = make_param("w", ref::random_tensor({L, Ci, Co}, rng));
    Tape tape2;
    auto yr = conv1d(tape2.constant(xr), tape2.param(wr), tape2.param(b));
    const Tensor expect = ref::conv1d_direct(xr, wr.value, b.value);
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(yr.value()[i] == doctest::Approx(expect[i]).epsilon(1e-12));
  }
}

TEST_CASE("activations") {
  Tape tape;
  CHECK(relu(tape.constant(Tensor::vector({-1, 0, 2}))).value() == Tensor::vector({0, 0, 2}));
  CHECK(sigmoid(tape.constant(Tensor::vector({0}))).value()[0] == 0.5);
  CHECK(sigmoid(tape.constant(Tensor::vector({std::log(3.0)}))).value()[0] == doctest::Approx(0.75).epsilon(1e-15));
  auto s = sigmoid(tape.constant(Tensor::vector({-1000, -40, 40, 1000})));
  for (double v : s.value().data()) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("bce loss") {
  Tape tape;
  auto l1 = bce_loss(tape.constant(Tensor::vector({0.5, 0.5})), Tensor::vector({1, 0}));
  CHECK(l1.value()[0] == doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));
  auto l2 = bce_loss(tape.constant(Tensor::vector({0.75})), Tensor::vector({1}));
  CHECK(l2.value()[0] == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-12));
  auto l3 = bce_loss(tape.constant(Tensor::vector({1.0, 0.0})), Tensor::vector({1, 0}));
  CHECK(l3.value()[0] == doctest::Approx(0.0).epsilon(1e-11));
  CHECK(l3.value()[0] >= 0.0);
  CHECK_THROWS_AS(bce_loss(tape.constant(Tensor::vector({0.5})), Tensor::vector({0.5})), DomainError);

  // Non-negative everywhere; zero only at clamped perfect prediction.
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    Tensor p({2, 3}), s({2, 3});
    for (std::size_t k = 0; k < 6; ++k) {
      p[k] = rng.uniform();
      s[k] = rng.bit();
    }
    auto l = bce_loss(tape.constant(p), s);
    CHECK(l.value()[0] > 0.0);
  }
}

TEST_CASE("power normalization") {
  Tape tape;
  Rng rng(5);
  SUBCASE("already normalized input is unchanged") {
    Tensor x({1, 2, 2}, {1, 0, 0, 1});
    auto y = power_normalize(tape.constant(x), 2);
    CHECK(y.value() == x);
  }
  SUBCASE("scale invariance") {
    Tensor x = ref::random_tensor({3, 8, 2}, rng);
    Tensor x2 = x;
    for (double& v : x2.data()) v *= 2.0;
    auto a = power_normalize(tape.constant(x), 2).value();
    auto b = power_normalize(tape.constant(x2), 2).value();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));
  }
  SUBCASE("unit mean power per symbol") {
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t K = 1 + rng.next_u64() % 64;
      const std::size_t d = 1 + rng.next_u64() % 2;
      auto y = power_normalize(tape.constant(ref::random_tensor({4, K, d}, rng, 3.0)), d).value();
      for (std::size_t b = 0; b < 4; ++b) {
        double p = 0.0;
        for (std::size_t i = 0; i < K * d; ++i) p += y[b * K * d + i] * y[b * K * d + i];
        CHECK(std::abs(p / static_cast<double>(K) - 1.0) < 1e-12);
      }
    }
  }
  SUBCASE("zeros pass through") {
    auto y = power_normalize(tape.constant(Tensor({1, 3, 2}, 0.0)), 2);
    for (double v : y.value().data()) CHECK(v == 0.0);
  }
}

TEST_CASE("concat, slice and pad") {
  Tape tape;
  auto a = tape.constant(Tensor({2, 2, 1}, {1, 2, 3, 4}));
  auto b = tape.constant(Tensor({2, 2, 2}, {5, 6, 7, 8, 9, 10, 11, 12}));
  auto c = concat({a, b});
  CHECK(c.value() == Tensor({2, 2, 3}, {1, 5, 6, 2, 7, 8, 3, 9, 10, 4, 11, 12}));
  CHECK_THROWS_AS(concat({a, tape.constant(Tensor({2, 3, 1}, 0.0))}), DimensionError);
  auto p = pad_axis1(a, 1, 2);
  CHECK(p.value() == Tensor({2, 5, 1}, {0, 1, 2, 0, 0, 0, 3, 4, 0, 0}));
  CHECK(slice_axis1(p, 1, 2).value() == a.value());
}
