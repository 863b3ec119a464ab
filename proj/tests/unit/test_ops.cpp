#include <doctest.h>

#include <cmath>
#include <numeric>

#include "support.hpp"
#include "tscmrar/error.hpp"
#include "tscmrar/ops.hpp"

using namespace tscmrar;

namespace {

// Direct transcription of the convolution sum, zero outside [0, L).
Tensor conv_oracle(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t pad) {
  const std::size_t cout = w.shape()[0], cin = w.shape()[1], taps = w.shape()[2];
  const std::size_t len = x.shape()[1];
  Tensor out(Shape{cout, len});
  for (std::size_t j = 0; j < cout; ++j) {
    for (std::size_t p = 0; p < len; ++p) {
      double s = b[j];
      for (std::size_t c = 0; c < cin; ++c) {
        for (std::size_t m = 0; m < taps; ++m) {
          const long q = static_cast<long>(p + m) - static_cast<long>(pad);
          if (q < 0 || q >= static_cast<long>(len)) continue;
          s += w.at(j, c, m) * x.at(c, static_cast<std::size_t>(q));
        }
      }
      out.at(j, p) = s;
    }
  }
  return out;
}

double weighted_sum(const Tensor& t, const Tensor& weights) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) s += t[i] * weights[i];
  return s;
}

}  // namespace

TEST_SUITE("ops") {

TEST_CASE("shape and tensor basics") {
  CHECK(Shape{16, 37}.numel() == 592);
  CHECK(Shape{16, 37}.str() == "[16x37]");
  CHECK_THROWS_AS(Tensor(Shape{2}, std::vector<double>{1, 2, 3}), ShapeError);
  Tensor t(Shape{2, 3}, 1.5);
  CHECK(t.at(1, 2) == 1.5);
  CHECK(t.reshaped(Shape{6}).shape() == Shape{6});
  CHECK_THROWS_AS(t.reshaped(Shape{4}), ShapeError);
  t[3] = std::nan("");
  CHECK_FALSE(t.is_finite());
  CHECK_THROWS_AS(t.require_finite("t"), NumericError);
}

TEST_CASE("conv1d hand example") {
  const Tensor x(Shape{1, 5}, {0, 1, 0, 0, 0});
  const Tensor w(Shape{1, 1, 3}, {1, 1, 1});
  const Tensor b(Shape{1}, {0.0});
  const Tensor out = conv1d(x, w, b, ConvSpec{1, 1, 3});
  CHECK(out == Tensor(Shape{1, 5}, {1, 1, 1, 0, 0}));
}

TEST_CASE("conv1d zero weights and bias give zero output") {
  Rng rng(1);
  const ConvSpec spec{4, 6, 3};
  const Tensor out = conv1d(test::random_tensor(Shape{4, 37}, rng), Tensor(spec.weight_shape()),
                            Tensor(spec.bias_shape()), spec);
  for (double v : out.data()) CHECK(v == 0.0);
}

TEST_CASE("conv1d one-hot to 16 channels keeps length") {
  Tensor x(Shape{1, 37});
  x[12] = 1.0;
  const ConvSpec spec{1, 16, 3};
  Rng rng(2);
  const Tensor out = conv1d(x, test::random_tensor(spec.weight_shape(), rng),
                            Tensor(spec.bias_shape()), spec);
  CHECK(out.shape() == Shape{16, 37});
}

TEST_CASE("conv1d matches the direct sum on random shapes") {
  Rng rng(3);
  for (const ConvSpec spec : {ConvSpec{1, 1, 3}, ConvSpec{1, 16, 3}, ConvSpec{3, 5, 5},
                              ConvSpec{7, 2, 1}, ConvSpec{16, 32, 3}, ConvSpec{64, 64, 3},
                              ConvSpec{5, 9, 7}}) {
    for (std::size_t len : {1u, 2u, 4u, 9u, 37u}) {
      CAPTURE(spec.in_channels);
      CAPTURE(spec.out_channels);
      CAPTURE(spec.kernel_size);
      CAPTURE(len);
      const Tensor x = test::random_tensor(Shape{spec.in_channels, len}, rng);
      const Tensor w = test::random_tensor(spec.weight_shape(), rng);
      const Tensor b = test::random_tensor(spec.bias_shape(), rng);
      const Tensor got = conv1d(x, w, b, spec);
      const Tensor want = conv_oracle(x, w, b, spec.padding());
      REQUIRE(got.shape() == want.shape());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("conv1d is linear in its input") {
  Rng rng(4);
  const ConvSpec spec{3, 4, 3};
  const Tensor w = test::random_tensor(spec.weight_shape(), rng);
  const Tensor zero_b(spec.bias_shape());
  const Tensor x = test::random_tensor(Shape{3, 11}, rng);
  const Tensor y = test::random_tensor(Shape{3, 11}, rng);
  const double a = 2.5, c = -0.75;
  Tensor mix(Shape{3, 11});
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x[i] + c * y[i];
  const Tensor lhs = conv1d(mix, w, zero_b, spec);
  const Tensor fx = conv1d(x, w, zero_b, spec);
  const Tensor fy = conv1d(y, w, zero_b, spec);
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    CHECK(lhs[i] == doctest::Approx(a * fx[i] + c * fy[i]).epsilon(1e-12));
  }
}

TEST_CASE("conv1d shape errors name the dimension") {
  const ConvSpec spec{2, 3, 3};
  const Tensor w(spec.weight_shape());
  const Tensor b(spec.bias_shape());
  CHECK_THROWS_WITH_AS(conv1d(Tensor(Shape{3, 5}), w, b, spec),
                       doctest::Contains("input channels"), ShapeError);
  CHECK_THROWS_AS(conv1d(Tensor(Shape{2, 5}), Tensor(Shape{3, 2, 5}), b, spec), ShapeError);
  CHECK_THROWS_AS(conv1d(Tensor(Shape{2, 5}), w, Tensor(Shape{2}), spec), ShapeError);
  CHECK_THROWS_AS(conv1d(Tensor(Shape{2, 5}), Tensor(Shape{3, 2, 2}), b, ConvSpec{2, 3, 2}),
                  ShapeError);
}

TEST_CASE("relu examples") {
  CHECK(relu(Tensor::vector({-1, 0, 2})) == Tensor::vector({0, 0, 2}));
  CHECK(relu(Tensor::vector({-3, -0.5})) == Tensor::vector({0, 0}));
  const Tensor pos = Tensor::vector({0, 1, 7.5});
  CHECK(relu(pos) == pos);
}

TEST_CASE("relu is idempotent") {
  Rng rng(5);
  const Tensor x = test::random_tensor(Shape{4, 9}, rng);
  CHECK(relu(relu(x)) == relu(x));
}

TEST_CASE("add examples") {
  const Tensor a = Tensor::vector({1, 2});
  CHECK(add(a, Tensor(Shape{2})) == a);
  CHECK(add(a, Tensor::vector({3, 4})) == Tensor::vector({4, 6}));
  CHECK(add(a, Tensor::vector({-1, -2})) == Tensor(Shape{2}));
  CHECK_THROWS_AS(add(a, Tensor(Shape{3})), ShapeError);
}

TEST_CASE("dense examples") {
  const Tensor x = Tensor::vector({2, 3});
  CHECK(dense(x, Tensor(Shape{2, 2}, {1, 0, 0, 1}), Tensor(Shape{2})) == x);
  CHECK(dense(x, Tensor(Shape{2, 2}), Tensor::vector({0.5, -1})) == Tensor::vector({0.5, -1}));
  CHECK(dense(x, Tensor(Shape{2, 2}, {1, 1, 1, -1}), Tensor(Shape{2})) ==
        Tensor::vector({5, -1}));
  // any input shape with D elements is flattened row-major
  CHECK(dense(Tensor(Shape{1, 2}, {2, 3}), Tensor(Shape{2, 2}, {1, 1, 1, -1}),
              Tensor(Shape{2})) == Tensor::vector({5, -1}));
  CHECK_THROWS_AS(dense(Tensor::vector({1, 2, 3}), Tensor(Shape{2, 2}), Tensor(Shape{2})),
                  ShapeError);
}

TEST_CASE("softmax examples") {
  const Tensor two = softmax(Tensor(Shape{2}));
  CHECK(two[0] == doctest::Approx(0.5));
  CHECK(two[1] == doctest::Approx(0.5));
  const Tensor fifteen = softmax(Tensor(Shape{15}));
  for (double p : fifteen.data()) CHECK(p == doctest::Approx(1.0 / 15.0));
}

TEST_CASE("softmax is shift invariant and sums to one") {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor z = test::random_tensor(Shape{15}, rng, -20, 20);
    Tensor shifted = z;
    const double c = rng.uniform(-500, 500);
    for (double& v : shifted.data()) v += c;
    const Tensor p = softmax(z);
    const Tensor q = softmax(shifted);
    CHECK(std::accumulate(p.data().begin(), p.data().end(), 0.0) == doctest::Approx(1.0));
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == doctest::Approx(q[i]).epsilon(1e-9));
  }
  const Tensor big = softmax(Tensor::vector({1000, 0}));
  CHECK(big.is_finite());
  CHECK(big[0] == doctest::Approx(1.0));
}

TEST_CASE("cross entropy examples") {
  CHECK(cross_entropy(Tensor::vector({0, 1, 0}), 1) == 0.0);
  CHECK(cross_entropy(Tensor::vector({0.5, 0.5}), 0) == doctest::Approx(std::log(2.0)));
  CHECK(cross_entropy(Tensor::vector({0.5, 0.5}), 0) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(cross_entropy(Tensor(Shape{15}, 1.0 / 15.0), 7) == doctest::Approx(2.70805).epsilon(1e-5));
  // clipped, never infinite
  CHECK(cross_entropy(Tensor::vector({1, 0}), 1) == doctest::Approx(-std::log(1e-12)));
  CHECK_THROWS_AS(cross_entropy(Tensor::vector({1, 0}), 2), DataError);
}

TEST_CASE("sum of squares") {
  CHECK(sum_of_squares(Tensor::vector({1, -2, 3})) == 14.0);
}

TEST_CASE("conv1d backward matches finite differences") {
  Rng rng(7);
  for (const ConvSpec spec : {ConvSpec{1, 3, 3}, ConvSpec{3, 2, 5}, ConvSpec{4, 4, 3},
                              ConvSpec{2, 5, 1}}) {
    const std::size_t len = 6;
    Tensor x = test::random_tensor(Shape{spec.in_channels, len}, rng);
    Tensor w = test::random_tensor(spec.weight_shape(), rng);
    Tensor b = test::random_tensor(spec.bias_shape(), rng);
    const Tensor g = test::random_tensor(Shape{spec.out_channels, len}, rng);
    auto f = [&] { return weighted_sum(conv1d(x, w, b, spec), g); };
    Tensor gx(x.shape()), gw(w.shape()), gb(b.shape());
    conv1d_backward(x, w, spec, g, &gx, gw, gb);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(test::rel_err(gx[i], test::numeric_partial(x, i, f)) < 1e-7);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(test::rel_err(gw[i], test::numeric_partial(w, i, f)) < 1e-7);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(test::rel_err(gb[i], test::numeric_partial(b, i, f)) < 1e-7);
  }
}

TEST_CASE("conv1d backward accumulates and tolerates a null input gradient") {
  Rng rng(8);
  const ConvSpec spec{2, 3, 3};
  const Tensor x = test::random_tensor(Shape{2, 5}, rng);
  const Tensor w = test::random_tensor(spec.weight_shape(), rng);
  const Tensor g = test::random_tensor(Shape{3, 5}, rng);
  Tensor gw1(w.shape()), gb1(spec.bias_shape());
  conv1d_backward(x, w, spec, g, nullptr, gw1, gb1);
  Tensor gw2 = gw1, gb2 = gb1;
  conv1d_backward(x, w, spec, g, nullptr, gw2, gb2);
  for (std::size_t i = 0; i < gw1.size(); ++i) CHECK(gw2[i] == doctest::Approx(2 * gw1[i]));
  for (std::size_t i = 0; i < gb1.size(); ++i) CHECK(gb2[i] == doctest::Approx(2 * gb1[i]));
}

TEST_CASE("relu, dense, softmax and cross entropy backward match finite differences") {
  Rng rng(9);
  SUBCASE("relu") {
    Tensor x = test::random_tensor(Shape{3, 7}, rng);
    for (double& v : x.data()) {
      if (std::abs(v) < 1e-3) v = 0.5;  // stay off the kink
    }
    const Tensor g = test::random_tensor(x.shape(), rng);
    auto f = [&] { return weighted_sum(relu(x), g); };
    Tensor gx(x.shape());
    relu_backward(x, g, gx);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(test::rel_err(gx[i], test::numeric_partial(x, i, f)) < 1e-7);
  }
  SUBCASE("dense") {
    Tensor x = test::random_tensor(Shape{2, 4}, rng);
    Tensor w = test::random_tensor(Shape{3, 8}, rng);
    Tensor b = test::random_tensor(Shape{3}, rng);
    const Tensor g = test::random_tensor(Shape{3}, rng);
    auto f = [&] { return weighted_sum(dense(x, w, b), g); };
    Tensor gx(x.shape()), gw(w.shape()), gb(b.shape());
    dense_backward(x, w, g, &gx, gw, gb);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(test::rel_err(gx[i], test::numeric_partial(x, i, f)) < 1e-7);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(test::rel_err(gw[i], test::numeric_partial(w, i, f)) < 1e-7);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(test::rel_err(gb[i], test::numeric_partial(b, i, f)) < 1e-7);
  }
  SUBCASE("softmax") {
    Tensor z = test::random_tensor(Shape{6}, rng, -3, 3);
    const Tensor g = test::random_tensor(Shape{6}, rng);
    auto f = [&] { return weighted_sum(softmax(z), g); };
    Tensor gz(z.shape());
    softmax_backward(softmax(z), g, gz);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(test::rel_err(gz[i], test::numeric_partial(z, i, f)) < 1e-7);
  }
  SUBCASE("cross entropy") {
    Tensor p = test::random_tensor(Shape{5}, rng, 0.05, 1.0);
    auto f = [&] { return cross_entropy(p, 3); };
    Tensor gp(p.shape());
    cross_entropy_backward(p, 3, 1.0, gp);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(test::rel_err(gp[i], test::numeric_partial(p, i, f)) < 1e-7);
  }
}

}  // TEST_SUITE
