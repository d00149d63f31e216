#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sstex/scale_space.hpp"
#include "test_util.hpp"

using namespace sstex;
using sstex::testing::brute_convolve;
using sstex::testing::max_abs_diff;
using sstex::testing::random_image;

namespace {

double kernel_sum(const Kernel2D& k) {
  double s = 0.0;
  for (double v : k.values.values()) s += v;
  return s;
}

Image ramp_x(int n) {
  Image img(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) img(y, x) = x;
  return img;
}

}  // namespace

TEST_CASE("kernel normalization and symmetry") {
  const auto g = gaussian_derivative_kernel(1.0, 0, 0, 4.0);
  CHECK(g.radius() == 4);
  CHECK(std::abs(kernel_sum(g) - 1.0) < 1e-6);

  const auto gx = gaussian_derivative_kernel(1.0, 1, 0, 4.0);
  CHECK(std::abs(kernel_sum(gx)) < 1e-6);
  const int r = gx.radius();
  for (int i = 0; i < gx.values.rows(); ++i)
    for (int j = 0; j <= r; ++j) CHECK(gx.values(i, r + j) == doctest::Approx(-gx.values(i, r - j)).epsilon(1e-14));

  for (auto [ox, oy] : {std::pair{0, 1}, {2, 0}, {1, 1}, {0, 2}})
    for (double s : {1.0, 2.0, std::sqrt(7.0)})
      CHECK(std::abs(kernel_sum(gaussian_derivative_kernel(s, ox, oy))) < 1e-6);
}

TEST_CASE("second derivative kernel matches finite differences of the sampled Gaussian") {
  const double sigma = 2.0;
  const auto g = gaussian_derivative_kernel(sigma, 0, 0, 4.0);
  const auto gxx = gaussian_derivative_kernel(sigma, 2, 0, 4.0);
  const int r = g.radius();
  REQUIRE(gxx.radius() == r);
  // Continuous unit-mass Gaussian sampled on the grid, differenced along x.
  const auto G = [&](int y, int x) {
    return std::exp(-(x * x + y * y) / (2 * sigma * sigma)) / (2 * std::numbers::pi * sigma * sigma);
  };
  double worst = 0.0;
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x) {
      const double fd = G(y, x + 1) - 2 * G(y, x) + G(y, x - 1);
      worst = std::max(worst, std::abs(fd - gxx.values(y + r, x + r)));
    }
  CHECK(worst < 1e-3);
}

TEST_CASE("kernel errors") {
  CHECK_THROWS_AS(gaussian_derivative_kernel(0.0, 0, 0), InvalidArgument);
  CHECK_THROWS_AS(gaussian_derivative_kernel(-1.0, 1, 0), InvalidArgument);
  CHECK_THROWS_AS(gaussian_derivative_kernel(1.0, 2, 1), UnsupportedOrder);
  CHECK_THROWS_AS(gaussian_derivative_kernel(1.0, 0, 0, 0.0), InvalidArgument);
}

TEST_CASE("reflect index folds without repeating the edge") {
  CHECK(reflect_index(-1, 5) == 1);
  CHECK(reflect_index(-2, 5) == 2);
  CHECK(reflect_index(5, 5) == 3);
  CHECK(reflect_index(6, 5) == 2);
  CHECK(reflect_index(-9, 5) == 1);
  CHECK(reflect_index(13, 5) == 3);
  CHECK(reflect_index(7, 1) == 0);
  for (int n : {1, 2, 3, 7})
    for (int i = -40; i < 40; ++i) CHECK(reflect_index(i, n) == sstex::testing::mirror(i, n));
}

TEST_CASE("convolution of constants and impulses") {
  const Image flat(12, 12, 5.0);
  const auto g = gaussian_derivative_kernel(1.0, 0, 0);
  CHECK(max_abs_diff(convolve_reflective(flat, g), flat) < 1e-9);

  Image impulse(9, 9, 0.0);
  impulse(4, 4) = 1.0;
  const auto gx = gaussian_derivative_kernel(0.5, 1, 0, 4.0);  // radius 2
  const auto out = convolve_reflective(impulse, gx);
  const int r = gx.radius();
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) CHECK(out(4 + dy, 4 + dx) == doctest::Approx(gx.values(dy + r, dx + r)));

  CHECK_THROWS_AS(convolve_reflective(Image{}, g), InvalidArgument);
}

TEST_CASE("separable convolution equals brute-force reflective convolution") {
  for (int trial = 0; trial < 10; ++trial) {
    const Image patch = random_image(16, 16, 100 + trial, -1.0, 1.0);
    const auto [ox, oy] = derivative_orders(kAllDerivatives[static_cast<std::size_t>(trial % 6)]);
    const auto k = gaussian_derivative_kernel(0.5 + 0.1 * trial, ox, oy, 4.0);
    const Image oracle = brute_convolve(patch, k.values);
    CHECK(max_abs_diff(convolve_reflective(patch, k), oracle) < 1e-12);
    CHECK(max_abs_diff(convolve_reflective_direct(patch, k.values), oracle) < 1e-12);
  }
  // Kernel wider than the patch: repeated folding still matches.
  const Image small = random_image(5, 7, 3);
  const auto wide = gaussian_derivative_kernel(2.0, 1, 1);
  CHECK(max_abs_diff(convolve_reflective(small, wide), brute_convolve(small, wide.values)) < 1e-12);
}

TEST_CASE("convolution is linear") {
  const Image p = random_image(20, 20, 1), q = random_image(20, 20, 2);
  const auto k = gaussian_derivative_kernel(2.0, 1, 1);
  Image mix(20, 20);
  for (std::size_t i = 0; i < mix.size(); ++i) mix.values()[i] = 2.5 * p.values()[i] - 0.75 * q.values()[i];
  const Image a = convolve_reflective(p, k), b = convolve_reflective(q, k), m = convolve_reflective(mix, k);
  Image expect(20, 20);
  for (std::size_t i = 0; i < mix.size(); ++i) expect.values()[i] = 2.5 * a.values()[i] - 0.75 * b.values()[i];
  CHECK(max_abs_diff(m, expect) < 1e-10);
}

namespace {

double commutation_error(double sigma) {
  const Image patch = random_image(32, 32, 77);
  const Image smooth = convolve_reflective(patch, gaussian_derivative_kernel(sigma, 0, 0));
  const Image lx = convolve_reflective(patch, gaussian_derivative_kernel(sigma, 1, 0));
  const Image lxx = convolve_reflective(patch, gaussian_derivative_kernel(sigma, 2, 0));
  const int r = static_cast<int>(std::ceil(4 * sigma)) + 1;
  double worst = 0.0;
  for (int y = r; y < 32 - r; ++y)
    for (int x = r; x < 32 - r; ++x) {
      worst = std::max(worst, std::abs(0.5 * (smooth(y, x + 1) - smooth(y, x - 1)) - lx(y, x)));
      worst = std::max(worst, std::abs(smooth(y, x + 1) - 2 * smooth(y, x) + smooth(y, x - 1) - lxx(y, x)));
    }
  return worst;
}

}  // namespace

TEST_CASE("derivative kernels commute with differencing of the smoothed patch") {
  for (double sigma : {2.0, std::sqrt(7.0)}) {
    const double worst = commutation_error(sigma);
    INFO("sigma = " << sigma << " worst = " << worst);
    CHECK(worst < 1e-2);
  }
}

// Central differences and sampled Gaussian derivatives are different
// operators; at sigma = 1 they differ by about 0.06 on unit-amplitude noise.
TEST_CASE("commutation at sigma 1" * doctest::may_fail()) {
  const double worst = commutation_error(1.0);
  INFO("worst = " << worst);
  CHECK(worst < 1e-2);
}

TEST_CASE("N-jet shapes and exactness on simple patches") {
  const NJetFilterBank bank;
  CHECK(bank.num_subsets() == 18);
  const auto jet = compute_njet(random_image(32, 32, 5), bank);
  CHECK(jet.responses.size() == 18);
  for (const auto& r : jet.responses) CHECK((r.rows() == 32 && r.cols() == 32));

  const auto flat = compute_njet(Image(32, 32, 3.0), bank);
  for (int s = 0; s < 3; ++s) {
    for (Derivative d : kAllDerivatives) {
      const Image expect(32, 32, d == Derivative::L ? 3.0 : 0.0);
      CHECK(max_abs_diff(flat.at(d, s), expect) < 1e-9);
    }
  }

  const auto ramp = compute_njet(ramp_x(32), bank);
  for (int s = 0; s < 3; ++s) {
    const int r = bank.kernel(bank.subset_index(Derivative::Lx, s)).radius();
    for (int y = r; y < 32 - r; ++y)
      for (int x = r; x < 32 - r; ++x) {
        CHECK(std::abs(ramp.at(Derivative::Lx, s)(y, x) - 1.0) < 1e-6);
        CHECK(std::abs(ramp.at(Derivative::Ly, s)(y, x)) < 1e-6);
      }
  }
}

TEST_CASE("N-jet argument checks") {
  CHECK_THROWS_AS(compute_njet(Image(8, 8), std::vector<double>{}), InvalidArgument);
  CHECK_THROWS_AS(compute_njet(Image(8, 8), std::vector<double>{2.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(compute_njet(Image(8, 8), std::vector<double>{1.0}, 3), UnsupportedOrder);
  CHECK(default_sigmas()[2] * default_sigmas()[2] == doctest::Approx(7.0));
}

TEST_CASE("first-order steering") {
  const Image lx = random_image(10, 10, 8, -1, 1), ly = random_image(10, 10, 9, -1, 1);
  CHECK(steer_first_order(lx, ly, 0.0) == lx);
  CHECK(max_abs_diff(steer_first_order(lx, ly, std::numbers::pi / 2), ly) < 1e-15);
  for (double theta : {0.3, 1.7, -2.2}) {
    const Image a = steer_first_order(lx, ly, theta), b = steer_first_order(lx, ly, theta + std::numbers::pi);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.values()[i] + b.values()[i]));
    CHECK(worst < 1e-12);
  }
  const NJetFilterBank bank;
  const auto jet = compute_njet(ramp_x(32), bank);
  const Image diag = steer_first_order(jet.at(Derivative::Lx, 1), jet.at(Derivative::Ly, 1), std::numbers::pi / 4);
  for (int y = 8; y < 24; ++y)
    for (int x = 8; x < 24; ++x) CHECK(std::abs(diag(y, x) - std::cos(std::numbers::pi / 4)) < 1e-6);
  CHECK_THROWS_AS(steer_first_order(lx, Image(3, 3), 0.0), InvalidArgument);
}
