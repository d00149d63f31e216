#pragma once

// Gaussian derivative scale space: sampled derivative-of-Gaussian kernels,
// reflective-boundary convolution and the second-order N-jet of a patch.

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "sstex/image.hpp"

namespace sstex {

/// The six N-jet members up to second order, in profile order.
enum class Derivative { L = 0, Lx, Ly, Lxx, Lxy, Lyy };

inline constexpr int kNumDerivatives = 6;
inline constexpr std::array<Derivative, kNumDerivatives> kAllDerivatives = {
    Derivative::L, Derivative::Lx, Derivative::Ly,
    Derivative::Lxx, Derivative::Lxy, Derivative::Lyy};

std::string_view derivative_name(Derivative d);
/// (order along x = columns, order along y = rows).
std::array<int, 2> derivative_orders(Derivative d);

/// Scales with sigma^2 = 1, 4, 7.
std::vector<double> default_sigmas();

struct Kernel2D {
  Image values;  // (2r+1) x (2r+1); values(dy + r, dx + r)
  double sigma = 0.0;
  int order_x = 0;
  int order_y = 0;
  // Separable factors: values(i, j) == profile_y[i] * profile_x[j].
  std::vector<double> profile_x;
  std::vector<double> profile_y;

  int radius() const noexcept { return (values.rows() - 1) / 2; }
};

/// Sampled 1D Gaussian derivative on [-radius, radius], moment-normalized:
/// order 0 sums to 1, order 1 has first moment -1, order 2 sums to 0 with
/// second moment 2. Convolving polynomials of matching degree is then exact.
std::vector<double> gaussian_derivative_profile(double sigma, int order, int radius);

/// radius = ceil(truncation * sigma), at least 1. Order pairs with
/// order_x + order_y > 2 throw UnsupportedOrder.
Kernel2D gaussian_derivative_kernel(double sigma, int order_x, int order_y,
                                    double truncation = 4.0);

/// Mirror index into [0, n) without repeating the edge sample
/// (-1 -> 1, n -> n-2); folds repeatedly for far-out indices.
int reflect_index(int i, int n) noexcept;

/// out(p) = sum_q patch(reflect(p - q)) * kernel(q), computed separably.
Image convolve_reflective(const Image& patch, const Kernel2D& kernel);

/// Same contract evaluated as a direct 2D double loop over kernel.values.
/// Reference path for tests and the benchmark.
Image convolve_reflective_direct(const Image& patch, const Image& kernel);

/// Kernels for every (derivative, scale) pair, built once and reused.
class NJetFilterBank {
 public:
  explicit NJetFilterBank(std::vector<double> sigmas = default_sigmas(),
                          int max_order = 2, double truncation = 4.0);

  int num_scales() const noexcept { return static_cast<int>(sigmas_.size()); }
  int num_derivatives() const noexcept { return kNumDerivatives; }
  int num_subsets() const noexcept { return num_scales() * kNumDerivatives; }
  const std::vector<double>& sigmas() const noexcept { return sigmas_; }
  /// Subset index k * ns + s, derivative-major like the decision profile.
  int subset_index(Derivative d, int scale) const noexcept {
    return static_cast<int>(d) * num_scales() + scale;
  }
  const Kernel2D& kernel(int subset) const { return kernels_.at(static_cast<std::size_t>(subset)); }

 private:
  std::vector<double> sigmas_;
  std::vector<Kernel2D> kernels_;
};

/// All N-jet responses of one patch, each the size of the patch.
struct NJetResponse {
  int num_scales = 0;
  std::vector<Image> responses;  // index k * num_scales + s

  const Image& at(Derivative d, int scale) const {
    return responses.at(static_cast<std::size_t>(static_cast<int>(d) * num_scales + scale));
  }
};

NJetResponse compute_njet(const Image& patch, const NJetFilterBank& bank);
NJetResponse compute_njet(const Image& patch, const std::vector<double>& sigmas,
                          int max_order = 2);

/// First-order steering: cos(theta) * Lx + sin(theta) * Ly.
Image steer_first_order(const Image& lx, const Image& ly, double theta);

}  // namespace sstex
