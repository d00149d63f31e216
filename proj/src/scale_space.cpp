#include "sstex/scale_space.hpp"

#include <cmath>
#include <string>

namespace sstex {

std::string_view derivative_name(Derivative d) {
  switch (d) {
    case Derivative::L: return "L";
    case Derivative::Lx: return "Lx";
    case Derivative::Ly: return "Ly";
    case Derivative::Lxx: return "Lxx";
    case Derivative::Lxy: return "Lxy";
    case Derivative::Lyy: return "Lyy";
  }
  return "?";
}

std::array<int, 2> derivative_orders(Derivative d) {
  switch (d) {
    case Derivative::L: return {0, 0};
    case Derivative::Lx: return {1, 0};
    case Derivative::Ly: return {0, 1};
    case Derivative::Lxx: return {2, 0};
    case Derivative::Lxy: return {1, 1};
    case Derivative::Lyy: return {0, 2};
  }
  return {0, 0};
}

std::vector<double> default_sigmas() { return {1.0, 2.0, std::sqrt(7.0)}; }

std::vector<double> gaussian_derivative_profile(double sigma, int order, int radius) {
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian_derivative_profile: sigma must be positive");
  if (order < 0) throw InvalidArgument("gaussian_derivative_profile: negative order");
  if (order > 2) throw UnsupportedOrder("gaussian_derivative_profile: order > 2");
  if (radius < 1) throw InvalidArgument("gaussian_derivative_profile: radius must be >= 1");

  const int n = 2 * radius + 1;
  std::vector<double> g(n);
  double gsum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double q = i - radius;
    g[i] = std::exp(-q * q / (2.0 * sigma * sigma));
    gsum += g[i];
  }
  for (double& v : g) v /= gsum;
  if (order == 0) return g;

  std::vector<double> h(n);
  if (order == 1) {
    double moment = 0.0;
    for (int i = 0; i < n; ++i) {
      const double q = i - radius;
      h[i] = -q * g[i];
      moment += q * h[i];
    }
    // Antisymmetric, so the sum is zero; scale the first moment to -1.
    for (double& v : h) v /= -moment;
    for (int i = 0; i < radius; ++i) {
      const double a = 0.5 * (h[i] - h[n - 1 - i]);
      h[i] = a;
      h[n - 1 - i] = -a;
    }
    h[radius] = 0.0;
    return h;
  }

  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double q = i - radius;
    h[i] = (q * q - sigma * sigma) * g[i];
    sum += h[i];
  }
  for (int i = 0; i < n; ++i) h[i] -= sum * g[i];
  double moment = 0.0;
  for (int i = 0; i < n; ++i) {
    const double q = i - radius;
    moment += q * q * h[i];
  }
  for (double& v : h) v *= 2.0 / moment;
  return h;
}

Kernel2D gaussian_derivative_kernel(double sigma, int order_x, int order_y, double truncation) {
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian_derivative_kernel: sigma must be positive");
  if (!(truncation > 0.0)) throw InvalidArgument("gaussian_derivative_kernel: truncation must be positive");
  if (order_x < 0 || order_y < 0) throw InvalidArgument("gaussian_derivative_kernel: negative order");
  if (order_x + order_y > 2) throw UnsupportedOrder("gaussian_derivative_kernel: combined order > 2");

  const int radius = std::max(1, static_cast<int>(std::ceil(truncation * sigma)));
  Kernel2D k;
  k.sigma = sigma;
  k.order_x = order_x;
  k.order_y = order_y;
  k.profile_x = gaussian_derivative_profile(sigma, order_x, radius);
  k.profile_y = gaussian_derivative_profile(sigma, order_y, radius);
  const int n = 2 * radius + 1;
  k.values = Image(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) k.values(i, j) = k.profile_y[i] * k.profile_x[j];
  return k;
}

int reflect_index(int i, int n) noexcept {
  if (n <= 1) return 0;
  const int period = 2 * (n - 1);
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - m;
}

Image convolve_reflective(const Image& patch, const Kernel2D& kernel) {
  if (patch.empty()) throw InvalidArgument("convolve_reflective: empty patch");
  const int rows = patch.rows();
  const int cols = patch.cols();
  const int r = kernel.radius();
  const auto& px = kernel.profile_x;
  const auto& py = kernel.profile_y;

  std::vector<int> col_idx(static_cast<std::size_t>(cols + 2 * r));
  for (int c = -r; c < cols + r; ++c) col_idx[c + r] = reflect_index(c, cols);
  std::vector<int> row_idx(static_cast<std::size_t>(rows + 2 * r));
  for (int c = -r; c < rows + r; ++c) row_idx[c + r] = reflect_index(c, rows);

  // Along x: tmp(y, x) = sum_dx patch(y, x - dx) * px[dx].
  Image tmp(rows, cols);
  for (int y = 0; y < rows; ++y) {
    const auto src = patch.row(y);
    for (int x = 0; x < cols; ++x) {
      double acc = 0.0;
      for (int dx = -r; dx <= r; ++dx) acc += src[col_idx[x - dx + r]] * px[dx + r];
      tmp(y, x) = acc;
    }
  }
  Image out(rows, cols);
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      double acc = 0.0;
      for (int dy = -r; dy <= r; ++dy) acc += tmp(row_idx[y - dy + r], x) * py[dy + r];
      out(y, x) = acc;
    }
  }
  return out;
}

Image convolve_reflective_direct(const Image& patch, const Image& kernel) {
  if (patch.empty()) throw InvalidArgument("convolve_reflective_direct: empty patch");
  if (kernel.rows() % 2 == 0 || kernel.cols() % 2 == 0)
    throw InvalidArgument("convolve_reflective_direct: kernel sides must be odd");
  const int ry = kernel.rows() / 2;
  const int rx = kernel.cols() / 2;
  Image out(patch.rows(), patch.cols());
  for (int y = 0; y < patch.rows(); ++y)
    for (int x = 0; x < patch.cols(); ++x) {
      double acc = 0.0;
      for (int dy = -ry; dy <= ry; ++dy)
        for (int dx = -rx; dx <= rx; ++dx)
          acc += patch(reflect_index(y - dy, patch.rows()), reflect_index(x - dx, patch.cols())) *
                 kernel(dy + ry, dx + rx);
      out(y, x) = acc;
    }
  return out;
}

NJetFilterBank::NJetFilterBank(std::vector<double> sigmas, int max_order, double truncation)
    : sigmas_(std::move(sigmas)) {
  if (max_order > 2) throw UnsupportedOrder("NJetFilterBank: only max_order 2 is supported");
  if (max_order != 2) throw InvalidArgument("NJetFilterBank: max_order must be 2");
  if (sigmas_.empty()) throw InvalidArgument("NJetFilterBank: no scales given");
  for (std::size_t i = 0; i < sigmas_.size(); ++i) {
    if (!(sigmas_[i] > 0.0)) throw InvalidArgument("NJetFilterBank: sigma must be positive");
    if (i > 0 && !(sigmas_[i] > sigmas_[i - 1]))
      throw InvalidArgument("NJetFilterBank: sigmas must be strictly increasing");
  }
  kernels_.reserve(sigmas_.size() * kNumDerivatives);
  for (Derivative d : kAllDerivatives) {
    const auto [ox, oy] = derivative_orders(d);
    for (double s : sigmas_) kernels_.push_back(gaussian_derivative_kernel(s, ox, oy, truncation));
  }
}

NJetResponse compute_njet(const Image& patch, const NJetFilterBank& bank) {
  NJetResponse out;
  out.num_scales = bank.num_scales();
  out.responses.reserve(static_cast<std::size_t>(bank.num_subsets()));
  for (int i = 0; i < bank.num_subsets(); ++i)
    out.responses.push_back(convolve_reflective(patch, bank.kernel(i)));
  return out;
}

NJetResponse compute_njet(const Image& patch, const std::vector<double>& sigmas, int max_order) {
  return compute_njet(patch, NJetFilterBank(sigmas, max_order));
}

Image steer_first_order(const Image& lx, const Image& ly, double theta) {
  if (!lx.same_shape(ly)) throw InvalidArgument("steer_first_order: Lx and Ly differ in shape");
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Image out(lx.rows(), lx.cols());
  auto o = out.values();
  auto a = lx.values();
  auto b = ly.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = c * a[i] + s * b[i];
  return out;
}

}  // namespace sstex
