#include "sstex/pca.hpp"

#include <algorithm>
#include <cmath>

#include "sstex/error.hpp"

namespace sstex {

Eigen::Index retained_count(const Eigen::VectorXd& ev, double fraction) {
  if (ev.size() == 0) return 0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) total += std::max(ev[i], 0.0);
  if (!(total > 0.0)) return 1;
  // Relative slack of 1e-12 absorbs rounding in the cumulative sum, so that
  // rank-deficient data at fraction 1 stops at the rank.
  const double goal = fraction * total - 1e-12 * total;
  double cum = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    cum += std::max(ev[i], 0.0);
    if (cum >= goal) return i + 1;
  }
  return ev.size();
}

namespace {

void fix_signs(Eigen::MatrixXd& rows) {
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      const double a = std::abs(rows(r, c));
      if (a > best) {
        best = a;
        arg = c;
      }
    }
    if (rows(r, arg) < 0.0) rows.row(r) *= -1.0;
  }
}

// Eigen returns ascending order; flip to descending.
void descending(Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  values.reverseInPlace();
  vectors = vectors.rowwise().reverse().eval();
}

}  // namespace

PcaModel fit_pca(const Eigen::MatrixXd& samples, double retained_fraction, PcaRoute route) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  if (n < 2) throw InsufficientData("fit_pca: at least 2 samples are required");
  if (d < 1) throw InvalidArgument("fit_pca: samples have zero dimension");
  if (!(retained_fraction > 0.0 && retained_fraction <= 1.0))
    throw InvalidArgument("fit_pca: retained fraction must lie in (0, 1]");

  PcaModel model;
  model.target_fraction = retained_fraction;
  model.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - model.mean.transpose();
  const double denom = static_cast<double>(n - 1);

  if (route == PcaRoute::automatic) route = n < d ? PcaRoute::gram : PcaRoute::covariance;

  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // d x r, columns are principal axes
  if (route == PcaRoute::covariance) {
    Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw Error("fit_pca: eigendecomposition failed");
    values = es.eigenvalues();
    vectors = es.eigenvectors();
    descending(values, vectors);
  } else {
    Eigen::MatrixXd gram = (centered * centered.transpose()) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    if (es.info() != Eigen::Success) throw Error("fit_pca: eigendecomposition failed");
    values = es.eigenvalues();
    Eigen::MatrixXd a = es.eigenvectors();
    descending(values, a);
    vectors = centered.transpose() * a;  // columns scaled by sqrt(lambda * (n-1))
  }

  const Eigen::Index cap = std::min(d, n - 1);
  Eigen::VectorXd usable = values.head(std::min<Eigen::Index>(values.size(), cap));
  for (Eigen::Index i = 0; i < usable.size(); ++i) usable[i] = std::max(usable[i], 0.0);
  model.total_variance = std::max(0.0, values.cwiseMax(0.0).sum());
  Eigen::Index k = retained_count(usable, retained_fraction);
  k = std::clamp<Eigen::Index>(k, 1, cap);

  model.eigenvalues = usable.head(k);
  model.components = vectors.leftCols(k).transpose();
  if (route == PcaRoute::gram) {
    for (Eigen::Index i = 0; i < k; ++i) {
      const double norm = model.components.row(i).norm();
      if (norm > 0.0) model.components.row(i) /= norm;
    }
  }
  fix_signs(model.components);
  model.retained_fraction =
      model.total_variance > 0.0 ? std::min(1.0, model.eigenvalues.sum() / model.total_variance) : 1.0;
  return model;
}

Eigen::VectorXd pca_transform(const PcaModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.input_dimension()) throw InvalidArgument("pca_transform: dimension mismatch");
  return model.components * (x - model.mean);
}

Eigen::MatrixXd pca_transform_rows(const PcaModel& model, const Eigen::MatrixXd& samples) {
  if (samples.cols() != model.input_dimension())
    throw InvalidArgument("pca_transform_rows: dimension mismatch");
  return (samples.rowwise() - model.mean.transpose()) * model.components.transpose();
}

}  // namespace sstex
