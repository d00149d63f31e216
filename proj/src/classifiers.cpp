#include "sstex/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sstex/error.hpp"
#include "sstex/parallel.hpp"

namespace sstex {

namespace {

void check_labels(const LabeledData& data) {
  if (data.num_classes < 1) throw InvalidArgument("classifier: num_classes must be >= 1");
  if (static_cast<std::size_t>(data.X.rows()) != data.labels.size())
    throw InvalidArgument("classifier: label count differs from sample count");
  for (int l : data.labels)
    if (l < 0 || l >= data.num_classes) throw InvalidArgument("classifier: label out of range");
}

std::vector<int> class_counts(const LabeledData& data) {
  std::vector<int> counts(static_cast<std::size_t>(data.num_classes), 0);
  for (int l : data.labels) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double top = logits.maxCoeff();
  Eigen::VectorXd p = (logits.array() - top).exp().matrix();
  return p / p.sum();
}

int argmax_lowest(const Eigen::VectorXd& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = static_cast<int>(i);
  return best;
}

double log_sum_exp(std::span<const double> xs) {
  double top = -std::numeric_limits<double>::infinity();
  for (double x : xs) top = std::max(top, x);
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - top);
  return top + std::log(s);
}

}  // namespace

Eigen::MatrixXd regularize_covariance(const Eigen::MatrixXd& cov, double eta, double lambda) {
  if (cov.rows() != cov.cols()) throw InvalidArgument("regularize_covariance: matrix not square");
  const auto n = static_cast<double>(cov.rows());
  Eigen::MatrixXd out = (1.0 - eta - lambda) * cov;
  out.diagonal() += eta * cov.diagonal();
  out.diagonal().array() += lambda * cov.trace() / n;
  return out;
}

QdcModel train_qdc(const LabeledData& data, double eta, double lambda) {
  check_labels(data);
  if (data.num_classes < 2) throw InvalidArgument("train_qdc: at least 2 classes are required");
  if (!(eta >= 0.0 && lambda >= 0.0 && eta + lambda < 1.0))
    throw InvalidArgument("train_qdc: need eta, lambda >= 0 and eta + lambda < 1");
  const auto counts = class_counts(data);
  const Eigen::Index d = data.X.cols();

  QdcModel model;
  model.eta = eta;
  model.lambda = lambda;
  model.priors.resize(data.num_classes);
  model.classes.resize(static_cast<std::size_t>(data.num_classes));
  const double n = static_cast<double>(data.labels.size());

  for (int j = 0; j < data.num_classes; ++j) {
    const int nj = counts[static_cast<std::size_t>(j)];
    if (nj < 2)
      throw InsufficientData("train_qdc: class " + std::to_string(j) + " has fewer than 2 samples");
    Eigen::MatrixXd Xj(nj, d);
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < data.labels.size(); ++i)
      if (data.labels[i] == j) Xj.row(r++) = data.X.row(static_cast<Eigen::Index>(i));
    QdcClass& cls = model.classes[static_cast<std::size_t>(j)];
    cls.mean = Xj.colwise().mean().transpose();
    const Eigen::MatrixXd centered = Xj.rowwise() - cls.mean.transpose();
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(nj - 1);
    cls.covariance = regularize_covariance(cov, eta, lambda);

    Eigen::LLT<Eigen::MatrixXd> llt(cls.covariance);
    bool ok = llt.info() == Eigen::Success;
    if (ok) {
      const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
      const double lo = diag.minCoeff();
      const double hi = diag.maxCoeff();
      // Pivot ratio below ~1e-6 means condition number above ~1e12.
      ok = lo > 0.0 && lo * lo > 1e-12 * hi * hi;
    }
    if (!ok)
      throw SingularCovariance("train_qdc: covariance of class " + std::to_string(j) +
                                   " is singular; increase regularization",
                               j);
    cls.cholesky_l = llt.matrixL();
    cls.log_det = 2.0 * cls.cholesky_l.diagonal().array().log().sum();
    model.priors[j] = nj / n;
  }
  return model;
}

Eigen::VectorXd qdc_log_scores(const QdcModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.dimension()) throw InvalidArgument("qdc: dimension mismatch");
  Eigen::VectorXd s(model.num_classes());
  for (int j = 0; j < model.num_classes(); ++j) {
    const auto& cls = model.classes[static_cast<std::size_t>(j)];
    const Eigen::VectorXd z =
        cls.cholesky_l.triangularView<Eigen::Lower>().solve(x - cls.mean);
    s[j] = std::log(model.priors[j]) - 0.5 * (cls.log_det + z.squaredNorm());
  }
  return s;
}

Eigen::VectorXd qdc_confidences(const QdcModel& model, const Eigen::VectorXd& x) {
  return softmax(qdc_log_scores(model, x));
}

Eigen::MatrixXd qdc_confidences_rows(const QdcModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.dimension()) throw InvalidArgument("qdc: dimension mismatch");
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd scores(n, model.num_classes());
  for (int j = 0; j < model.num_classes(); ++j) {
    const auto& cls = model.classes[static_cast<std::size_t>(j)];
    Eigen::MatrixXd centered = (X.rowwise() - cls.mean.transpose()).transpose();
    cls.cholesky_l.triangularView<Eigen::Lower>().solveInPlace(centered);
    scores.col(j) = (std::log(model.priors[j]) - 0.5 * cls.log_det) -
                    0.5 * centered.colwise().squaredNorm().transpose().array();
  }
  Eigen::MatrixXd out(n, model.num_classes());
  for (Eigen::Index i = 0; i < n; ++i) out.row(i) = softmax(scores.row(i).transpose()).transpose();
  return out;
}

std::vector<double> default_k_grid(std::size_t n) {
  std::vector<double> grid;
  const std::size_t cap = n > 1 ? n - 1 : 1;
  for (std::size_t k = 1; k <= 25 && k <= cap; k += 2) grid.push_back(static_cast<double>(k));
  if (grid.empty()) grid.push_back(1.0);
  return grid;
}

double median_pairwise_distance(const Eigen::MatrixXd& X, Eigen::Index cap) {
  const Eigen::Index n = std::min(X.rows(), cap);
  if (n < 2) return 1.0;
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) d.push_back((X.row(i) - X.row(j)).norm());
  const std::size_t half = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(half), d.end());
  double med = d[half];
  if (d.size() % 2 == 0) {
    const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(half));
    med = 0.5 * (med + lower);
  }
  return med > 0.0 ? med : 1.0;
}

std::vector<double> default_h_grid(const Eigen::MatrixXd& X) {
  const double med = median_pairwise_distance(X);
  std::vector<double> grid(16);
  const double lo = std::log(0.05);
  const double hi = std::log(5.0);
  for (int i = 0; i < 16; ++i) grid[static_cast<std::size_t>(i)] = med * std::exp(lo + (hi - lo) * i / 15.0);
  return grid;
}

std::vector<int> neighbor_order(const Eigen::MatrixXd& X, const Eigen::VectorXd& x) {
  const Eigen::VectorXd dist = (X.rowwise() - x.transpose()).rowwise().squaredNorm();
  std::vector<int> idx(static_cast<std::size_t>(X.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return dist[a] < dist[b]; });
  return idx;
}

namespace {

// Vote fractions among the first k entries of `order`, skipping `skip`.
Eigen::VectorXd knn_votes(const std::vector<int>& labels, int num_classes, const std::vector<int>& order,
                          int k, int skip) {
  Eigen::VectorXd votes = Eigen::VectorXd::Zero(num_classes);
  int taken = 0;
  for (int idx : order) {
    if (idx == skip) continue;
    if (taken == k) break;
    votes[labels[static_cast<std::size_t>(idx)]] += 1.0;
    ++taken;
  }
  if (taken > 0) votes /= taken;
  return votes;
}

// Per-class log of sum_i exp(-|x - x_i|^2 / 2h^2), skipping `skip`.
Eigen::VectorXd parzen_log_mass(const std::vector<int>& labels, int num_classes,
                                const Eigen::VectorXd& sq_dist, double h, int skip) {
  std::vector<std::vector<double>> terms(static_cast<std::size_t>(num_classes));
  for (Eigen::Index i = 0; i < sq_dist.size(); ++i) {
    if (i == skip) continue;
    terms[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(-sq_dist[i] / (2.0 * h * h));
  }
  Eigen::VectorXd out(num_classes);
  for (int j = 0; j < num_classes; ++j) out[j] = log_sum_exp(terms[static_cast<std::size_t>(j)]);
  return out;
}

Eigen::VectorXd parzen_confidences_from(const Eigen::VectorXd& log_mass) {
  if (!std::isfinite(log_mass.maxCoeff()))
    return Eigen::VectorXd::Constant(log_mass.size(), 1.0 / static_cast<double>(log_mass.size()));
  return softmax(log_mass);
}

}  // namespace

NeighborModel train_neighbor(const LabeledData& data, NeighborMode mode, std::vector<double> grid) {
  check_labels(data);
  const auto counts = class_counts(data);
  for (std::size_t j = 0; j < counts.size(); ++j)
    if (counts[j] < 1) throw InsufficientData("train_neighbor: class " + std::to_string(j) + " is empty");

  NeighborModel model;
  model.X = data.X;
  model.labels = data.labels;
  model.num_classes = data.num_classes;
  model.mode = mode;
  const auto n = static_cast<std::size_t>(data.X.rows());

  if (mode == NeighborMode::nn1) {
    model.k = 1;
    return model;
  }
  if (grid.empty()) grid = mode == NeighborMode::knn ? default_k_grid(n) : default_h_grid(data.X);
  for (double g : grid)
    if (!(g > 0.0)) throw InvalidArgument("train_neighbor: grid values must be positive");
  if (mode == NeighborMode::knn)
    for (double& g : grid) g = std::max(1.0, std::min(std::round(g), static_cast<double>(std::max<std::size_t>(n - 1, 1))));
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  model.grid = sorted;

  // mistakes[i][g]: 1 when point i is misclassified by candidate g.
  std::vector<std::vector<char>> mistakes(n, std::vector<char>(sorted.size(), 0));
  parallel_for(static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t p) {
    const auto i = static_cast<std::size_t>(p);
    const Eigen::VectorXd x = data.X.row(p).transpose();
    if (mode == NeighborMode::knn) {
      const auto order = neighbor_order(data.X, x);
      for (std::size_t g = 0; g < sorted.size(); ++g) {
        const auto votes = knn_votes(data.labels, data.num_classes, order, static_cast<int>(sorted[g]),
                                     static_cast<int>(p));
        mistakes[i][g] = argmax_lowest(votes) != data.labels[i];
      }
    } else {
      const Eigen::VectorXd sq = (data.X.rowwise() - x.transpose()).rowwise().squaredNorm();
      for (std::size_t g = 0; g < sorted.size(); ++g) {
        const auto conf = parzen_confidences_from(
            parzen_log_mass(data.labels, data.num_classes, sq, sorted[g], static_cast<int>(p)));
        mistakes[i][g] = argmax_lowest(conf) != data.labels[i];
      }
    }
  });

  model.loo_errors.assign(sorted.size(), 0.0);
  for (const auto& row : mistakes)
    for (std::size_t g = 0; g < sorted.size(); ++g) model.loo_errors[g] += row[g];
  for (double& e : model.loo_errors) e /= static_cast<double>(n);
  const auto best = static_cast<std::size_t>(
      std::min_element(model.loo_errors.begin(), model.loo_errors.end()) - model.loo_errors.begin());
  if (mode == NeighborMode::knn)
    model.k = static_cast<int>(sorted[best]);
  else
    model.h = sorted[best];
  return model;
}

Eigen::VectorXd neighbor_confidences(const NeighborModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.X.cols()) throw InvalidArgument("neighbor_confidences: dimension mismatch");
  if (model.mode == NeighborMode::parzen) {
    const Eigen::VectorXd sq = (model.X.rowwise() - x.transpose()).rowwise().squaredNorm();
    return parzen_confidences_from(parzen_log_mass(model.labels, model.num_classes, sq, model.h, -1));
  }
  const int k = model.mode == NeighborMode::nn1 ? 1 : model.k;
  return knn_votes(model.labels, model.num_classes, neighbor_order(model.X, x), k, -1);
}

Eigen::MatrixXd neighbor_confidences_rows(const NeighborModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.X.cols()) throw InvalidArgument("neighbor_confidences: dimension mismatch");
  Eigen::MatrixXd out(X.rows(), model.num_classes);
  parallel_for(X.rows(), [&](std::ptrdiff_t i) {
    out.row(i) = neighbor_confidences(model, X.row(i).transpose()).transpose();
  });
  return out;
}

}  // namespace sstex
