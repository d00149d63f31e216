#pragma once

// Base classifiers producing per-class confidences that sum to one:
// regularized quadratic discriminant, k-NN, Parzen and plain 1-NN.

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sstex {

/// Rows of X are samples; labels are in [0, num_classes).
struct LabeledData {
  Eigen::MatrixXd X;
  std::vector<int> labels;
  int num_classes = 0;
};

/// (1 - eta - lambda) S + eta diag(S) + lambda tr(S)/n I.
Eigen::MatrixXd regularize_covariance(const Eigen::MatrixXd& cov, double eta, double lambda);

struct QdcClass {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // regularized
  Eigen::MatrixXd cholesky_l;  // covariance = L L^T
  double log_det = 0.0;
};

struct QdcModel {
  std::vector<QdcClass> classes;
  Eigen::VectorXd priors;
  double eta = 0.0;
  double lambda = 0.0;

  int num_classes() const noexcept { return static_cast<int>(classes.size()); }
  Eigen::Index dimension() const noexcept { return classes.empty() ? 0 : classes.front().mean.size(); }
};

/// Throws InsufficientData for a class with < 2 samples and
/// SingularCovariance when a regularized covariance does not factorize.
QdcModel train_qdc(const LabeledData& data, double eta = 0.0, double lambda = 0.0);

/// Class log-scores log prior - (log det + Mahalanobis^2) / 2.
Eigen::VectorXd qdc_log_scores(const QdcModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd qdc_confidences(const QdcModel& model, const Eigen::VectorXd& x);
/// n x c confidences for the rows of X.
Eigen::MatrixXd qdc_confidences_rows(const QdcModel& model, const Eigen::MatrixXd& X);

enum class NeighborMode { knn, parzen, nn1 };

struct NeighborModel {
  Eigen::MatrixXd X;
  std::vector<int> labels;
  int num_classes = 0;
  NeighborMode mode = NeighborMode::knn;
  int k = 1;
  double h = 1.0;
  std::vector<double> grid;        // candidates that were tried
  std::vector<double> loo_errors;  // leave-one-out error per candidate
};

/// Odd k in {1, 3, ..., 25} capped at n - 1 (at least {1}).
std::vector<double> default_k_grid(std::size_t n);
/// 16 geometric values over [0.05, 5] x median pairwise distance.
std::vector<double> default_h_grid(const Eigen::MatrixXd& X);
/// Median Euclidean distance over all pairs of the first `cap` rows.
double median_pairwise_distance(const Eigen::MatrixXd& X, Eigen::Index cap = 2000);

/// Picks k (knn) or h (parzen) by leave-one-out error, ties to the smallest
/// candidate. An empty grid selects the default grid. nn1 fixes k = 1.
NeighborModel train_neighbor(const LabeledData& data, NeighborMode mode,
                             std::vector<double> grid = {});

Eigen::VectorXd neighbor_confidences(const NeighborModel& model, const Eigen::VectorXd& x);
Eigen::MatrixXd neighbor_confidences_rows(const NeighborModel& model, const Eigen::MatrixXd& X);

/// Training indices ordered by (distance, index).
std::vector<int> neighbor_order(const Eigen::MatrixXd& X, const Eigen::VectorXd& x);

}  // namespace sstex
