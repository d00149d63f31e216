#pragma once

// Per-subset principal component analysis with a retained-variance rule.

#include <Eigen/Dense>

namespace sstex {

struct PcaModel {
  Eigen::VectorXd mean;         // length d
  Eigen::MatrixXd components;   // k x d, orthonormal rows, descending eigenvalue
  Eigen::VectorXd eigenvalues;  // length k, nonincreasing
  double target_fraction = 0.95;
  double retained_fraction = 1.0;  // achieved: sum of kept / total variance
  double total_variance = 0.0;

  Eigen::Index input_dimension() const noexcept { return mean.size(); }
  Eigen::Index output_dimension() const noexcept { return components.rows(); }
};

enum class PcaRoute {
  automatic,   // Gram route when samples < dimension, covariance route otherwise
  covariance,  // d x d sample covariance
  gram,        // n x n centered Gram matrix
};

/// Fits on the rows of `samples` (n x d). Covariance uses n - 1. Keeps the
/// smallest k with cumulative fraction >= retained_fraction, k <= min(d, n-1).
/// Each component's largest-magnitude entry is positive.
PcaModel fit_pca(const Eigen::MatrixXd& samples, double retained_fraction,
                 PcaRoute route = PcaRoute::automatic);

/// Smallest k whose leading eigenvalues (sorted descending, clipped at 0)
/// reach `fraction` of the total; exact ties pick the smaller k.
Eigen::Index retained_count(const Eigen::VectorXd& descending_eigenvalues, double fraction);

Eigen::VectorXd pca_transform(const PcaModel& model, const Eigen::VectorXd& x);
/// Row-wise transform of an n x d matrix into n x k.
Eigen::MatrixXd pca_transform_rows(const PcaModel& model, const Eigen::MatrixXd& samples);

}  // namespace sstex
