#pragma once

// Reference approaches the combined classifier is compared against.

#include <span>
#include <string_view>

#include "sstex/pipeline.hpp"

namespace sstex {

struct Moments {
  double mean = 0.0;
  double std_dev = 0.0;   // population
  double skewness = 0.0;  // m3 / m2^1.5, 0 for constant input
  double kurtosis = 0.0;  // m4 / m2^2 (not excess), 0 for constant input
};

Moments histogram_moments(std::span<const double> values);

/// Four moments of every cropped (derivative, scale) response, concatenated
/// in subset order: length 4 * nd * ns.
std::vector<double> mh_features(const Image& standardized_patch, const SubsetFeatureExtractor& extractor);

/// Z-scores columns with training statistics; zero-variance columns become 0.
void zscore_in_place(Eigen::MatrixXd& train, Eigen::MatrixXd& test);

double mh_run_once(const Dataset& data, const ExperimentConfig& config, int training_size, std::uint64_t seed);
LearningCurve mh_baseline(const Dataset& data, const ExperimentConfig& config);

enum class CfsFusion { all, per_derivative, per_scale };
CfsFusion parse_cfs_fusion(std::string_view s);
std::string_view cfs_fusion_name(CfsFusion f);

/// The same pipeline with features concatenated before classification:
/// `all` feeds one classifier, the others one classifier per group whose
/// outputs go through combiner.rule_stage2.
CurveSet cfs_baseline(const Dataset& data, const ExperimentConfig& config, CfsFusion fusion,
                      const CurveProgress& progress = {});

}  // namespace sstex
