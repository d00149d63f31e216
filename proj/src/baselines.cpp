#include "sstex/baselines.hpp"

#include <cmath>
#include <string>

#include "sstex/classifiers.hpp"
#include "sstex/combiners.hpp"
#include "sstex/error.hpp"
#include "sstex/parallel.hpp"

namespace sstex {

Moments histogram_moments(std::span<const double> v) {
  if (v.empty()) throw InvalidArgument("histogram_moments: empty sample");
  const double n = static_cast<double>(v.size());
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = x - m.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m.std_dev = std::sqrt(m2);
  if (m2 > 0.0) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.kurtosis = m4 / (m2 * m2);
  }
  return m;
}

std::vector<double> mh_features(const Image& patch, const SubsetFeatureExtractor& extractor) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(4 * extractor.num_subsets()));
  for (const auto& subset : extractor.features(patch)) {
    const Moments m = histogram_moments(subset);
    out.insert(out.end(), {m.mean, m.std_dev, m.skewness, m.kurtosis});
  }
  return out;
}

void zscore_in_place(Eigen::MatrixXd& train, Eigen::MatrixXd& test) {
  if (train.cols() != test.cols()) throw InvalidArgument("zscore: column mismatch");
  const Eigen::RowVectorXd mu = train.colwise().mean();
  const Eigen::RowVectorXd var = (train.rowwise() - mu).colwise().squaredNorm() / static_cast<double>(train.rows());
  for (Eigen::Index j = 0; j < train.cols(); ++j) {
    const double sd = std::sqrt(var[j]);
    if (sd > 0.0) {
      train.col(j) = (train.col(j).array() - mu[j]) / sd;
      test.col(j) = (test.col(j).array() - mu[j]) / sd;
    } else {
      train.col(j).setZero();
      test.col(j).setZero();
    }
  }
}

namespace {

Eigen::MatrixXd mh_matrix(const std::vector<Image>& patches, const SubsetFeatureExtractor& extractor) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(patches.size()), 4 * extractor.num_subsets());
  parallel_for(static_cast<std::ptrdiff_t>(patches.size()), [&](std::ptrdiff_t i) {
    const auto f = mh_features(patches[static_cast<std::size_t>(i)], extractor);
    out.row(i) = Eigen::Map<const Eigen::RowVectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
  });
  return out;
}

}  // namespace

double mh_run_once(const Dataset& data, const ExperimentConfig& config, int training_size, std::uint64_t seed) {
  validate(config);
  const Split split = draw_split(data, training_size, config.test_size, seed);
  if (data.num_classes() == 1) return 0.0;
  const SubsetFeatureExtractor extractor(NJetFilterBank(config.sigmas),
                                         CropLayout{config.crop_sizes, config.subsample_strides});
  Eigen::MatrixXd train = mh_matrix(gather_patches(data, split.train), extractor);
  Eigen::MatrixXd test = mh_matrix(gather_patches(data, split.test), extractor);
  zscore_in_place(train, test);
  const auto model = train_neighbor({train, labels_of(split.train), data.num_classes()}, NeighborMode::nn1);
  const auto conf = neighbor_confidences_rows(model, test);
  const auto truth = labels_of(split.test);
  std::size_t wrong = 0;
  for (Eigen::Index i = 0; i < conf.rows(); ++i)
    wrong += argmax_class(conf.row(i).transpose()) != truth[static_cast<std::size_t>(i)];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

LearningCurve mh_baseline(const Dataset& data, const ExperimentConfig& config) {
  validate(config);
  check_sizes(data, config);
  LearningCurve curve{"mh", config.training_sizes, {}};
  for (int size : config.training_sizes) {
    std::vector<double> reps;
    for (int r = 0; r < config.repetitions; ++r)
      reps.push_back(mh_run_once(data, config, size, repetition_seed(config.rng_seed, size, r)));
    curve.errors.push_back(std::move(reps));
  }
  return curve;
}

CfsFusion parse_cfs_fusion(std::string_view s) {
  for (auto f : {CfsFusion::all, CfsFusion::per_derivative, CfsFusion::per_scale})
    if (cfs_fusion_name(f) == s) return f;
  throw InvalidArgument("unknown CFS fusion '" + std::string(s) + "'");
}

std::string_view cfs_fusion_name(CfsFusion f) {
  switch (f) {
    case CfsFusion::all: return "all";
    case CfsFusion::per_derivative: return "per_derivative";
    case CfsFusion::per_scale: return "per_scale";
  }
  return "?";
}

CurveSet cfs_baseline(const Dataset& data, const ExperimentConfig& config, CfsFusion fusion,
                      const CurveProgress& progress) {
  ExperimentConfig fused = config;
  switch (fusion) {
    case CfsFusion::all: fused.combiner.topology = Topology::fuse_all; break;
    case CfsFusion::per_derivative: fused.combiner.topology = Topology::fuse_scales_then_combine; break;
    case CfsFusion::per_scale: fused.combiner.topology = Topology::fuse_derivatives_then_combine; break;
  }
  if (fused.combiner.rule_stage2 == Rule::vote && fusion == CfsFusion::all) fused.combiner.rule_stage2 = Rule::mean;
  CurveSet out = run_learning_curve(data, fused, progress);
  out.combined.name = "cfs_" + std::string(cfs_fusion_name(fusion));
  return out;
}

}  // namespace sstex
