#pragma once

// End-to-end experiment engine: patch pools per class, random train/test
// draws, per-subset PCA and base classifiers, combining, learning curves.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sstex/config.hpp"
#include "sstex/image.hpp"
#include "sstex/patching.hpp"

namespace sstex {

struct ClassPool {
  std::string name;
  Image upper;  // training half
  Image lower;  // test half
  std::vector<Origin> upper_origins;
  std::vector<Origin> lower_origins;
};

class Dataset {
 public:
  Dataset(const std::vector<Image>& class_images, std::vector<std::string> names, int patch_size, int stride);

  int num_classes() const noexcept { return static_cast<int>(classes_.size()); }
  int patch_size() const noexcept { return patch_size_; }
  const ClassPool& pool(int cls) const { return classes_.at(static_cast<std::size_t>(cls)); }
  /// Smallest pool size over classes and halves.
  int min_pool(Half half) const;
  /// Raw (unstandardized) patch.
  Image patch(int cls, Half half, int index) const;

 private:
  std::vector<ClassPool> classes_;
  int patch_size_;
};

/// Loads config.class_image_paths, or renders the synthetic recipe.
Dataset load_dataset(const ExperimentConfig& config);

struct SampleRef {
  int cls = 0;
  Half half = Half::upper;
  int index = 0;  // into the pool's origin list
};

struct Split {
  std::vector<SampleRef> train;
  std::vector<SampleRef> test;
};

/// Per class: shuffle the upper pool and take `training_size`; shuffle the
/// lower pool and take this class's share of `test_size` (even split,
/// remainder to the lowest class indices).
Split draw_split(const Dataset& data, int training_size, int test_size, std::uint64_t seed);

/// Standardized patches for the given references.
std::vector<Image> gather_patches(const Dataset& data, const std::vector<SampleRef>& refs);
std::vector<int> labels_of(const std::vector<SampleRef>& refs);

/// Subset-index groups forming the feature sets given to base classifiers.
std::vector<std::vector<int>> classifier_groups(Topology topology, int ns, int nd);
/// Regularization of a group: elementwise max over its members' scales.
Regularization group_regularization(const ExperimentConfig& config, const std::vector<int>& group, int ns);

struct RunResult {
  double error = 0.0;
  std::vector<std::string> classifier_names;
  std::vector<double> classifier_errors;  // one per base classifier
  std::vector<std::string> group_names;
  std::vector<double> group_errors;  // stage-1 groups of two-stage topologies
  std::vector<int> pca_dimensions;   // per subset
  bool singular = false;
  std::string warning;
};

RunResult run_pipeline_once(const Dataset& data, const ExperimentConfig& config, int training_size,
                            std::uint64_t seed);

struct LearningCurve {
  std::string name;
  std::vector<int> sizes;
  std::vector<std::vector<double>> errors;  // [size][repetition]

  double mean(std::size_t i) const;
  double std_dev(std::size_t i) const;  // n - 1 denominator; 0 for one repetition
};

struct CurveSet {
  LearningCurve combined;
  std::vector<LearningCurve> classifiers;
  std::vector<LearningCurve> groups;
  std::vector<std::string> warnings;
};

std::uint64_t repetition_seed(std::uint64_t master, int training_size, int repetition);

/// Checks sizes against pools and throws InvalidArgument when exceeded.
void check_sizes(const Dataset& data, const ExperimentConfig& config);

/// Called after each (size, repetition) point, in order.
using CurveProgress = std::function<void(int training_size, int repetition, const RunResult&)>;

CurveSet run_learning_curve(const Dataset& data, const ExperimentConfig& config, const CurveProgress& progress = {});
CurveSet run_learning_curve(const ExperimentConfig& config, const CurveProgress& progress = {});

}  // namespace sstex
