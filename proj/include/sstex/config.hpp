#pragma once

// Experiment configuration: a nested JSON document whose keys are the
// field names below. Every key can also be set by a same-named command-line
// flag, with dots for nesting (e.g. --combiner.topology).

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sstex/combiners.hpp"

namespace sstex {

struct Regularization {
  double eta = 0.0;
  double lambda = 0.0;
  friend bool operator==(const Regularization&, const Regularization&) = default;
};

enum class BaseClassifier { qdc, knn, parzen };
std::string_view base_classifier_name(BaseClassifier b);
BaseClassifier parse_base_classifier(std::string_view s);

struct SyntheticSpec {
  std::string recipe = "four_class";
  int size = 640;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  std::vector<std::string> class_image_paths;  // empty: use `synthetic`
  SyntheticSpec synthetic;
  std::vector<double> sigmas;  // default sqrt of {1, 4, 7}
  int patch_size = 32;
  int patch_stride = 10;
  std::vector<int> crop_sizes = {18, 24, 30};
  std::vector<int> subsample_strides = {1, 1, 1};
  double pca_fraction = 0.95;
  std::vector<Regularization> regularization = {{0.01, 0.01}, {0.0, 0.0}, {0.0, 0.0}};
  BaseClassifier base_classifier = BaseClassifier::qdc;
  CombinerSpec combiner;
  std::vector<int> training_sizes = {10, 20, 40, 60, 100, 150, 200, 300, 500, 700, 1000, 1500};
  int test_size = 900;
  int repetitions = 5;
  std::uint64_t rng_seed = 1;
  // When > 0, a QDC whose covariance is singular is retrained once with this
  // much extra lambda instead of failing the repetition.
  double singular_retry_lambda = 0.0;

  ExperimentConfig();
};

/// Structural checks that do not need the dataset. Throws InvalidArgument.
void validate(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Sets a dotted key in a config document. The value is read as JSON when it
/// parses, as a comma-separated list when it contains commas, and as a
/// string otherwise.
void apply_override(nlohmann::json& doc, std::string_view dotted_key, std::string_view value);

/// Dotted names of every configurable field.
std::vector<std::string> config_keys();

}  // namespace sstex
