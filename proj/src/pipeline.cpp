#include "sstex/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "sstex/classifiers.hpp"
#include "sstex/combiners.hpp"
#include "sstex/error.hpp"
#include "sstex/image_io.hpp"
#include "sstex/parallel.hpp"
#include "sstex/pca.hpp"
#include "sstex/random.hpp"
#include "sstex/synth.hpp"

namespace sstex {

Dataset::Dataset(const std::vector<Image>& class_images, std::vector<std::string> names, int patch_size, int stride)
    : patch_size_(patch_size) {
  if (class_images.empty()) throw InvalidArgument("Dataset: no class images");
  names.resize(class_images.size());
  for (std::size_t i = 0; i < class_images.size(); ++i) {
    ClassPool pool;
    pool.name = names[i].empty() ? "class_" + std::to_string(i) : names[i];
    std::tie(pool.upper, pool.lower) = split_halves(class_images[i]);
    const auto positions = [&](const Image& half) {
      std::vector<Origin> out;
      const int nr = patch_positions(half.rows(), patch_size, stride);
      const int nc = patch_positions(half.cols(), patch_size, stride);
      if (nr == 0 || nc == 0)
        throw InvalidArgument("Dataset: image half of " + pool.name + " is smaller than the patch size");
      for (int r = 0; r < nr; ++r)
        for (int c = 0; c < nc; ++c) out.push_back({r * stride, c * stride});
      return out;
    };
    pool.upper_origins = positions(pool.upper);
    pool.lower_origins = positions(pool.lower);
    classes_.push_back(std::move(pool));
  }
}

int Dataset::min_pool(Half half) const {
  int m = std::numeric_limits<int>::max();
  for (const auto& p : classes_)
    m = std::min(m, static_cast<int>(half == Half::upper ? p.upper_origins.size() : p.lower_origins.size()));
  return m;
}

Image Dataset::patch(int cls, Half half, int index) const {
  const auto& p = pool(cls);
  const auto& origins = half == Half::upper ? p.upper_origins : p.lower_origins;
  const Origin o = origins.at(static_cast<std::size_t>(index));
  return (half == Half::upper ? p.upper : p.lower).crop(o.row, o.col, patch_size_, patch_size_);
}

Dataset load_dataset(const ExperimentConfig& config) {
  std::vector<Image> images;
  std::vector<std::string> names;
  if (config.class_image_paths.empty()) {
    images = synth_recipe(config.synthetic.recipe, config.synthetic.size, config.synthetic.seed, &names);
  } else {
    for (const auto& p : config.class_image_paths) {
      images.push_back(load_grayscale(p));
      names.push_back(std::filesystem::path(p).stem().string());
    }
  }
  return Dataset(images, names, config.patch_size, config.patch_stride);
}

Split draw_split(const Dataset& data, int training_size, int test_size, std::uint64_t seed) {
  const int c = data.num_classes();
  Split split;
  Rng rng(seed);
  for (int j = 0; j < c; ++j) {
    const auto& pool = data.pool(j);
    const int share = test_size / c + (j < test_size % c ? 1 : 0);
    if (training_size > static_cast<int>(pool.upper_origins.size()) || share > static_cast<int>(pool.lower_origins.size()))
      throw InvalidArgument("draw_split: requested sizes exceed the patch pool of " + pool.name);
    const auto up = rng.permutation(static_cast<int>(pool.upper_origins.size()));
    const auto lo = rng.permutation(static_cast<int>(pool.lower_origins.size()));
    for (int i = 0; i < training_size; ++i) split.train.push_back({j, Half::upper, up[static_cast<std::size_t>(i)]});
    for (int i = 0; i < share; ++i) split.test.push_back({j, Half::lower, lo[static_cast<std::size_t>(i)]});
  }
  return split;
}

std::vector<Image> gather_patches(const Dataset& data, const std::vector<SampleRef>& refs) {
  std::vector<Image> out(refs.size());
  parallel_for(static_cast<std::ptrdiff_t>(refs.size()), [&](std::ptrdiff_t i) {
    const auto& r = refs[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = preprocess_patch(data.patch(r.cls, r.half, r.index)).patch;
  });
  return out;
}

std::vector<int> labels_of(const std::vector<SampleRef>& refs) {
  std::vector<int> out;
  out.reserve(refs.size());
  for (const auto& r : refs) out.push_back(r.cls);
  return out;
}

std::vector<std::vector<int>> classifier_groups(Topology topology, int ns, int nd) {
  std::vector<std::vector<int>> groups;
  switch (topology) {
    case Topology::one_stage:
    case Topology::scales_then_derivatives:
    case Topology::derivatives_then_scales:
      for (int i = 0; i < ns * nd; ++i) groups.push_back({i});
      break;
    case Topology::fuse_scales_then_combine:
      for (int k = 0; k < nd; ++k) {
        groups.emplace_back();
        for (int s = 0; s < ns; ++s) groups.back().push_back(k * ns + s);
      }
      break;
    case Topology::fuse_derivatives_then_combine:
      for (int s = 0; s < ns; ++s) {
        groups.emplace_back();
        for (int k = 0; k < nd; ++k) groups.back().push_back(k * ns + s);
      }
      break;
    case Topology::fuse_all:
      groups.emplace_back();
      for (int i = 0; i < ns * nd; ++i) groups.back().push_back(i);
      break;
  }
  return groups;
}

Regularization group_regularization(const ExperimentConfig& config, const std::vector<int>& group, int ns) {
  Regularization r;
  for (int i : group) {
    const auto& s = config.regularization.at(static_cast<std::size_t>(i % ns));
    r.eta = std::max(r.eta, s.eta);
    r.lambda = std::max(r.lambda, s.lambda);
  }
  return r;
}

namespace {

std::string scale_name(int s) { return "S" + std::to_string(s + 1); }

std::string subset_name(int subset, int ns) {
  return std::string(derivative_name(static_cast<Derivative>(subset / ns))) + "_" + scale_name(subset % ns);
}

std::string group_name(Topology t, const std::vector<int>& group, int ns) {
  switch (t) {
    case Topology::fuse_scales_then_combine:
      return std::string(derivative_name(static_cast<Derivative>(group.front() / ns)));
    case Topology::fuse_derivatives_then_combine: return scale_name(group.front() % ns);
    case Topology::fuse_all: return "all";
    default: return subset_name(group.front(), ns);
  }
}

// Rows of the decision profile layout used by each topology.
std::pair<int, int> profile_shape(Topology t, int ns, int nd) {
  switch (t) {
    case Topology::fuse_scales_then_combine: return {1, nd};
    case Topology::fuse_derivatives_then_combine: return {ns, 1};
    case Topology::fuse_all: return {1, 1};
    default: return {ns, nd};
  }
}

Eigen::MatrixXd concat_columns(const std::vector<Eigen::MatrixXd>& blocks, const std::vector<int>& group) {
  Eigen::Index cols = 0;
  for (int i : group) cols += blocks[static_cast<std::size_t>(i)].cols();
  Eigen::MatrixXd out(blocks[static_cast<std::size_t>(group.front())].rows(), cols);
  Eigen::Index at = 0;
  for (int i : group) {
    const auto& b = blocks[static_cast<std::size_t>(i)];
    out.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  return out;
}

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth) {
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i];
  return truth.empty() ? 0.0 : static_cast<double>(wrong) / static_cast<double>(truth.size());
}

std::vector<int> row_argmax(const Eigen::MatrixXd& conf) {
  std::vector<int> out(static_cast<std::size_t>(conf.rows()));
  for (Eigen::Index i = 0; i < conf.rows(); ++i) out[static_cast<std::size_t>(i)] = argmax_class(conf.row(i).transpose());
  return out;
}

struct TrainedGroup {
  Eigen::MatrixXd test_conf;
  Eigen::MatrixXd train_conf;
  std::optional<std::string> failure;
};

TrainedGroup train_group(const ExperimentConfig& config, const LabeledData& train, const Eigen::MatrixXd& test,
                         Regularization reg, bool need_train_conf) {
  TrainedGroup out;
  if (config.base_classifier == BaseClassifier::qdc) {
    std::optional<QdcModel> model;
    try {
      model = train_qdc(train, reg.eta, reg.lambda);
    } catch (const SingularCovariance& e) {
      if (config.singular_retry_lambda > 0.0) {
        const double lambda = std::min(reg.lambda + config.singular_retry_lambda, 0.999 - reg.eta);
        try {
          model = train_qdc(train, reg.eta, lambda);
        } catch (const SingularCovariance& e2) {
          out.failure = e2.what();
          return out;
        }
      } else {
        out.failure = e.what();
        return out;
      }
    }
    out.test_conf = qdc_confidences_rows(*model, test);
    if (need_train_conf) out.train_conf = qdc_confidences_rows(*model, train.X);
  } else {
    const auto mode = config.base_classifier == BaseClassifier::knn ? NeighborMode::knn : NeighborMode::parzen;
    const auto model = train_neighbor(train, mode);
    out.test_conf = neighbor_confidences_rows(model, test);
    if (need_train_conf) out.train_conf = neighbor_confidences_rows(model, train.X);
  }
  return out;
}

}  // namespace

RunResult run_pipeline_once(const Dataset& data, const ExperimentConfig& config, int training_size,
                            std::uint64_t seed) {
  validate(config);
  const int c = data.num_classes();
  const int ns = static_cast<int>(config.sigmas.size());
  const int nd = kNumDerivatives;
  const Topology topology = config.combiner.topology;
  const auto groups = classifier_groups(topology, ns, nd);

  RunResult result;
  for (const auto& g : groups) result.classifier_names.push_back(group_name(topology, g, ns));
  const bool two_stage =
      topology == Topology::scales_then_derivatives || topology == Topology::derivatives_then_scales;
  if (two_stage) {
    if (topology == Topology::scales_then_derivatives)
      for (int k = 0; k < nd; ++k) result.group_names.emplace_back(derivative_name(static_cast<Derivative>(k)));
    else
      for (int s = 0; s < ns; ++s) result.group_names.push_back(scale_name(s));
  }

  const Split split = draw_split(data, training_size, config.test_size, seed);
  const auto train_labels = labels_of(split.train);
  const auto test_labels = labels_of(split.test);
  if (c == 1) {
    // Every prediction is the only class.
    result.classifier_errors.assign(groups.size(), 0.0);
    result.group_errors.assign(result.group_names.size(), 0.0);
    return result;
  }

  const SubsetFeatureExtractor extractor(NJetFilterBank(config.sigmas),
                                         CropLayout{config.crop_sizes, config.subsample_strides});
  const auto train_raw = extractor.extract(gather_patches(data, split.train));
  const auto test_raw = extractor.extract(gather_patches(data, split.test));

  const auto m = static_cast<std::size_t>(extractor.num_subsets());
  std::vector<Eigen::MatrixXd> train_red(m), test_red(m);
  result.pca_dimensions.assign(m, 0);
  parallel_for(static_cast<std::ptrdiff_t>(m), [&](std::ptrdiff_t i) {
    const auto u = static_cast<std::size_t>(i);
    const PcaModel pca = fit_pca(train_raw[u], config.pca_fraction);
    train_red[u] = pca_transform_rows(pca, train_raw[u]);
    test_red[u] = pca_transform_rows(pca, test_raw[u]);
    result.pca_dimensions[u] = static_cast<int>(pca.output_dimension());
  });

  const bool templates = config.combiner.use_templates;
  std::vector<TrainedGroup> trained(groups.size());
  parallel_for(static_cast<std::ptrdiff_t>(groups.size()), [&](std::ptrdiff_t g) {
    const auto& group = groups[static_cast<std::size_t>(g)];
    LabeledData train{concat_columns(train_red, group), train_labels, c};
    trained[static_cast<std::size_t>(g)] =
        train_group(config, train, concat_columns(test_red, group), group_regularization(config, group, ns),
                    templates);
  });

  const double chance = 1.0 - 1.0 / c;
  bool any_failed = false;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (trained[g].failure) {
      any_failed = true;
      result.classifier_errors.push_back(chance);
      if (result.warning.empty())
        result.warning = "classifier " + result.classifier_names[g] + ": " + *trained[g].failure;
    } else {
      result.classifier_errors.push_back(error_rate(row_argmax(trained[g].test_conf), test_labels));
    }
  }
  if (any_failed) {
    result.singular = true;
    result.error = chance;
    result.group_errors.assign(result.group_names.size(), chance);
    return result;
  }

  const auto [pns, pnd] = profile_shape(topology, ns, nd);
  const auto profile_for = [&](bool from_train, std::size_t sample) {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(groups.size()), c);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& conf = from_train ? trained[g].train_conf : trained[g].test_conf;
      rows.row(static_cast<Eigen::Index>(g)) = conf.row(static_cast<Eigen::Index>(sample));
    }
    return build_decision_profile(rows, pns, pnd);
  };

  std::optional<DecisionTemplates> dts;
  if (templates) {
    std::vector<DecisionProfile> train_dps;
    for (std::size_t i = 0; i < train_labels.size(); ++i) train_dps.push_back(profile_for(true, i));
    dts = fit_decision_templates(train_dps, train_labels, c);
  }

  std::vector<int> predicted(test_labels.size());
  std::vector<std::vector<int>> group_predicted(result.group_names.size(), std::vector<int>(test_labels.size()));
  for (std::size_t t = 0; t < test_labels.size(); ++t) {
    const auto dp = profile_for(false, t);
    predicted[t] = dts ? classify_decision_templates(dp, *dts) : argmax_class(combine(dp, config.combiner));
    if (two_stage) {
      const auto stage1 = stage_one_outputs(dp, topology, config.combiner.rule_stage1);
      for (std::size_t g = 0; g < stage1.size(); ++g) group_predicted[g][t] = argmax_class(stage1[g]);
    }
  }
  result.error = error_rate(predicted, test_labels);
  for (const auto& gp : group_predicted) result.group_errors.push_back(error_rate(gp, test_labels));
  return result;
}

double LearningCurve::mean(std::size_t i) const {
  const auto& e = errors.at(i);
  double s = 0.0;
  for (double x : e) s += x;
  return e.empty() ? 0.0 : s / static_cast<double>(e.size());
}

double LearningCurve::std_dev(std::size_t i) const {
  const auto& e = errors.at(i);
  if (e.size() < 2) return 0.0;
  const double mu = mean(i);
  double s = 0.0;
  for (double x : e) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(e.size() - 1));
}

std::uint64_t repetition_seed(std::uint64_t master, int training_size, int repetition) {
  return derive_seed(master, static_cast<std::uint64_t>(training_size), static_cast<std::uint64_t>(repetition) + 1);
}

void check_sizes(const Dataset& data, const ExperimentConfig& config) {
  const int c = data.num_classes();
  const int max_train = *std::max_element(config.training_sizes.begin(), config.training_sizes.end());
  if (max_train > data.min_pool(Half::upper))
    throw InvalidArgument("training size " + std::to_string(max_train) + " exceeds the " +
                          std::to_string(data.min_pool(Half::upper)) + " patches available per class");
  const int share = config.test_size / c + (config.test_size % c ? 1 : 0);
  if (share > data.min_pool(Half::lower))
    throw InvalidArgument("test size " + std::to_string(config.test_size) + " exceeds the available test patches");
}

CurveSet run_learning_curve(const Dataset& data, const ExperimentConfig& config, const CurveProgress& progress) {
  validate(config);
  check_sizes(data, config);
  CurveSet out;
  out.combined.name = "combined";
  out.combined.sizes = config.training_sizes;
  for (std::size_t si = 0; si < config.training_sizes.size(); ++si) {
    const int size = config.training_sizes[si];
    std::vector<double> reps;
    for (int r = 0; r < config.repetitions; ++r) {
      const RunResult run = run_pipeline_once(data, config, size, repetition_seed(config.rng_seed, size, r));
      if (out.classifiers.empty()) {
        for (const auto& n : run.classifier_names) out.classifiers.push_back({"bc_" + n, config.training_sizes, {}});
        for (const auto& n : run.group_names) out.groups.push_back({"group_" + n, config.training_sizes, {}});
        for (auto& cv : out.classifiers) cv.errors.assign(config.training_sizes.size(), {});
        for (auto& cv : out.groups) cv.errors.assign(config.training_sizes.size(), {});
      }
      if (progress) progress(size, r, run);
      reps.push_back(run.error);
      for (std::size_t g = 0; g < run.classifier_errors.size(); ++g)
        out.classifiers[g].errors[si].push_back(run.classifier_errors[g]);
      for (std::size_t g = 0; g < run.group_errors.size(); ++g) out.groups[g].errors[si].push_back(run.group_errors[g]);
      if (run.singular)
        out.warnings.push_back("size " + std::to_string(size) + " repetition " + std::to_string(r + 1) +
                               " scored at chance level: " + run.warning);
    }
    out.combined.errors.push_back(std::move(reps));
  }
  return out;
}

CurveSet run_learning_curve(const ExperimentConfig& config, const CurveProgress& progress) {
  return run_learning_curve(load_dataset(config), config, progress);
}

}  // namespace sstex
