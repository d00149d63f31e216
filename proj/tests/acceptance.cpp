// Acceptance suite: one PASS/FAIL/SKIP line per criterion.
// Set SSTEX_BRODATZ_DIR to a directory holding D4, D9, D19 and D57 (.pgm or
// .png) to enable the album check.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <unistd.h>

#include "sstex/baselines.hpp"
#include "sstex/classifiers.hpp"
#include "sstex/combiners.hpp"
#include "sstex/patching.hpp"
#include "sstex/pca.hpp"
#include "sstex/pipeline.hpp"
#include "sstex/random.hpp"
#include "sstex/scale_space.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace sstex;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail)}; }

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

DecisionProfile random_profile(Rng& rng, int ns, int nd, int c) {
  MatrixXd m(ns * nd, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 0.01 + rng.uniform();
  return build_decision_profile(m, ns, nd);
}

Outcome combiner_equivalence() {
  Rng rng(2024);
  double worst = 0;
  const int cs[] = {2, 4, 16};
  for (int t = 0; t < 1000; ++t) {
    const auto dp = random_profile(rng, 3, 6, cs[t % 3]);
    for (Rule r : {Rule::min, Rule::prod, Rule::mean, Rule::max}) {
      const VectorXd one = combine_one_stage(dp, r);
      for (Topology top : {Topology::scales_then_derivatives, Topology::derivatives_then_scales})
        worst = std::max(worst, (one - combine_two_stage(dp, {top, r, r, false})).cwiseAbs().maxCoeff());
    }
  }
  MatrixXd fixture(4, 2);
  fixture << 1, 0, 1, 0, 1, 0, 0, 1;
  const auto dp = build_decision_profile(fixture, 2, 2);
  const double one = combine_one_stage(dp, Rule::median)[0];
  const double two = combine_two_stage(dp, {Topology::scales_then_derivatives, Rule::median, Rule::median, false})[0];
  return verdict(worst < 1e-12 && one != two,
                 fmt("max |two-stage - one-stage| = %.3g over 1000 profiles; median fixture %.3g vs %.3g", worst, one,
                     two));
}

Outcome non_commutativity() {
  MatrixXd m(4, 2);
  m << .5, .5, .9, .1, .3, .7, .1, .9;
  const auto dp = build_decision_profile(m, 2, 2);
  const VectorXd a = combine_two_stage(dp, {Topology::scales_then_derivatives, Rule::mean, Rule::prod, false});
  const VectorXd b = combine_two_stage(dp, {Topology::scales_then_derivatives, Rule::prod, Rule::mean, false});
  const double err = std::max({std::abs(a[0] - 0.14), std::abs(a[1] - 0.24), std::abs(b[0] - 0.24),
                               std::abs(b[1] - 0.34)});
  return verdict(err < 1e-15, fmt("mean/prod = (%.17g, %.17g); ", a[0], a[1]) +
                                  fmt("prod/mean = (%.17g, %.17g)", b[0], b[1]));
}

Outcome convolution_oracle() {
  Rng rng(77);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const Image patch = testing::random_image(16, 16, 1000 + static_cast<std::uint64_t>(t), -1, 1);
    Kernel2D k;
    k.profile_x.resize(5);
    k.profile_y.resize(5);
    for (auto& v : k.profile_x) v = 2 * rng.uniform() - 1;
    for (auto& v : k.profile_y) v = 2 * rng.uniform() - 1;
    k.values = Image(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) k.values(i, j) = k.profile_y[static_cast<std::size_t>(i)] * k.profile_x[static_cast<std::size_t>(j)];
    worst = std::max(worst, testing::max_abs_diff(convolve_reflective(patch, k), testing::brute_convolve(patch, k.values)));
  }
  return verdict(worst < 1e-12, fmt("max |separable - brute force| = %.3g over 100 patches", worst));
}

Outcome pca_oracle() {
  Rng rng(5150);
  double worst_angle = 0;
  int k_mismatch = 0;
  for (int t = 0; t < 50; ++t) {
    const int d = 2 + static_cast<int>(rng.below(63));
    const int n = 3 + static_cast<int>(rng.below(198));
    MatrixXd X(n, d);
    VectorXd scale(d);
    for (int j = 0; j < d; ++j) scale[j] = std::pow(0.8, j) * (1 + 0.1 * rng.uniform());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) X(i, j) = rng.normal() * scale[j];
    const MatrixXd mixed = X * testing::random_gaussian(d, d, 9000 + static_cast<std::uint64_t>(t));

    const auto model = fit_pca(mixed, 0.95);
    const MatrixXd C = mixed.rowwise() - mixed.colwise().mean();
    VectorXd vals;
    MatrixXd vecs;
    testing::jacobi_eigen(C.transpose() * C / (n - 1), vals, vecs);
    const double total = vals.cwiseMax(0.0).sum();
    int k = 0;
    for (double acc = 0; k < std::min(d, n - 1);) {
      acc += std::max(vals[k], 0.0);
      ++k;
      if (acc >= 0.95 * total) break;
    }
    if (k != model.output_dimension()) {
      ++k_mismatch;
      continue;
    }
    // sin of the largest principal angle between the two subspaces.
    const MatrixXd Q = vecs.leftCols(k);
    const MatrixXd resid = model.components.transpose() - Q * (Q.transpose() * model.components.transpose());
    const double s = Eigen::JacobiSVD<MatrixXd>(resid).singularValues()(0);
    worst_angle = std::max(worst_angle, std::asin(std::min(1.0, s)));
  }
  return verdict(k_mismatch == 0 && worst_angle < 1e-6,
                 fmt("retained-count mismatches %.0f of 50; largest principal angle %.3g rad", k_mismatch,
                     worst_angle));
}

Outcome qdc_checks() {
  LabeledData data;
  data.num_classes = 2;
  const int per = 200, d = 4;
  data.X.resize(2 * per, d);
  Rng rng(31);
  for (int i = 0; i < 2 * per; ++i) {
    const double shift = i < per ? -10 : 10;
    for (int j = 0; j < d; ++j) data.X(i, j) = shift + rng.normal();
    data.labels.push_back(i < per ? 0 : 1);
  }
  const auto model = train_qdc(data, 0, 0);
  double cov_err = 0, sum_err = 0, min_post = 1, oracle_err = 0;
  for (int c = 0; c < 2; ++c) {
    const MatrixXd Xc = data.X.middleRows(c * per, per);
    const MatrixXd C = Xc.rowwise() - Xc.colwise().mean();
    const MatrixXd S = C.transpose() * C / (per - 1);
    cov_err = std::max(cov_err, (model.classes[static_cast<std::size_t>(c)].covariance - S).cwiseAbs().maxCoeff());
    cov_err = std::max(cov_err, (regularize_covariance(S, 0, 0) - S).cwiseAbs().maxCoeff());
  }
  const auto log_density = [&](const VectorXd& x, int c) {
    const MatrixXd Xc = data.X.middleRows(c * per, per);
    const VectorXd mu = Xc.colwise().mean().transpose();
    const MatrixXd C = Xc.rowwise() - mu.transpose();
    const MatrixXd S = C.transpose() * C / (per - 1);
    return -0.5 * (std::log(S.determinant()) + (x - mu).dot(S.inverse() * (x - mu)));
  };
  for (int c = 0; c < 2; ++c) {
    const VectorXd mean = VectorXd::Constant(d, c == 0 ? -10 : 10);
    const VectorXd post = qdc_confidences(model, mean);
    const double oracle = 1 / (1 + std::exp(log_density(mean, 1 - c) - log_density(mean, c)));
    min_post = std::min(min_post, std::min(post[c], oracle));
    oracle_err = std::max(oracle_err, std::abs(post[c] - oracle));
  }
  for (int t = 0; t < 1000; ++t) {
    VectorXd x(d);
    for (int j = 0; j < d; ++j) x[j] = 30 * rng.uniform() - 15;
    sum_err = std::max(sum_err, std::abs(qdc_confidences(model, x).sum() - 1));
  }
  return verdict(cov_err < 1e-12 && sum_err < 1e-12 && min_post > 0.999 && oracle_err < 1e-9,
                 fmt("cov diff %.3g; posterior sum err %.3g; posterior at means %.6f (oracle diff %.3g)", cov_err,
                     sum_err, min_post, oracle_err));
}

Outcome patch_count() {
  const auto grid = extract_patches(Image(320, 640), 32, 10);
  return verdict(grid.size() == 1769u, fmt("%.0f patches", static_cast<double>(grid.size())));
}

std::pair<double, std::string> best_single(const CurveSet& curves) {
  double best = 2;
  std::string name;
  for (const auto& c : curves.classifiers)
    if (c.mean(0) < best) best = c.mean(0), name = c.name;
  return {best, name};
}

Outcome synthetic_end_to_end() {
  ExperimentConfig cfg;
  cfg.training_sizes = {100};
  const CurveSet curves = run_learning_curve(cfg);
  const double combined = curves.combined.mean(0);
  const auto [best, name] = best_single(curves);
  return verdict(combined <= best && combined <= 0.15,
                 fmt("combined %.4f, best single %.4f", combined, best) + " (" + name + ")" +
                     (curves.warnings.empty() ? "" : "; " + std::to_string(curves.warnings.size()) + " warnings"));
}

Outcome album_check() {
  const char* dir = std::getenv("SSTEX_BRODATZ_DIR");
  if (!dir) return {Status::skip, "SSTEX_BRODATZ_DIR not set"};
  ExperimentConfig cfg;
  for (const char* id : {"D4", "D9", "D19", "D57"}) {
    std::string found;
    for (const char* ext : {".pgm", ".png", ".PGM", ".PNG"})
      if (fs::exists(fs::path(dir) / (std::string(id) + ext))) {
        found = (fs::path(dir) / (std::string(id) + ext)).string();
        break;
      }
    if (found.empty()) return {Status::skip, std::string(id) + " not found in " + dir};
    cfg.class_image_paths.push_back(found);
  }
  cfg.training_sizes = {100};
  const CurveSet curves = run_learning_curve(cfg);
  const double combined = curves.combined.mean(0);
  const auto [best, name] = best_single(curves);
  return verdict(best - combined >= 0.10,
                 fmt("combined %.4f, best single %.4f, improvement %.1f points", combined, best,
                     100 * (best - combined)) + " (" + name + ")");
}

Outcome cli_determinism() {
  const fs::path work = fs::temp_directory_path() / ("sstex_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(work);
  fs::create_directories(work);
  {
    std::ofstream cfg(work / "config.json");
    cfg << "{\"training_sizes\": [10, 40, 100], \"repetitions\": 2}\n";
  }
  const std::string cli = SSTEX_CLI_PATH;
  const auto run = [&](const std::string& out, const std::string& threads) {
    const std::string cmd = "\"" + cli + "\" curve --config \"" + (work / "config.json").string() + "\" --seed 7" +
                            " --threads " + threads + " --out \"" + (work / out).string() + "\" > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  if (run("a", "1") != 0 || run("b", "0") != 0) return {Status::fail, "curve command failed"};
  std::map<std::string, std::string> a, b;
  const auto slurp = [](const fs::path& d, std::map<std::string, std::string>& into) {
    for (const auto& e : fs::directory_iterator(d)) {
      std::ifstream in(e.path(), std::ios::binary);
      into[e.path().filename().string()] = {std::istreambuf_iterator<char>(in), {}};
    }
  };
  slurp(work / "a", a);
  slurp(work / "b", b);
  fs::remove_all(work);
  return verdict(!a.empty() && a == b, std::to_string(a.size()) + " files compared, " +
                                           (a == b ? "all byte-identical" : "differences found"));
}

Outcome mh_moments() {
  double worst = 0;
  const std::vector<std::vector<double>> samples = {{0, 0, 0, 1}, {1, 2, 3, 10}, {-2, 0.5, 0.5, 4, 7, 7}};
  for (const auto& x : samples) {
    const double n = static_cast<double>(x.size());
    double mu = 0;
    for (double v : x) mu += v / n;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : x) {
      m2 += (v - mu) * (v - mu) / n;
      m3 += (v - mu) * (v - mu) * (v - mu) / n;
      m4 += (v - mu) * (v - mu) * (v - mu) * (v - mu) / n;
    }
    const Moments m = histogram_moments(x);
    worst = std::max({worst, std::abs(m.skewness - m3 / std::pow(m2, 1.5)), std::abs(m.kurtosis - m4 / (m2 * m2))});
  }
  const SubsetFeatureExtractor ex(NJetFilterBank{}, CropLayout{});
  const auto f = mh_features(preprocess_patch(testing::random_image(32, 32, 3)).patch, ex);
  return verdict(worst < 1e-12 && f.size() == 72u,
                 fmt("max moment error %.3g; feature length %.0f", worst, static_cast<double>(f.size())));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"combiner equivalence", combiner_equivalence},
      {"non-commutativity witness", non_commutativity},
      {"convolution oracle", convolution_oracle},
      {"PCA oracle", pca_oracle},
      {"QDC checks", qdc_checks},
      {"patch count", patch_count},
      {"synthetic end-to-end", synthetic_end_to_end},
      {"album improvement", album_check},
      {"determinism", cli_determinism},
      {"MH moments", mh_moments},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    failures += o.status == Status::fail;
    std::printf("%s %2zu %-26s %s [%.2fs]\n", tag, i + 1, criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
