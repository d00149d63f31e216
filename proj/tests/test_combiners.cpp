#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "sstex/combiners.hpp"
#include "sstex/error.hpp"

using namespace sstex;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

DecisionProfile random_profile(std::mt19937& gen, int ns, int nd, int c) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  MatrixXd m(ns * nd, c);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = u(gen);
  return build_decision_profile(m, ns, nd);
}

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

MatrixXd rows(std::initializer_list<std::initializer_list<double>> r) {
  MatrixXd m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) m.row(i++) = vec(row).transpose();
  return m;
}

}  // namespace

TEST_CASE("fixed rules on a two-classifier profile") {
  const auto dp = build_decision_profile(rows({{0.2, 0.8}, {0.6, 0.4}}), 1, 2);
  CHECK(combine_one_stage(dp, Rule::mean).isApprox(vec({0.4, 0.6}), 1e-15));
  CHECK(combine_one_stage(dp, Rule::min).isApprox(vec({0.2, 0.4}), 1e-15));
  CHECK(combine_one_stage(dp, Rule::max).isApprox(vec({0.6, 0.8}), 1e-15));
  CHECK(combine_one_stage(dp, Rule::prod).isApprox(vec({0.12, 0.32}), 1e-15));
  CHECK(combine_one_stage(dp, Rule::median).isApprox(vec({0.4, 0.6}), 1e-15));
  CHECK_THROWS_AS(combine_one_stage(dp, Rule::vote), InvalidArgument);
}

TEST_CASE("apply_rule details") {
  const std::vector<double> odd{3, 1, 2}, even{4, 1, 3, 2}, zero{0.5, 0.0};
  CHECK(apply_rule(odd, Rule::median) == 2.0);
  CHECK(apply_rule(even, Rule::median) == 2.5);
  CHECK(apply_rule(zero, Rule::prod) == 0.0);
  CHECK(apply_rule(even, Rule::prod) == doctest::Approx(24.0));
  CHECK_THROWS_AS(apply_rule(odd, Rule::vote), InvalidArgument);
}

TEST_CASE("two-stage order matters") {
  const auto dp = build_decision_profile(rows({{.5, .5}, {.9, .1}, {.3, .7}, {.1, .9}}), 2, 2);
  const VectorXd a = combine_two_stage(dp, {Topology::scales_then_derivatives, Rule::mean, Rule::prod, false});
  const VectorXd b = combine_two_stage(dp, {Topology::scales_then_derivatives, Rule::prod, Rule::mean, false});
  CHECK(std::abs(a[0] - 0.14) < 1e-15);
  CHECK(std::abs(a[1] - 0.24) < 1e-15);
  CHECK(std::abs(b[0] - 0.24) < 1e-15);
  CHECK(std::abs(b[1] - 0.34) < 1e-15);
}

TEST_CASE("two-stage X/X equals one-stage X except median") {
  std::mt19937 gen(17);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int c = std::vector<int>{2, 4, 16}[trial % 3];
    const auto dp = random_profile(gen, 3, 6, c);
    for (Rule r : {Rule::min, Rule::prod, Rule::mean, Rule::max})
      for (Topology t : {Topology::scales_then_derivatives, Topology::derivatives_then_scales}) {
        const VectorXd one = combine_one_stage(dp, r);
        const VectorXd two = combine_two_stage(dp, {t, r, r, false});
        worst = std::max(worst, (one - two).cwiseAbs().maxCoeff());
      }
  }
  CHECK(worst < 1e-12);

  // Frozen median counterexample.
  const auto dp = build_decision_profile(rows({{1, 0}, {1, 0}, {1, 0}, {0, 1}}), 2, 2);
  const VectorXd one = combine_one_stage(dp, Rule::median);
  const VectorXd two = combine_two_stage(dp, {Topology::scales_then_derivatives, Rule::median, Rule::median, false});
  CHECK(one[0] == 1.0);
  CHECK(two[0] == 0.75);
}

TEST_CASE("combine dispatch") {
  std::mt19937 gen(5);
  const auto dp = random_profile(gen, 3, 6, 4);
  CHECK(combine(dp, {Topology::one_stage, Rule::mean, Rule::max, false}) == combine_one_stage(dp, Rule::mean));
  CHECK(combine(dp, {Topology::fuse_all, Rule::mean, Rule::max, false}) == combine_one_stage(dp, Rule::max));
  CHECK(combine(dp, {Topology::derivatives_then_scales, Rule::mean, Rule::mean, false})
            .isApprox(combine_one_stage(dp, Rule::mean), 1e-12));
}

TEST_CASE("majority vote") {
  CHECK(majority_vote(build_decision_profile(rows({{.9, .1}, {.2, .8}}), 1, 2)) == 0);
  CHECK(majority_vote(build_decision_profile(rows({{.1, .9, 0}, {.2, .8, 0}, {.9, .1, 0}}), 1, 3)) == 1);
  CHECK(majority_vote(build_decision_profile(rows({{.5, .5}}), 1, 1)) == 0);

  // A vote stage forwards one-hot labels.
  const auto dp = build_decision_profile(rows({{.9, .1}, {.6, .4}, {.2, .8}, {.3, .7}}), 2, 2);
  const auto s1 = stage_one_outputs(dp, Topology::scales_then_derivatives, Rule::vote);
  REQUIRE(s1.size() == 2u);
  CHECK(s1[0] == vec({1, 0}));
  CHECK(s1[1] == vec({0, 1}));
  const VectorXd final_vote = combine(dp, {Topology::scales_then_derivatives, Rule::vote, Rule::vote, false});
  CHECK(final_vote == vec({1, 0}));
}

TEST_CASE("argmax ties and scale invariance") {
  CHECK(argmax_class(vec({0.3, 0.3, 0.1})) == 0);
  CHECK(argmax_class(vec({0.1, 0.4, 0.4})) == 1);
  std::mt19937 gen(9);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int t = 0; t < 50; ++t) {
    const auto dp = random_profile(gen, 3, 6, 4);
    const int label = argmax_class(combine_one_stage(dp, Rule::prod));
    const double k = u(gen);
    CHECK(argmax_class(k * combine_one_stage(dp, Rule::prod)) == label);
  }
}

TEST_CASE("profile construction") {
  const auto dp = build_decision_profile(rows({{2, 2}, {0, 0}}), 1, 2);
  CHECK(dp(0, 0) == 0.5);
  CHECK(dp(1, 1) == 0.5);
  CHECK(DecisionProfile(MatrixXd::Zero(18, 2), 3, 6).row_index(1, 2) == 7);
  CHECK_THROWS_AS(build_decision_profile(rows({{0.5, 0.5}}), 2, 2), InvalidArgument);
}

TEST_CASE("decision templates") {
  std::mt19937 gen(21);
  std::vector<DecisionProfile> train;
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) {
    train.push_back(random_profile(gen, 3, 6, 3));
    labels.push_back(i % 3);
  }
  const auto dt = fit_decision_templates(train, labels, 3);
  REQUIRE(dt.templates.size() == 3u);
  for (int j = 0; j < 3; ++j)
    for (int r = 0; r < 18; ++r)
      for (int col = 0; col < 3; ++col) {
        double sum = 0;
        int n = 0;
        for (std::size_t i = 0; i < train.size(); ++i)
          if (labels[i] == j) {
            sum += train[i](r, col);
            ++n;
          }
        CHECK(std::abs(dt.templates[static_cast<std::size_t>(j)](r, col) - sum / n) < 1e-14);
      }

  for (int t = 0; t < 20; ++t) {
    const auto dp = random_profile(gen, 3, 6, 3);
    int best = 0;
    double best_d = 1e300;
    for (int j = 0; j < 3; ++j) {
      double d = 0;
      for (int r = 0; r < 18; ++r)
        for (int col = 0; col < 3; ++col) d += std::pow(dp(r, col) - dt.templates[static_cast<std::size_t>(j)](r, col), 2);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    CHECK(classify_decision_templates(dp, dt) == best);
  }

  // One profile per class reproduces the profiles; equidistant → lower class.
  const auto a = build_decision_profile(rows({{1, 0}}), 1, 1);
  const auto b = build_decision_profile(rows({{0, 1}}), 1, 1);
  const std::vector<DecisionProfile> two{a, b, b};
  const std::vector<int> l2{0, 1, 1};
  const auto dt2 = fit_decision_templates(two, l2, 2);
  CHECK(dt2.templates[0] == a.supports());
  CHECK(dt2.templates[1] == b.supports());
  CHECK(classify_decision_templates(b, dt2) == 1);
  CHECK(classify_decision_templates(build_decision_profile(rows({{.5, .5}}), 1, 1), dt2) == 0);
  const std::vector<int> missing{0, 0, 0};
  CHECK_THROWS_AS(fit_decision_templates(two, missing, 2), InsufficientData);
}

TEST_CASE("permuting scale rows within a derivative block") {
  std::mt19937 gen(33);
  for (int t = 0; t < 50; ++t) {
    const auto dp = random_profile(gen, 3, 6, 4);
    MatrixXd s = dp.supports();
    const int k = t % 6;
    std::vector<int> perm{0, 1, 2};
    std::shuffle(perm.begin(), perm.end(), gen);
    MatrixXd p = s;
    for (int i = 0; i < 3; ++i) p.row(dp.row_index(i, k)) = s.row(dp.row_index(perm[static_cast<std::size_t>(i)], k));
    const DecisionProfile q(p, 3, 6);
    for (Rule r1 : {Rule::min, Rule::prod, Rule::median, Rule::mean, Rule::max}) {
      const CombinerSpec spec{Topology::scales_then_derivatives, r1, Rule::mean, false};
      CHECK((combine(dp, spec) - combine(q, spec)).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("names round trip") {
  for (Rule r : {Rule::min, Rule::prod, Rule::median, Rule::mean, Rule::max, Rule::vote})
    CHECK(parse_rule(rule_name(r)) == r);
  for (Topology t : {Topology::one_stage, Topology::scales_then_derivatives, Topology::derivatives_then_scales,
                     Topology::fuse_scales_then_combine, Topology::fuse_derivatives_then_combine, Topology::fuse_all})
    CHECK(parse_topology(topology_name(t)) == t);
  CHECK_THROWS_AS(parse_rule("sum"), InvalidArgument);
}
