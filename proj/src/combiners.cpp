#include "sstex/combiners.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sstex/error.hpp"

namespace sstex {

std::string_view rule_name(Rule r) {
  switch (r) {
    case Rule::min: return "min";
    case Rule::prod: return "prod";
    case Rule::median: return "median";
    case Rule::mean: return "mean";
    case Rule::max: return "max";
    case Rule::vote: return "vote";
  }
  return "?";
}

std::string_view topology_name(Topology t) {
  switch (t) {
    case Topology::one_stage: return "one_stage";
    case Topology::scales_then_derivatives: return "scales_then_derivatives";
    case Topology::derivatives_then_scales: return "derivatives_then_scales";
    case Topology::fuse_scales_then_combine: return "fuse_scales_then_combine";
    case Topology::fuse_derivatives_then_combine: return "fuse_derivatives_then_combine";
    case Topology::fuse_all: return "fuse_all";
  }
  return "?";
}

Rule parse_rule(std::string_view s) {
  for (Rule r : {Rule::min, Rule::prod, Rule::median, Rule::mean, Rule::max, Rule::vote})
    if (rule_name(r) == s) return r;
  throw InvalidArgument("unknown combining rule '" + std::string(s) + "'");
}

Topology parse_topology(std::string_view s) {
  for (Topology t : {Topology::one_stage, Topology::scales_then_derivatives, Topology::derivatives_then_scales,
                     Topology::fuse_scales_then_combine, Topology::fuse_derivatives_then_combine,
                     Topology::fuse_all})
    if (topology_name(t) == s) return t;
  throw InvalidArgument("unknown combiner topology '" + std::string(s) + "'");
}

DecisionProfile::DecisionProfile(Eigen::MatrixXd supports, int num_scales, int num_derivatives)
    : supports_(std::move(supports)), ns_(num_scales), nd_(num_derivatives) {
  if (ns_ < 1 || nd_ < 1 || supports_.rows() != static_cast<Eigen::Index>(ns_) * nd_)
    throw InvalidArgument("DecisionProfile: row count must equal ns * nd");
  if (supports_.cols() < 1) throw InvalidArgument("DecisionProfile: no classes");
}

DecisionProfile build_decision_profile(const Eigen::MatrixXd& rows, int ns, int nd) {
  if (ns < 1 || nd < 1 || rows.rows() != static_cast<Eigen::Index>(ns) * nd)
    throw InvalidArgument("build_decision_profile: row count must equal ns * nd");
  if (rows.cols() < 1) throw InvalidArgument("build_decision_profile: no classes");
  if ((rows.array() < 0.0).any() || !rows.allFinite())
    throw InvalidArgument("build_decision_profile: confidences must be finite and nonnegative");
  Eigen::MatrixXd out = rows;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double s = out.row(i).sum();
    if (s > 0.0)
      out.row(i) /= s;
    else
      out.row(i).setConstant(1.0 / static_cast<double>(out.cols()));
  }
  return DecisionProfile(std::move(out), ns, nd);
}

DecisionProfile build_decision_profile(const std::vector<Eigen::VectorXd>& rows, int ns, int nd) {
  if (rows.empty()) throw InvalidArgument("build_decision_profile: no rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw InvalidArgument("build_decision_profile: ragged rows");
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return build_decision_profile(m, ns, nd);
}

double apply_rule(std::span<const double> v, Rule rule) {
  if (v.empty()) throw InvalidArgument("apply_rule: empty column");
  switch (rule) {
    case Rule::min: return *std::min_element(v.begin(), v.end());
    case Rule::max: return *std::max_element(v.begin(), v.end());
    case Rule::mean: {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    }
    case Rule::prod: {
      double logs = 0.0;
      for (double x : v) {
        if (x == 0.0) return 0.0;
        logs += std::log(x);
      }
      return std::exp(logs);
    }
    case Rule::median: {
      std::vector<double> s(v.begin(), v.end());
      std::sort(s.begin(), s.end());
      const std::size_t n = s.size();
      return n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
    }
    case Rule::vote: break;
  }
  throw InvalidArgument("apply_rule: '" + std::string(rule_name(rule)) + "' is not a value rule");
}

namespace {

Eigen::VectorXd columnwise(const Eigen::MatrixXd& rows, Rule rule) {
  if (rule == Rule::vote) {
    Eigen::VectorXd onehot = Eigen::VectorXd::Zero(rows.cols());
    onehot[majority_vote_rows(rows)] = 1.0;
    return onehot;
  }
  Eigen::VectorXd mu(rows.cols());
  std::vector<double> col(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) col[static_cast<std::size_t>(i)] = rows(i, j);
    mu[j] = apply_rule(col, rule);
  }
  return mu;
}

bool is_two_stage(Topology t) {
  return t == Topology::scales_then_derivatives || t == Topology::derivatives_then_scales;
}

}  // namespace

Eigen::VectorXd combine_one_stage(const DecisionProfile& dp, Rule rule) {
  if (rule == Rule::vote) throw InvalidArgument("combine_one_stage: use majority_vote for voting");
  return columnwise(dp.supports(), rule);
}

int argmax_class(const Eigen::VectorXd& mu) {
  if (mu.size() == 0) throw InvalidArgument("argmax_class: empty vector");
  int best = 0;
  for (Eigen::Index i = 1; i < mu.size(); ++i)
    if (mu[i] > mu[best]) best = static_cast<int>(i);
  return best;
}

int majority_vote_rows(const Eigen::MatrixXd& rows) {
  if (rows.rows() == 0 || rows.cols() == 0) throw InvalidArgument("majority_vote: empty profile");
  Eigen::VectorXd votes = Eigen::VectorXd::Zero(rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) votes[argmax_class(rows.row(i).transpose())] += 1.0;
  return argmax_class(votes);
}

int majority_vote(const DecisionProfile& dp) { return majority_vote_rows(dp.supports()); }

std::vector<Eigen::VectorXd> stage_one_outputs(const DecisionProfile& dp, Topology topology, Rule rule) {
  if (!is_two_stage(topology)) throw InvalidArgument("stage_one_outputs: topology is not two-stage");
  const int ns = dp.num_scales();
  const int nd = dp.num_derivatives();
  const bool by_derivative = topology == Topology::scales_then_derivatives;
  const int groups = by_derivative ? nd : ns;
  const int members = by_derivative ? ns : nd;
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(groups));
  Eigen::MatrixXd block(members, dp.num_classes());
  for (int g = 0; g < groups; ++g) {
    for (int m = 0; m < members; ++m) {
      const int row = by_derivative ? dp.row_index(m, g) : dp.row_index(g, m);
      block.row(m) = dp.supports().row(row);
    }
    out.push_back(columnwise(block, rule));
  }
  return out;
}

Eigen::VectorXd combine_two_stage(const DecisionProfile& dp, const CombinerSpec& spec) {
  const auto stage1 = stage_one_outputs(dp, spec.topology, spec.rule_stage1);
  Eigen::MatrixXd stacked(static_cast<Eigen::Index>(stage1.size()), dp.num_classes());
  for (std::size_t g = 0; g < stage1.size(); ++g) stacked.row(static_cast<Eigen::Index>(g)) = stage1[g].transpose();
  return columnwise(stacked, spec.rule_stage2);
}

Eigen::VectorXd combine(const DecisionProfile& dp, const CombinerSpec& spec) {
  if (is_two_stage(spec.topology)) return combine_two_stage(dp, spec);
  // One stage over all rows; fused topologies combine their classifiers
  // with the stage-2 rule.
  const Rule rule = spec.topology == Topology::one_stage ? spec.rule_stage1 : spec.rule_stage2;
  return columnwise(dp.supports(), rule);
}

DecisionTemplates fit_decision_templates(std::span<const DecisionProfile> profiles, std::span<const int> labels,
                                         int num_classes) {
  if (profiles.size() != labels.size()) throw InvalidArgument("fit_decision_templates: label count mismatch");
  if (profiles.empty() || num_classes < 1) throw InsufficientData("fit_decision_templates: no profiles");
  const Eigen::Index m = profiles.front().rows();
  const Eigen::Index c = profiles.front().num_classes();
  DecisionTemplates dt;
  dt.templates.assign(static_cast<std::size_t>(num_classes), Eigen::MatrixXd::Zero(m, c));
  std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const int l = labels[i];
    if (l < 0 || l >= num_classes) throw InvalidArgument("fit_decision_templates: label out of range");
    if (profiles[i].rows() != m || profiles[i].num_classes() != c)
      throw InvalidArgument("fit_decision_templates: profiles differ in shape");
    dt.templates[static_cast<std::size_t>(l)] += profiles[i].supports();
    ++counts[static_cast<std::size_t>(l)];
  }
  for (int j = 0; j < num_classes; ++j) {
    if (counts[static_cast<std::size_t>(j)] == 0)
      throw InsufficientData("fit_decision_templates: class " + std::to_string(j) + " has no profiles");
    dt.templates[static_cast<std::size_t>(j)] /= counts[static_cast<std::size_t>(j)];
  }
  return dt;
}

int classify_decision_templates(const DecisionProfile& dp, const DecisionTemplates& dt) {
  if (dt.templates.empty()) throw InvalidArgument("classify_decision_templates: no templates");
  int best = -1;
  double best_d = 0.0;
  for (std::size_t j = 0; j < dt.templates.size(); ++j) {
    const auto& t = dt.templates[j];
    if (t.rows() != dp.rows() || t.cols() != dp.num_classes())
      throw InvalidArgument("classify_decision_templates: dimension mismatch");
    const double d = (dp.supports() - t).squaredNorm();
    if (best < 0 || d < best_d) {
      best = static_cast<int>(j);
      best_d = d;
    }
  }
  return best;
}

}  // namespace sstex
