#pragma once

// Decision profiles and the combiner algebra over them: fixed rules,
// majority vote, two-stage grouping over scales and derivatives, and
// decision templates.

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sstex {

enum class Rule { min, prod, median, mean, max, vote };

enum class Topology {
  one_stage,
  scales_then_derivatives,       // stage 1 over the scales of each derivative
  derivatives_then_scales,       // stage 1 over the derivatives of each scale
  fuse_scales_then_combine,      // one classifier per derivative on fused scales
  fuse_derivatives_then_combine, // one classifier per scale on fused derivatives
  fuse_all,                      // a single classifier on the full concatenation
};

std::string_view rule_name(Rule r);
std::string_view topology_name(Topology t);
Rule parse_rule(std::string_view s);
Topology parse_topology(std::string_view s);

/// Combiner configuration. `use_templates` replaces the fixed final rule by
/// nearest-decision-template classification (one-stage and fused topologies).
struct CombinerSpec {
  Topology topology = Topology::derivatives_then_scales;
  Rule rule_stage1 = Rule::mean;
  Rule rule_stage2 = Rule::mean;
  bool use_templates = false;
};

/// m x c supports, row i = s + k * ns for scale s and derivative k.
class DecisionProfile {
 public:
  DecisionProfile() = default;
  DecisionProfile(Eigen::MatrixXd supports, int num_scales, int num_derivatives);

  const Eigen::MatrixXd& supports() const noexcept { return supports_; }
  int num_scales() const noexcept { return ns_; }
  int num_derivatives() const noexcept { return nd_; }
  int rows() const noexcept { return static_cast<int>(supports_.rows()); }
  int num_classes() const noexcept { return static_cast<int>(supports_.cols()); }
  double operator()(int row, int cls) const { return supports_(row, cls); }
  int row_index(int scale, int derivative) const noexcept { return scale + derivative * ns_; }

 private:
  Eigen::MatrixXd supports_;
  int ns_ = 0;
  int nd_ = 0;
};

/// Normalizes each nonnegative confidence row to sum 1; an all-zero row
/// becomes uniform. Row count must equal ns * nd.
DecisionProfile build_decision_profile(const Eigen::MatrixXd& confidence_rows, int ns, int nd);
DecisionProfile build_decision_profile(const std::vector<Eigen::VectorXd>& confidence_rows, int ns, int nd);

/// One fixed rule over a list of supports (vote is not a value rule).
double apply_rule(std::span<const double> values, Rule rule);

Eigen::VectorXd combine_one_stage(const DecisionProfile& dp, Rule rule);

int argmax_class(const Eigen::VectorXd& mu);
int majority_vote(const DecisionProfile& dp);
/// Plurality over row argmaxes of the given rows; ties to the lowest class.
int majority_vote_rows(const Eigen::MatrixXd& rows);

/// Stage-1 group outputs (one c-vector per group) for a two-stage topology.
/// Vote groups emit one-hot vectors.
std::vector<Eigen::VectorXd> stage_one_outputs(const DecisionProfile& dp, Topology topology, Rule rule);

Eigen::VectorXd combine_two_stage(const DecisionProfile& dp, const CombinerSpec& spec);

/// Dispatches on spec.topology: one_stage (vote allowed, via majority
/// vote), the two-stage variants, and for fused profiles the stage-2 rule.
Eigen::VectorXd combine(const DecisionProfile& dp, const CombinerSpec& spec);

struct DecisionTemplates {
  std::vector<Eigen::MatrixXd> templates;  // one m x c array per class
};

DecisionTemplates fit_decision_templates(std::span<const DecisionProfile> profiles,
                                         std::span<const int> labels, int num_classes);
int classify_decision_templates(const DecisionProfile& dp, const DecisionTemplates& templates);

}  // namespace sstex
