#include "sstex/config.hpp"

#include <fstream>
#include <sstream>

#include "sstex/error.hpp"
#include "sstex/scale_space.hpp"

namespace sstex {

using nlohmann::json;

std::string_view base_classifier_name(BaseClassifier b) {
  switch (b) {
    case BaseClassifier::qdc: return "qdc";
    case BaseClassifier::knn: return "knn";
    case BaseClassifier::parzen: return "parzen";
  }
  return "?";
}

BaseClassifier parse_base_classifier(std::string_view s) {
  for (auto b : {BaseClassifier::qdc, BaseClassifier::knn, BaseClassifier::parzen})
    if (base_classifier_name(b) == s) return b;
  throw InvalidArgument("unknown base classifier '" + std::string(s) + "'");
}

ExperimentConfig::ExperimentConfig() : sigmas(default_sigmas()) {}

void validate(const ExperimentConfig& c) {
  const auto ns = c.sigmas.size();
  if (ns == 0) throw InvalidArgument("config: sigmas must not be empty");
  for (std::size_t i = 0; i < ns; ++i)
    if (!(c.sigmas[i] > 0.0) || (i > 0 && !(c.sigmas[i] > c.sigmas[i - 1])))
      throw InvalidArgument("config: sigmas must be positive and strictly increasing");
  if (c.crop_sizes.size() != ns || c.subsample_strides.size() != ns || c.regularization.size() != ns)
    throw InvalidArgument("config: crop_sizes, subsample_strides and regularization need one entry per scale");
  if (c.patch_size < 1 || c.patch_stride < 1) throw InvalidArgument("config: patch size and stride must be >= 1");
  for (std::size_t i = 0; i < ns; ++i) {
    if (c.crop_sizes[i] < 1 || c.crop_sizes[i] > c.patch_size || (c.patch_size - c.crop_sizes[i]) % 2)
      throw InvalidArgument("config: each crop size must fit the patch with an even margin");
    if (c.subsample_strides[i] < 1) throw InvalidArgument("config: subsample strides must be >= 1");
    const auto& r = c.regularization[i];
    if (!(r.eta >= 0.0 && r.lambda >= 0.0 && r.eta + r.lambda < 1.0))
      throw InvalidArgument("config: regularization needs eta, lambda >= 0 and eta + lambda < 1");
  }
  if (!(c.pca_fraction > 0.0 && c.pca_fraction <= 1.0)) throw InvalidArgument("config: pca_fraction must lie in (0, 1]");
  if (c.training_sizes.empty()) throw InvalidArgument("config: training_sizes must not be empty");
  for (int s : c.training_sizes)
    if (s < 1) throw InvalidArgument("config: training sizes must be >= 1");
  if (c.test_size < 1) throw InvalidArgument("config: test_size must be >= 1");
  if (c.repetitions < 1) throw InvalidArgument("config: repetitions must be >= 1");
  if (c.singular_retry_lambda < 0.0) throw InvalidArgument("config: singular_retry_lambda must be >= 0");
  const auto& cs = c.combiner;
  if (cs.topology == Topology::one_stage && cs.rule_stage1 == Rule::vote && cs.use_templates)
    throw InvalidArgument("config: decision templates replace the rule; do not combine with vote");
  if (cs.use_templates && (cs.topology == Topology::scales_then_derivatives ||
                           cs.topology == Topology::derivatives_then_scales))
    throw InvalidArgument("config: decision templates apply to one-stage and fused topologies only");
  if (c.class_image_paths.empty() && c.synthetic.size < 64)
    throw InvalidArgument("config: synthetic.size must be at least 64");
}

json to_json(const ExperimentConfig& c) {
  json regs = json::array();
  for (const auto& r : c.regularization) regs.push_back({{"eta", r.eta}, {"lambda", r.lambda}});
  return json{
      {"class_image_paths", c.class_image_paths},
      {"synthetic", {{"recipe", c.synthetic.recipe}, {"size", c.synthetic.size}, {"seed", c.synthetic.seed}}},
      {"sigmas", c.sigmas},
      {"patch_size", c.patch_size},
      {"patch_stride", c.patch_stride},
      {"crop_sizes", c.crop_sizes},
      {"subsample_strides", c.subsample_strides},
      {"pca_fraction", c.pca_fraction},
      {"regularization", regs},
      {"base_classifier", std::string(base_classifier_name(c.base_classifier))},
      {"combiner",
       {{"topology", std::string(topology_name(c.combiner.topology))},
        {"rule_stage1", std::string(rule_name(c.combiner.rule_stage1))},
        {"rule_stage2", std::string(rule_name(c.combiner.rule_stage2))},
        {"use_templates", c.combiner.use_templates}}},
      {"training_sizes", c.training_sizes},
      {"test_size", c.test_size},
      {"repetitions", c.repetitions},
      {"rng_seed", c.rng_seed},
      {"singular_retry_lambda", c.singular_retry_lambda},
  };
}

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("config: document must be an object");
  const auto known = config_keys();
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const auto& k : known) ok = ok || k == key || k.rfind(key + ".", 0) == 0;
    if (!ok) throw InvalidArgument("config: unknown field '" + key + "'");
  }
  ExperimentConfig c;
  try {
    read(j, "class_image_paths", c.class_image_paths);
    if (j.contains("synthetic")) {
      const auto& s = j.at("synthetic");
      read(s, "recipe", c.synthetic.recipe);
      read(s, "size", c.synthetic.size);
      read(s, "seed", c.synthetic.seed);
    }
    read(j, "sigmas", c.sigmas);
    read(j, "patch_size", c.patch_size);
    read(j, "patch_stride", c.patch_stride);
    read(j, "crop_sizes", c.crop_sizes);
    read(j, "subsample_strides", c.subsample_strides);
    read(j, "pca_fraction", c.pca_fraction);
    if (j.contains("regularization")) {
      c.regularization.clear();
      for (const auto& r : j.at("regularization")) {
        if (r.is_array() && r.size() == 2)
          c.regularization.push_back({r[0].get<double>(), r[1].get<double>()});
        else
          c.regularization.push_back({r.value("eta", 0.0), r.value("lambda", 0.0)});
      }
    }
    if (j.contains("base_classifier")) c.base_classifier = parse_base_classifier(j.at("base_classifier").get<std::string>());
    if (j.contains("combiner")) {
      const auto& cb = j.at("combiner");
      if (cb.contains("topology")) c.combiner.topology = parse_topology(cb.at("topology").get<std::string>());
      if (cb.contains("rule_stage1")) c.combiner.rule_stage1 = parse_rule(cb.at("rule_stage1").get<std::string>());
      if (cb.contains("rule_stage2")) c.combiner.rule_stage2 = parse_rule(cb.at("rule_stage2").get<std::string>());
      read(cb, "use_templates", c.combiner.use_templates);
    }
    read(j, "training_sizes", c.training_sizes);
    read(j, "test_size", c.test_size);
    read(j, "repetitions", c.repetitions);
    read(j, "rng_seed", c.rng_seed);
    read(j, "singular_retry_lambda", c.singular_retry_lambda);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open '" + path.string() + "'");
  try {
    return config_from_json(json::parse(in, nullptr, true, /*ignore_comments=*/true));
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config: '" + path.string() + "': " + e.what());
  }
}

namespace {

json parse_scalar(std::string_view s) {
  json v = json::parse(s.begin(), s.end(), nullptr, false);
  if (!v.is_discarded()) return v;
  return json(std::string(s));
}

}  // namespace

void apply_override(json& doc, std::string_view dotted_key, std::string_view value) {
  json parsed = json::parse(value.begin(), value.end(), nullptr, false);
  if (parsed.is_discarded()) {
    if (value.find(',') != std::string_view::npos) {
      parsed = json::array();
      std::stringstream ss{std::string(value)};
      std::string item;
      while (std::getline(ss, item, ',')) parsed.push_back(parse_scalar(item));
    } else {
      parsed = std::string(value);
    }
  }
  json* node = &doc;
  std::string key(dotted_key);
  for (std::size_t dot; (dot = key.find('.')) != std::string::npos; key = key.substr(dot + 1)) {
    json& child = (*node)[key.substr(0, dot)];
    if (!child.is_object()) child = json::object();
    node = &child;
  }
  // Single-element list fields given as a bare scalar stay lists.
  if ((*node).contains(key) && (*node)[key].is_array() && !parsed.is_array()) parsed = json::array({parsed});
  (*node)[key] = std::move(parsed);
}

std::vector<std::string> config_keys() {
  return {"class_image_paths", "synthetic.recipe", "synthetic.size", "synthetic.seed", "sigmas",
          "patch_size", "patch_stride", "crop_sizes", "subsample_strides", "pca_fraction",
          "regularization", "base_classifier", "combiner.topology", "combiner.rule_stage1",
          "combiner.rule_stage2", "combiner.use_templates", "training_sizes", "test_size",
          "repetitions", "rng_seed", "singular_retry_lambda"};
}

}  // namespace sstex
