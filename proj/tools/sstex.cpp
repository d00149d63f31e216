// Command-line front end: synthetic data, learning curves, baselines,
// chart rendering and N-jet inspection.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sstex/baselines.hpp"
#include "sstex/config.hpp"
#include "sstex/error.hpp"
#include "sstex/export.hpp"
#include "sstex/image_io.hpp"
#include "sstex/parallel.hpp"
#include "sstex/patching.hpp"
#include "sstex/pipeline.hpp"
#include "sstex/synth.hpp"

namespace fs = std::filesystem;
using namespace sstex;

namespace {

struct Common {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out = "out";
  int threads = 0;
};

void add_common(CLI::App& cmd, Common& common) {
  cmd.add_option("--config", common.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  cmd.add_option("--out", common.out, "output directory")->capture_default_str();
  cmd.add_option("--threads", common.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  cmd.add_option_function<std::uint64_t>(
      "--seed", [&common](std::uint64_t s) { common.seed = s, common.seed_set = true; }, "master seed (rng_seed)");
  for (const auto& key : config_keys())
    cmd.add_option_function<std::string>(
        "--" + key, [&common, key](const std::string& v) { common.overrides[key] = v; }, "override config field");
}

ExperimentConfig resolve(const Common& common) {
  nlohmann::json doc;
  if (common.config_path.empty()) {
    doc = to_json(ExperimentConfig{});
  } else {
    std::ifstream in(common.config_path);
    try {
      doc = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidArgument("config: '" + common.config_path + "': " + e.what());
    }
    doc = to_json(config_from_json(doc));
  }
  for (const auto& [key, value] : common.overrides) apply_override(doc, key, value);
  if (common.seed_set) doc["rng_seed"] = common.seed;
  return config_from_json(doc);
}

void prepare(const Common& common) {
  if (common.threads > 0) set_threads(common.threads);
  std::error_code ec;
  fs::create_directories(common.out, ec);
  if (ec) throw ExportError("cannot create output directory '" + common.out + "': " + ec.message());
}

void report(const std::vector<fs::path>& files) {
  for (const auto& f : files) std::cout << f.string() << '\n';
}

void print_summary(const LearningCurve& curve) {
  for (std::size_t i = 0; i < curve.sizes.size(); ++i)
    std::fprintf(stderr, "%s size %d: error %.4f +- %.4f\n", curve.name.c_str(), curve.sizes[i], curve.mean(i),
                 curve.std_dev(i));
}

void progress(int size, int repetition, const RunResult& run) {
  std::fprintf(stderr, "size %d repetition %d: error %.4f%s\n", size, repetition + 1, run.error,
               run.singular ? " (chance, singular covariance)" : "");
}

void warn(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int run_synth(const Common& common) {
  ExperimentConfig cfg = resolve(common);
  if (common.seed_set) cfg.synthetic.seed = common.seed;
  prepare(common);
  std::vector<std::string> names;
  const auto images = synth_recipe(cfg.synthetic.recipe, cfg.synthetic.size, cfg.synthetic.seed, &names);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const fs::path p = fs::path(common.out) / (names[i] + ".pgm");
    write_pgm(p, images[i]);
    std::cout << p.string() << '\n';
  }
  return 0;
}

int run_curve(const Common& common) {
  const ExperimentConfig cfg = resolve(common);
  prepare(common);
  const Dataset data = load_dataset(cfg);
  const CurveSet curves = run_learning_curve(data, cfg, progress);
  warn(curves.warnings);
  print_summary(curves.combined);
  report(export_results(curves, common.out, "combined vs single-subset classifiers"));
  return 0;
}

int run_baseline(const Common& common, const std::string& method, const std::string& fusion) {
  const ExperimentConfig cfg = resolve(common);
  prepare(common);
  const Dataset data = load_dataset(cfg);
  if (method == "mh") {
    const LearningCurve curve = mh_baseline(data, cfg);
    print_summary(curve);
    report(export_results(std::vector<LearningCurve>{curve}, common.out, "histogram-moment baseline"));
  } else {
    const CurveSet curves = cfs_baseline(data, cfg, parse_cfs_fusion(fusion), progress);
    warn(curves.warnings);
    print_summary(curves.combined);
    report(export_results(curves, common.out, "combined feature space baseline"));
  }
  return 0;
}

int run_plot(const Common& common, const std::vector<std::string>& inputs, const std::string& title) {
  prepare(common);
  std::vector<LearningCurve> curves;
  for (const auto& in : inputs) curves.push_back(read_curve_csv(in));
  const fs::path p = fs::path(common.out) / "chart.svg";
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ExportError("cannot write '" + p.string() + "'");
  out << render_svg(curves, title);
  if (!out) throw ExportError("failed writing '" + p.string() + "'");
  std::cout << p.string() << '\n';
  return 0;
}

struct InspectArgs {
  std::string image;
  int cls = 0;
  std::string half = "upper";
  int index = 0;
};

int run_inspect(const Common& common, const InspectArgs& args) {
  const ExperimentConfig cfg = resolve(common);
  prepare(common);
  Image source;
  if (!args.image.empty()) {
    source = load_grayscale(args.image);
  } else if (!cfg.class_image_paths.empty()) {
    if (args.cls < 0 || args.cls >= static_cast<int>(cfg.class_image_paths.size()))
      throw InvalidArgument("inspect: class index out of range");
    source = load_grayscale(cfg.class_image_paths[static_cast<std::size_t>(args.cls)]);
  } else {
    const auto images = synth_recipe(cfg.synthetic.recipe, cfg.synthetic.size, cfg.synthetic.seed);
    if (args.cls < 0 || args.cls >= static_cast<int>(images.size()))
      throw InvalidArgument("inspect: class index out of range");
    source = images[static_cast<std::size_t>(args.cls)];
  }
  if (args.half != "upper" && args.half != "lower") throw InvalidArgument("inspect: --half must be upper or lower");
  const Half half = args.half == "upper" ? Half::upper : Half::lower;
  const auto halves = split_halves(source);
  const auto grid = extract_patches(half == Half::upper ? halves.first : halves.second, cfg.patch_size,
                                    cfg.patch_stride, half);
  if (args.index < 0 || args.index >= static_cast<int>(grid.size()))
    throw InvalidArgument("inspect: patch index out of range (0.." + std::to_string(grid.size() - 1) + ")");
  const Image patch = preprocess_patch(grid.patches[static_cast<std::size_t>(args.index)]).patch;

  const NJetFilterBank bank(cfg.sigmas);
  const NJetResponse jet = compute_njet(patch, bank);
  const fs::path dir(common.out);
  write_pgm(dir / "patch.pgm", rescale_to_byte_range(patch));
  std::cout << (dir / "patch.pgm").string() << '\n';
  for (Derivative d : kAllDerivatives)
    for (int s = 0; s < jet.num_scales; ++s) {
      const fs::path p = dir / (std::string(derivative_name(d)) + "_s" + std::to_string(s + 1) + ".pgm");
      write_pgm(p, rescale_to_byte_range(jet.at(d, s)));
      std::cout << p.string() << '\n';
    }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale texture patch classification with combined classifiers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sstex 1.0.0");

  Common common;
  auto* synth = app.add_subcommand("synth", "write the synthetic class images as graymaps");
  add_common(*synth, common);

  auto* curve = app.add_subcommand("curve", "run a learning-curve experiment");
  add_common(*curve, common);

  auto* baseline = app.add_subcommand("baseline", "run a reference method (mh or cfs)");
  add_common(*baseline, common);
  std::string method;
  std::string fusion = "all";
  baseline->add_option("method", method, "mh | cfs")->required()->check(CLI::IsMember({"mh", "cfs"}));
  baseline->add_option("--fusion", fusion, "cfs grouping: all | per_derivative | per_scale")
      ->check(CLI::IsMember({"all", "per_derivative", "per_scale"}))
      ->capture_default_str();

  auto* plot = app.add_subcommand("plot", "render a chart from result CSV files");
  add_common(*plot, common);
  std::vector<std::string> inputs;
  std::string title = "learning curves";
  plot->add_option("inputs", inputs, "curve CSV files; the first is drawn thick")->required()->check(CLI::ExistingFile);
  plot->add_option("--title", title, "chart title")->capture_default_str();

  auto* inspect = app.add_subcommand("inspect", "write the N-jet responses of one patch as graymaps");
  add_common(*inspect, common);
  InspectArgs iargs;
  inspect->add_option("--image", iargs.image, "image file (default: class image from the config)");
  inspect->add_option("--class", iargs.cls, "class index when no image is given")->capture_default_str();
  inspect->add_option("--half", iargs.half, "upper | lower")->capture_default_str();
  inspect->add_option("--index", iargs.index, "patch index in row-major grid order")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*synth) return run_synth(common);
    if (*curve) return run_curve(common);
    if (*baseline) return run_baseline(common, method, fusion);
    if (*plot) return run_plot(common, inputs, title);
    if (*inspect) return run_inspect(common, iargs);
  } catch (const std::exception& e) {
    std::cerr << "sstex: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
