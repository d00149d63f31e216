// Serial reference paths against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "sstex/classifiers.hpp"
#include "sstex/parallel.hpp"
#include "sstex/patching.hpp"
#include "sstex/random.hpp"

namespace {

sstex::Image noise_patch(std::uint64_t seed, int n = 32) {
  sstex::Rng rng(seed);
  sstex::Image img(n, n);
  for (double& v : img.values()) v = rng.normal();
  return img;
}

std::vector<sstex::Image> patch_batch(int count) {
  std::vector<sstex::Image> out;
  for (int i = 0; i < count; ++i) out.push_back(noise_patch(static_cast<std::uint64_t>(i)));
  return out;
}

void BM_ConvolveDirect(benchmark::State& state) {
  const auto patch = noise_patch(1);
  const auto k = sstex::gaussian_derivative_kernel(std::sqrt(7.0), 1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(sstex::convolve_reflective_direct(patch, k.values));
}
BENCHMARK(BM_ConvolveDirect);

void BM_ConvolveSeparable(benchmark::State& state) {
  const auto patch = noise_patch(1);
  const auto k = sstex::gaussian_derivative_kernel(std::sqrt(7.0), 1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(sstex::convolve_reflective(patch, k));
}
BENCHMARK(BM_ConvolveSeparable);

const sstex::SubsetFeatureExtractor& extractor() {
  static const sstex::SubsetFeatureExtractor ex(sstex::NJetFilterBank{}, sstex::CropLayout{});
  return ex;
}

void BM_ExtractSerial(benchmark::State& state) {
  const auto patches = patch_batch(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(extractor().extract_serial(patches));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ExtractSerial)->Arg(64)->Arg(256);

void BM_ExtractParallel(benchmark::State& state) {
  const auto patches = patch_batch(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(extractor().extract(patches));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = sstex::max_threads();
}
BENCHMARK(BM_ExtractParallel)->Arg(64)->Arg(256);

sstex::LabeledData blobs(int per_class, int dim) {
  sstex::Rng rng(9);
  sstex::LabeledData d{Eigen::MatrixXd(4 * per_class, dim), {}, 4};
  for (int i = 0; i < 4 * per_class; ++i) {
    d.labels.push_back(i % 4);
    for (int j = 0; j < dim; ++j) d.X(i, j) = rng.normal() + (j % 4 == i % 4 ? 2.0 : 0.0);
  }
  return d;
}

void BM_QdcScoreLoop(benchmark::State& state) {
  const auto d = blobs(200, static_cast<int>(state.range(0)));
  const auto model = sstex::train_qdc(d, 0.01, 0.01);
  for (auto _ : state)
    for (Eigen::Index i = 0; i < d.X.rows(); ++i)
      benchmark::DoNotOptimize(sstex::qdc_confidences(model, d.X.row(i).transpose()));
}
BENCHMARK(BM_QdcScoreLoop)->Arg(32)->Arg(128);

void BM_QdcScoreBatch(benchmark::State& state) {
  const auto d = blobs(200, static_cast<int>(state.range(0)));
  const auto model = sstex::train_qdc(d, 0.01, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(sstex::qdc_confidences_rows(model, d.X));
}
BENCHMARK(BM_QdcScoreBatch)->Arg(32)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
