#include "sstex/patching.hpp"

#include <cmath>

#include "sstex/parallel.hpp"

namespace sstex {

std::pair<Image, Image> split_halves(const Image& image) {
  if (image.rows() < 2) throw InvalidArgument("split_halves: image height must be at least 2");
  const int top = image.rows() / 2;
  return {image.crop(0, 0, top, image.cols()),
          image.crop(top, 0, image.rows() - top, image.cols())};
}

int patch_positions(int extent, int patch_size, int stride) {
  if (patch_size < 1 || stride < 1) throw InvalidArgument("patch_positions: patch size and stride must be >= 1");
  if (patch_size > extent) return 0;
  return (extent - patch_size) / stride + 1;
}

PatchGrid extract_patches(const Image& half, int patch_size, int stride, Half which) {
  if (stride < 1) throw InvalidArgument("extract_patches: stride must be >= 1");
  if (patch_size < 1 || patch_size > half.rows() || patch_size > half.cols())
    throw InvalidArgument("extract_patches: patch larger than source half");
  const int nr = patch_positions(half.rows(), patch_size, stride);
  const int nc = patch_positions(half.cols(), patch_size, stride);
  PatchGrid grid;
  grid.source_half = which;
  grid.patches.reserve(static_cast<std::size_t>(nr) * nc);
  grid.origins.reserve(static_cast<std::size_t>(nr) * nc);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j) {
      grid.origins.push_back({i * stride, j * stride});
      grid.patches.push_back(half.crop(i * stride, j * stride, patch_size, patch_size));
    }
  return grid;
}

PreprocessedPatch preprocess_patch(const Image& patch) {
  if (patch.empty()) throw InvalidArgument("preprocess_patch: empty patch");
  const auto v = patch.values();
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  double peak = 0.0;
  for (double x : v) {
    mean += x;
    peak = std::max(peak, std::abs(x));
  }
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= n;

  PreprocessedPatch out{Image(patch.rows(), patch.cols()), false};
  const double sd = std::sqrt(var);
  if (!(sd > 1e-12 * std::max(1.0, peak))) {
    out.degenerate = true;
    return out;
  }
  auto o = out.patch.values();
  for (std::size_t i = 0; i < v.size(); ++i) o[i] = (v[i] - mean) / sd;
  return out;
}

int subset_length(int crop_size, int subsample_stride) {
  const int per_axis = (crop_size + subsample_stride - 1) / subsample_stride;
  return per_axis * per_axis;
}

SubsetVector crop_and_vectorize(const Image& response, Derivative derivative, int scale_index,
                                int crop_size, int subsample_stride) {
  if (subsample_stride < 1) throw InvalidArgument("crop_and_vectorize: stride must be >= 1");
  if (crop_size < 1 || crop_size > response.rows() || crop_size > response.cols())
    throw InvalidArgument("crop_and_vectorize: crop larger than response");
  if ((response.rows() - crop_size) % 2 != 0 || (response.cols() - crop_size) % 2 != 0)
    throw InvalidArgument("crop_and_vectorize: crop cannot be centered (odd margin)");
  const int r0 = (response.rows() - crop_size) / 2;
  const int c0 = (response.cols() - crop_size) / 2;

  SubsetVector out;
  out.derivative = derivative;
  out.scale_index = scale_index;
  out.crop_size = crop_size;
  out.subsample_stride = subsample_stride;
  out.values.reserve(static_cast<std::size_t>(subset_length(crop_size, subsample_stride)));
  for (int r = 0; r < crop_size; r += subsample_stride)
    for (int c = 0; c < crop_size; c += subsample_stride) out.values.push_back(response(r0 + r, c0 + c));
  return out;
}

SubsetFeatureExtractor::SubsetFeatureExtractor(NJetFilterBank bank, CropLayout layout)
    : bank_(std::move(bank)), layout_(std::move(layout)) {
  const auto ns = static_cast<std::size_t>(bank_.num_scales());
  if (layout_.crop_sizes.size() != ns || layout_.subsample_strides.size() != ns)
    throw InvalidArgument("SubsetFeatureExtractor: need one crop size and stride per scale");
  for (std::size_t s = 0; s < ns; ++s)
    if (layout_.crop_sizes[s] < 1 || layout_.subsample_strides[s] < 1)
      throw InvalidArgument("SubsetFeatureExtractor: crop sizes and strides must be >= 1");
}

int SubsetFeatureExtractor::dimension(int subset) const {
  const auto s = static_cast<std::size_t>(scale_of(subset));
  return subset_length(layout_.crop_sizes[s], layout_.subsample_strides[s]);
}

std::vector<std::vector<double>> SubsetFeatureExtractor::features(const Image& patch) const {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(num_subsets()));
  for (int i = 0; i < num_subsets(); ++i) {
    const int s = scale_of(i);
    const Image response = convolve_reflective(patch, bank_.kernel(i));
    out[static_cast<std::size_t>(i)] =
        crop_and_vectorize(response, derivative_of(i), s, layout_.crop_sizes[static_cast<std::size_t>(s)],
                           layout_.subsample_strides[static_cast<std::size_t>(s)])
            .values;
  }
  return out;
}

template <typename Loop>
std::vector<Eigen::MatrixXd> SubsetFeatureExtractor::extract_with(std::span<const Image> patches,
                                                                  Loop loop) const {
  const auto n = static_cast<Eigen::Index>(patches.size());
  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<std::size_t>(num_subsets()));
  for (int i = 0; i < num_subsets(); ++i) out.emplace_back(n, dimension(i));
  loop(static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t p) {
    const auto rows = features(patches[static_cast<std::size_t>(p)]);
    for (std::size_t i = 0; i < rows.size(); ++i)
      out[i].row(p) = Eigen::Map<const Eigen::RowVectorXd>(rows[i].data(),
                                                            static_cast<Eigen::Index>(rows[i].size()));
  });
  return out;
}

std::vector<Eigen::MatrixXd> SubsetFeatureExtractor::extract(std::span<const Image> patches) const {
  return extract_with(patches, [](std::ptrdiff_t n, auto&& f) { parallel_for(n, f); });
}

std::vector<Eigen::MatrixXd> SubsetFeatureExtractor::extract_serial(std::span<const Image> patches) const {
  return extract_with(patches, [](std::ptrdiff_t n, auto&& f) { serial_for(n, f); });
}

}  // namespace sstex
