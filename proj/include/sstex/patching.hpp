#pragma once

// Train/test halves, patch grids, per-patch standardization and the
// conversion of N-jet responses into cropped feature subsets.

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sstex/image.hpp"
#include "sstex/scale_space.hpp"

namespace sstex {

enum class Half { upper, lower };

struct Origin {
  int row = 0;
  int col = 0;
  friend bool operator==(const Origin&, const Origin&) = default;
};

struct PatchGrid {
  std::vector<Image> patches;
  std::vector<Origin> origins;  // top-left, in source-half coordinates
  Half source_half = Half::upper;

  std::size_t size() const noexcept { return patches.size(); }
};

/// Upper gets rows [0, H/2), lower gets the rest (the extra row when H is odd).
std::pair<Image, Image> split_halves(const Image& image);

/// Number of grid placements of a square patch along one axis.
int patch_positions(int extent, int patch_size, int stride);

/// Row-major grid of overlapping square patches, top left to bottom right.
PatchGrid extract_patches(const Image& half, int patch_size, int stride, Half which = Half::upper);

struct PreprocessedPatch {
  Image patch;
  bool degenerate = false;  // zero variance input; patch is all zeros
};

/// DC removal and variance normalization (population variance).
PreprocessedPatch preprocess_patch(const Image& patch);

struct SubsetVector {
  std::vector<double> values;
  Derivative derivative = Derivative::L;
  int scale_index = 0;
  int crop_size = 0;
  int subsample_stride = 1;
};

/// Length of a cropped, subsampled subset vector.
int subset_length(int crop_size, int subsample_stride);

/// Central crop, then every stride-th pixel per axis, flattened row-major.
SubsetVector crop_and_vectorize(const Image& response, Derivative derivative, int scale_index,
                                int crop_size, int subsample_stride = 1);

/// Per-scale cropping parameters; defaults are 18/24/30 with no subsampling.
struct CropLayout {
  std::vector<int> crop_sizes = {18, 24, 30};
  std::vector<int> subsample_strides = {1, 1, 1};
};

/// Turns standardized patches into one feature matrix per (derivative, scale)
/// subset. Matrix i has one row per patch; i follows NJetFilterBank order.
class SubsetFeatureExtractor {
 public:
  SubsetFeatureExtractor(NJetFilterBank bank, CropLayout layout);

  const NJetFilterBank& bank() const noexcept { return bank_; }
  const CropLayout& layout() const noexcept { return layout_; }
  int num_subsets() const noexcept { return bank_.num_subsets(); }
  int scale_of(int subset) const noexcept { return subset % bank_.num_scales(); }
  Derivative derivative_of(int subset) const noexcept {
    return static_cast<Derivative>(subset / bank_.num_scales());
  }
  int dimension(int subset) const;

  /// Feature rows for one patch, one vector per subset.
  std::vector<std::vector<double>> features(const Image& patch) const;

  /// OpenMP over patches.
  std::vector<Eigen::MatrixXd> extract(std::span<const Image> patches) const;
  /// Single-threaded reference with identical output.
  std::vector<Eigen::MatrixXd> extract_serial(std::span<const Image> patches) const;

 private:
  template <typename Loop>
  std::vector<Eigen::MatrixXd> extract_with(std::span<const Image> patches, Loop loop) const;

  NJetFilterBank bank_;
  CropLayout layout_;
};

}  // namespace sstex
