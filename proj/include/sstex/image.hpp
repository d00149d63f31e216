#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sstex/error.hpp"

namespace sstex {

/// Dense row-major 2D array of reals. Used for source images, patches,
/// filter responses and kernels alike.
class Image {
 public:
  Image() = default;
  Image(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw InvalidArgument("Image: negative dimensions");
    data_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill);
  }
  Image(int rows, int cols, std::vector<double> values)
      : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (rows < 0 || cols < 0 ||
        data_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
      throw InvalidArgument("Image: value count does not match dimensions");
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int height() const noexcept { return rows_; }
  int width() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(int r, int c) noexcept {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  double operator()(int r, int c) const noexcept {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<const double> row(int r) const noexcept {
    return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
  }

  /// Copy of the rectangle [r0, r0+h) x [c0, c0+w).
  Image crop(int r0, int c0, int h, int w) const;

  bool same_shape(const Image& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }
  friend bool operator==(const Image&, const Image&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

inline Image Image::crop(int r0, int c0, int h, int w) const {
  if (r0 < 0 || c0 < 0 || h < 0 || w < 0 || r0 + h > rows_ || c0 + w > cols_)
    throw InvalidArgument("Image::crop: rectangle outside image");
  Image out(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) out(r, c) = (*this)(r0 + r, c0 + c);
  return out;
}

}  // namespace sstex
