#pragma once

#include <filesystem>

#include "sstex/image.hpp"

namespace sstex {

/// Decodes binary/ASCII graymaps (P5/P2), pixmaps (P6/P3) and PNG into
/// reals in [0, 255]. Color is reduced with weights 0.299/0.587/0.114.
/// Throws IngestionError naming the path on any failure.
Image load_grayscale(const std::filesystem::path& path);

/// Writes a binary 8-bit graymap; values are rounded and clamped to [0, 255].
void write_pgm(const std::filesystem::path& path, const Image& image);

/// Min-max rescale into [0, 255] (constant images map to 0).
Image rescale_to_byte_range(const Image& image);

}  // namespace sstex
