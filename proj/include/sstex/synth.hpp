#pragma once

// Synthetic stand-in textures, quantized to 8 bits like real scans.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sstex/image.hpp"

namespace sstex {

enum class TextureKind { sinusoid, checkerboard, filtered_noise, blobs };

std::string_view texture_kind_name(TextureKind k);
TextureKind parse_texture_kind(std::string_view s);

struct TextureParams {
  double wavelength = 8.0;  // sinusoid period in pixels
  double angle = 0.0;       // sinusoid stripe orientation, radians; 0 = horizontal stripes
  int cell_size = 8;        // checkerboard cell side
  double sigma = 2.0;       // smoothing of filtered_noise / blobs
  double threshold = 0.0;   // blobs: level in units of the filtered noise std
  double noise = 0.5;       // additive white noise std (signal amplitude is 1)
};

/// Deterministic in (kind, params, size, seed); values are integers in [0, 255].
Image synth_texture(TextureKind kind, const TextureParams& params, int size, std::uint64_t seed);

struct SyntheticClass {
  std::string name;
  TextureKind kind;
  TextureParams params;
};

/// Two grating orientations, a checkerboard and filtered noise.
std::vector<SyntheticClass> four_class_recipe();

/// Images for a named recipe ("four_class").
std::vector<Image> synth_recipe(std::string_view recipe, int size, std::uint64_t seed,
                                std::vector<std::string>* names = nullptr);

}  // namespace sstex
