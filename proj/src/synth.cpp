#include "sstex/synth.hpp"

#include <cmath>
#include <numbers>

#include "sstex/error.hpp"
#include "sstex/image_io.hpp"
#include "sstex/random.hpp"
#include "sstex/scale_space.hpp"

namespace sstex {

std::string_view texture_kind_name(TextureKind k) {
  switch (k) {
    case TextureKind::sinusoid: return "sinusoid";
    case TextureKind::checkerboard: return "checkerboard";
    case TextureKind::filtered_noise: return "filtered_noise";
    case TextureKind::blobs: return "blobs";
  }
  return "?";
}

TextureKind parse_texture_kind(std::string_view s) {
  for (auto k : {TextureKind::sinusoid, TextureKind::checkerboard, TextureKind::filtered_noise, TextureKind::blobs})
    if (texture_kind_name(k) == s) return k;
  throw InvalidArgument("unknown texture kind '" + std::string(s) + "'");
}

namespace {

Image white_noise(int size, Rng& rng) {
  Image img(size, size);
  for (double& v : img.values()) v = rng.normal();
  return img;
}

Image unit_std_smoothed_noise(int size, double sigma, Rng& rng) {
  Image f = convolve_reflective(white_noise(size, rng), gaussian_derivative_kernel(sigma, 0, 0));
  double mean = 0.0;
  for (double v : f.values()) mean += v;
  mean /= static_cast<double>(f.size());
  double var = 0.0;
  for (double v : f.values()) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(f.size()));
  for (double& v : f.values()) v = (v - mean) / sd;
  return f;
}

}  // namespace

Image synth_texture(TextureKind kind, const TextureParams& p, int size, std::uint64_t seed) {
  if (size < 64) throw InvalidArgument("synth_texture: size must be at least 64");
  if (!(p.noise >= 0.0)) throw InvalidArgument("synth_texture: noise must be nonnegative");
  Rng rng(seed);
  Image img(size, size);

  switch (kind) {
    case TextureKind::sinusoid: {
      if (!(p.wavelength > 0.0)) throw InvalidArgument("synth_texture: wavelength must be positive");
      const double s = std::sin(p.angle);
      const double c = std::cos(p.angle);
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
          img(y, x) = std::sin(2.0 * std::numbers::pi * (-x * s + y * c) / p.wavelength);
      break;
    }
    case TextureKind::checkerboard: {
      if (p.cell_size < 1) throw InvalidArgument("synth_texture: cell size must be >= 1");
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) img(y, x) = ((x / p.cell_size + y / p.cell_size) % 2) ? 1.0 : -1.0;
      break;
    }
    case TextureKind::filtered_noise:
    case TextureKind::blobs: {
      if (!(p.sigma > 0.0)) throw InvalidArgument("synth_texture: sigma must be positive");
      img = unit_std_smoothed_noise(size, p.sigma, rng);
      if (kind == TextureKind::blobs)
        for (double& v : img.values()) v = v > p.threshold ? 1.0 : -1.0;
      break;
    }
  }
  if (p.noise > 0.0)
    for (double& v : img.values()) v += p.noise * rng.normal();

  Image out = rescale_to_byte_range(img);
  for (double& v : out.values()) v = std::round(v);
  return out;
}

std::vector<SyntheticClass> four_class_recipe() {
  TextureParams grating_a;
  grating_a.wavelength = 9.0;
  grating_a.angle = std::numbers::pi / 6.0;
  grating_a.noise = 3.0;
  TextureParams grating_b = grating_a;
  grating_b.angle = std::numbers::pi / 3.0;
  TextureParams checker;
  checker.cell_size = 5;
  checker.noise = 3.0;
  TextureParams smooth;
  smooth.sigma = 2.0;
  smooth.noise = 0.6;
  return {{"sinusoid_30", TextureKind::sinusoid, grating_a},
          {"sinusoid_60", TextureKind::sinusoid, grating_b},
          {"checkerboard", TextureKind::checkerboard, checker},
          {"filtered_noise", TextureKind::filtered_noise, smooth}};
}

std::vector<Image> synth_recipe(std::string_view recipe, int size, std::uint64_t seed,
                                std::vector<std::string>* names) {
  if (recipe != "four_class") throw InvalidArgument("unknown synthetic recipe '" + std::string(recipe) + "'");
  std::vector<Image> out;
  const auto classes = four_class_recipe();
  for (std::size_t i = 0; i < classes.size(); ++i) {
    out.push_back(synth_texture(classes[i].kind, classes[i].params, size, derive_seed(seed, i)));
    if (names) names->push_back(classes[i].name);
  }
  return out;
}

}  // namespace sstex
