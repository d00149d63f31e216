#include <cmath>

#include "doctest.h"
#include "sstex/patching.hpp"
#include "test_util.hpp"

using namespace sstex;
using sstex::testing::random_image;

TEST_CASE("split halves") {
  auto [u, l] = split_halves(Image(640, 640));
  CHECK((u.rows() == 320 && u.cols() == 640 && l.rows() == 320 && l.cols() == 640));
  auto [u2, l2] = split_halves(Image(2, 2));
  CHECK((u2.rows() == 1 && l2.rows() == 1 && u2.cols() == 2));
  Image five(5, 4);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 4; ++c) five(r, c) = r;
  auto [u3, l3] = split_halves(five);
  CHECK((u3.rows() == 2 && l3.rows() == 3));
  CHECK(l3(0, 0) == 2.0);
  CHECK_THROWS_AS(split_halves(Image(1, 10)), InvalidArgument);
}

TEST_CASE("patch grids") {
  const auto grid = extract_patches(Image(320, 640), 32, 10);
  CHECK(grid.size() == 1769u);
  CHECK(grid.origins.back() == Origin{280, 600});
  for (std::size_t i = 1; i < grid.origins.size(); ++i) {
    const auto& a = grid.origins[i - 1];
    const auto& b = grid.origins[i];
    CHECK((a.row < b.row || (a.row == b.row && a.col < b.col)));
  }
  for (const auto& o : grid.origins) CHECK((o.row + 32 <= 320 && o.col + 32 <= 640));

  CHECK(extract_patches(Image(32, 32), 32, 7).size() == 1u);
  const Image img = random_image(64, 64, 4);
  const auto tiles = extract_patches(img, 32, 32);
  REQUIRE(tiles.size() == 4u);
  CHECK(tiles.patches[3](0, 0) == img(32, 32));
  CHECK_THROWS_AS(extract_patches(Image(20, 64), 32, 10), InvalidArgument);
  CHECK_THROWS_AS(extract_patches(Image(64, 64), 32, 0), InvalidArgument);
}

TEST_CASE("halves never overlap") {
  const Image img = random_image(100, 80, 2);
  auto [u, l] = split_halves(img);
  const auto up = extract_patches(u, 32, 10, Half::upper);
  const auto lo = extract_patches(l, 32, 10, Half::lower);
  int max_upper_row = 0;
  for (const auto& o : up.origins) max_upper_row = std::max(max_upper_row, o.row + 31);
  CHECK(max_upper_row < u.rows());  // upper rows stay in [0, 50); lower start at 50
  CHECK(lo.source_half == Half::lower);
}

TEST_CASE("standardization") {
  const Image p = random_image(32, 32, 11, 0, 255);
  const auto out = preprocess_patch(p);
  CHECK_FALSE(out.degenerate);
  double mean = 0, var = 0;
  for (double v : out.patch.values()) mean += v;
  mean /= 1024;
  for (double v : out.patch.values()) var += (v - mean) * (v - mean);
  var /= 1024;
  CHECK(std::abs(mean) < 1e-12);
  CHECK(std::abs(var - 1.0) < 1e-9);

  const auto again = preprocess_patch(out.patch);
  CHECK(sstex::testing::max_abs_diff(again.patch, out.patch) < 1e-12);

  const auto flat = preprocess_patch(Image(32, 32, 0.1));
  CHECK(flat.degenerate);
  for (double v : flat.patch.values()) CHECK(v == 0.0);
}

TEST_CASE("crop and vectorize") {
  Image resp(32, 32);
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c) resp(r, c) = 100 * r + c;
  const auto v18 = crop_and_vectorize(resp, Derivative::L, 0, 18);
  CHECK(v18.values.size() == 324u);
  CHECK(v18.values.front() == 707.0);  // offset 7 on both axes
  CHECK(crop_and_vectorize(resp, Derivative::Lyy, 2, 30).values.size() == 900u);
  const auto sub = crop_and_vectorize(resp, Derivative::Lx, 2, 30, 2);
  CHECK(sub.values.size() == 225u);
  CHECK(sub.values[1] == resp(1, 3));
  CHECK(subset_length(30, 4) == 64);
  CHECK_THROWS_AS(crop_and_vectorize(resp, Derivative::L, 0, 34), InvalidArgument);
  CHECK_THROWS_AS(crop_and_vectorize(resp, Derivative::L, 0, 17), InvalidArgument);

  // Stride 1 is lossless: the vector reshapes back to the crop.
  const auto full = crop_and_vectorize(resp, Derivative::L, 0, 24);
  const Image crop = resp.crop(4, 4, 24, 24);
  CHECK(Image(24, 24, full.values) == crop);
}

TEST_CASE("subset feature extraction: serial and parallel agree, same source patch") {
  const SubsetFeatureExtractor ex(NJetFilterBank{}, CropLayout{});
  CHECK(ex.num_subsets() == 18);
  CHECK(ex.dimension(0) == 324);
  CHECK(ex.dimension(1) == 576);
  CHECK(ex.dimension(2) == 900);
  CHECK(ex.derivative_of(7) == Derivative::Ly);
  CHECK(ex.scale_of(7) == 1);

  std::vector<Image> patches;
  for (int i = 0; i < 6; ++i) patches.push_back(preprocess_patch(random_image(32, 32, 40 + i)).patch);
  const auto par = ex.extract(patches);
  const auto ser = ex.extract_serial(patches);
  REQUIRE(par.size() == 18u);
  for (std::size_t i = 0; i < par.size(); ++i) CHECK(par[i] == ser[i]);

  // Row p of every subset comes from patch p.
  const auto single = ex.features(patches[4]);
  for (std::size_t i = 0; i < single.size(); ++i)
    for (std::size_t j = 0; j < single[i].size(); ++j) CHECK(par[i](4, static_cast<Eigen::Index>(j)) == single[i][j]);

  CHECK_THROWS_AS(SubsetFeatureExtractor(NJetFilterBank{}, CropLayout{{18, 24}, {1, 1}}), InvalidArgument);
}
