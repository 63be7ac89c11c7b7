#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pavetex/enhance.hpp"
#include "pavetex/error.hpp"

using namespace pavetex;

namespace {

ClaheParams single_tile_no_clip() {
  ClaheParams p;
  p.tiles_x = p.tiles_y = 1;
  p.clip_limit = 256.0;  // no bin can exceed n = 256 * n / 256
  return p;
}

// Skewed unimodal: most pixels dark, long bright tail.
GrayRaster skewed_image(int w, int h, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::exponential_distribution<double> d(1.0 / 18.0);
  GrayRaster img(w, h);
  for (auto& v : img.values) v = static_cast<std::uint8_t>(std::min(255.0, 30.0 + d(gen)));
  return img;
}

}  // namespace

TEST(ClaheParams, Validation) {
  ClaheParams p;
  EXPECT_NO_THROW(p.validate());
  p.clip_limit = 0.5;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.bins = 1;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.tiles_x = 0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Clahe, ConstantImageMapsToSingleNearbyLevel) {
  for (int v : {0, 1, 60, 128, 200, 254, 255}) {
    GrayRaster img(96, 64, static_cast<std::uint8_t>(v));
    const GrayRaster out = clahe(img, ClaheParams{});
    const auto first = out.values.front();
    for (auto o : out.values) ASSERT_EQ(o, first);
    EXPECT_NEAR(first, v, 1) << "level " << v;
  }
}

TEST(Clahe, SingleTileWithoutClippingIsGlobalEqualization) {
  for (std::uint32_t seed : {1u, 2u, 3u}) {
    const GrayRaster img = skewed_image(50, 40, seed);
    EXPECT_EQ(clahe(img, single_tile_no_clip()).values, oracle::global_he(img).values);
  }
}

TEST(Clahe, TwoToneContrastIncreases) {
  GrayRaster img(20, 10);
  for (std::size_t i = 0; i < img.values.size(); ++i) img.values[i] = i % 2 ? 20 : 10;
  const GrayRaster out = clahe(img, single_tile_no_clip());
  // Ranks: the 10s occupy [0, n/2), the 20s [n/2, n): centres at 64 and 192.
  int lo = -1, hi = -1;
  for (std::size_t i = 0; i < img.values.size(); ++i) (img.values[i] == 10 ? lo : hi) = out.values[i];
  EXPECT_EQ(lo, 64);
  EXPECT_EQ(hi, 192);
  EXPECT_GT(hi - lo, 10);
}

TEST(Clahe, RankPreservingWithinTile) {
  const GrayRaster img = oracle::random_image(64, 64, 11);
  ClaheParams p;
  p.tiles_x = p.tiles_y = 4;
  const GrayRaster out = clahe(img, p);
  // The 8x8 corner block lies before the first tile centre on both axes, so
  // every pixel there uses tile (0, 0)'s mapping alone.
  for (int a = 0; a < 64; ++a)
    for (int b = 0; b < 64; ++b) {
      const int ax = a % 8, ay = a / 8, bx = b % 8, by = b / 8;
      if (img.at(ax, ay) >= img.at(bx, by)) {
        ASSERT_GE(out.at(ax, ay), out.at(bx, by));
      }
    }

  GrayRaster levels(256, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 256; ++x) levels.at(x, y) = static_cast<std::uint8_t>((x * 37 + y) % 256);
  ClaheParams one;
  one.tiles_x = one.tiles_y = 1;
  const GrayRaster mapped = clahe(levels, one);
  for (std::size_t a = 0; a < levels.values.size(); ++a)
    for (std::size_t b = 0; b < levels.values.size(); b += 13)
      if (levels.values[a] >= levels.values[b]) {
        ASSERT_GE(mapped.values[a], mapped.values[b]);
      }
}

TEST(Clahe, ReducesChiSquareToUniform) {
  const GrayRaster img = skewed_image(400, 300, 5);
  const GrayRaster out = clahe(img, ClaheParams{});
  EXPECT_LT(oracle::chi_square_to_uniform(out), oracle::chi_square_to_uniform(img));
}

TEST(Clahe, DeterministicAndScalePreserved) {
  GrayRaster img = skewed_image(123, 77, 8);
  img.mm_per_px = 0.05;
  const GrayRaster a = clahe(img, ClaheParams{});
  const GrayRaster b = clahe(img, ClaheParams{});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.width, 123);
  EXPECT_EQ(a.height, 77);
  EXPECT_EQ(a.mm_per_px, img.mm_per_px);
}

TEST(Clahe, ImageSmallerThanGridIsRejected) {
  EXPECT_THROW(clahe(GrayRaster(4, 4, 1), ClaheParams{}), Error);
}

TEST(Clahe, FewerBinsStillMonotone) {
  const GrayRaster img = oracle::random_image(64, 48, 21);
  ClaheParams p;
  p.bins = 16;
  p.tiles_x = p.tiles_y = 1;
  const GrayRaster out = clahe(img, p);
  for (std::size_t a = 0; a < img.values.size(); a += 3)
    for (std::size_t b = 0; b < img.values.size(); b += 17)
      if (img.values[a] >= img.values[b]) {
        ASSERT_GE(out.values[a], out.values[b]);
      }
}

TEST(Gaussian, KernelCentreWeight) {
  const Kernel k = gaussian_kernel({1.0, 2});
  EXPECT_EQ(k.size(), 5);
  double sum = 0.0;
  for (int dy = -2; dy <= 2; ++dy)
    for (int dx = -2; dx <= 2; ++dx) sum += std::exp(-(dx * dx + dy * dy) / 2.0);
  EXPECT_NEAR(k.at(0, 0), 1.0 / sum, 1e-15);
  EXPECT_NEAR(k.at(0, 0), 0.1621, 5e-5);
}

TEST(Gaussian, KernelNormalizedAndSymmetric) {
  for (const GaussianParams p : {GaussianParams{1.0, 3}, GaussianParams{0.5, 1}, GaussianParams{2.5, 7},
                                 GaussianParams{1.7, 4}}) {
    const Kernel k = gaussian_kernel(p);
    double s = 0.0;
    for (double w : k.weights) s += w;
    EXPECT_NEAR(s, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(k.at(1, 0), k.at(0, 1));
    EXPECT_DOUBLE_EQ(k.at(1, 0), k.at(-1, 0));
    const auto w1 = gaussian_kernel_1d(p);
    for (int dy = -p.radius; dy <= p.radius; ++dy)
      for (int dx = -p.radius; dx <= p.radius; ++dx)
        EXPECT_NEAR(k.at(dx, dy), w1[dx + p.radius] * w1[dy + p.radius], 1e-15);
  }
}

TEST(Gaussian, ParamsValidation) {
  EXPECT_THROW(GaussianParams({2.0, 3}).validate(), Error);
  EXPECT_THROW(GaussianParams({0.0, 3}).validate(), Error);
  EXPECT_NO_THROW(GaussianParams({1.5, 3}).validate());
}

TEST(Gaussian, ConstantImageFixed) {
  const GrayRaster img(31, 17, 77);
  EXPECT_EQ(gaussian_smooth(img, {}).values, img.values);
}

TEST(Gaussian, ImpulseResponseIsKernel) {
  GrayRaster img(21, 21, 0);
  img.at(10, 10) = 255;
  const GaussianParams p{1.0, 3};
  const GrayRaster out = gaussian_smooth(img, p);
  const Kernel k = gaussian_kernel(p);
  EXPECT_EQ(out.at(10, 10), std::lround(255 * k.at(0, 0)));
  for (int dy = -3; dy <= 3; ++dy)
    for (int dx = -3; dx <= 3; ++dx) EXPECT_NEAR(out.at(10 + dx, 10 + dy), 255 * k.at(dx, dy), 1.0);
}

TEST(Gaussian, CheckerboardInterior) {
  GrayRaster img(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) img.at(x, y) = (x + y) % 2 ? 255 : 0;
  const GrayRaster out = gaussian_smooth(img, {});
  for (int y = 3; y < 13; ++y)
    for (int x = 3; x < 13; ++x) {
      EXPECT_GT(out.at(x, y), 0);
      EXPECT_LT(out.at(x, y), 255);
    }
}

TEST(Gaussian, SeparableMatchesDirectConvolution) {
  for (std::uint32_t seed = 1; seed <= 5; ++seed) {
    const GrayRaster img = oracle::random_image(45, 33, seed);
    for (const GaussianParams p : {GaussianParams{1.0, 3}, GaussianParams{2.0, 5}}) {
      const GrayRaster fast = gaussian_smooth(img, p);
      const GrayRaster slow = oracle::convolve2d(img, gaussian_kernel(p));
      for (std::size_t i = 0; i < fast.values.size(); ++i)
        ASSERT_LE(std::abs(fast.values[i] - slow.values[i]), 1);
    }
  }
}

TEST(Gaussian, RangeAndTransposition) {
  const GrayRaster img = oracle::random_image(40, 40, 99, 30, 180);
  const GrayRaster out = gaussian_smooth(img, {});
  const auto [imin, imax] = std::minmax_element(img.values.begin(), img.values.end());
  const auto [omin, omax] = std::minmax_element(out.values.begin(), out.values.end());
  EXPECT_GE(*omin, *imin - 1);
  EXPECT_LE(*omax, *imax + 1);
  EXPECT_EQ(gaussian_smooth(transpose(img), {}), transpose(out));
}

TEST(Gaussian, MirrorIndex) {
  EXPECT_EQ(mirror_index(-1, 5), 0);
  EXPECT_EQ(mirror_index(-2, 5), 1);
  EXPECT_EQ(mirror_index(5, 5), 4);
  EXPECT_EQ(mirror_index(6, 5), 3);
  EXPECT_EQ(mirror_index(-3, 1), 0);
  for (int i = -20; i < 30; ++i) EXPECT_EQ(mirror_index(i, 4), oracle::reflect(i, 4));
}
