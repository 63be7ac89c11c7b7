#include <gtest/gtest.h>

#include <fstream>

#include "oracles.hpp"
#include "pavetex/error.hpp"
#include "pavetex/image_io.hpp"
#include "pavetex/raster.hpp"

using namespace pavetex;
namespace fs = std::filesystem;

namespace {

ColorRaster solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  ColorRaster img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.set(x, y, r, g, b);
  return img;
}

std::uint8_t gray_of(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return to_grayscale(solid(1, 1, r, g, b)).values[0];
}

}  // namespace

TEST(Grayscale, PrimaryColours) {
  EXPECT_EQ(gray_of(100, 100, 100), 100);
  EXPECT_EQ(gray_of(255, 0, 0), 76);
  EXPECT_EQ(gray_of(0, 255, 0), 150);
  EXPECT_EQ(gray_of(0, 0, 255), 29);
}

TEST(Grayscale, NeutralPixelsAreExact) {
  for (int v = 0; v < 256; ++v) {
    const auto u = static_cast<std::uint8_t>(v);
    EXPECT_EQ(gray_of(u, u, u), v);
  }
}

TEST(Grayscale, MatchesDirectArithmeticAndStaysInChannelRange) {
  std::mt19937 gen(7);
  std::uniform_int_distribution<int> d(0, 255);
  for (int i = 0; i < 20000; ++i) {
    const int r = d(gen), g = d(gen), b = d(gen);
    const int got = gray_of(r, g, b);
    const double exact = 0.299 * r + 0.587 * g + 0.114 * b;
    EXPECT_NEAR(got, exact, 0.5 + 1e-9);
    EXPECT_LE(got, std::max({r, g, b}) + 1);
    EXPECT_GE(got, std::min({r, g, b}) - 1);
  }
}

TEST(Roi, DefaultScaleIsConsistentAcrossAxes) {
  RoiSpec roi;
  roi.width_px = 4000;
  roi.height_px = 3000;
  EXPECT_NEAR(roi.mm_per_px(), 0.029412, 5e-7);
  EXPECT_NEAR(roi.mm_per_px() / (75.0 / 2550.0), 1.0, 1e-9);
  EXPECT_NO_THROW(roi.validate());
  roi.target_height_px = 2000;
  EXPECT_THROW(roi.validate(), Error);
}

TEST(CropResize, IdentityWhenTargetMatchesRoi) {
  const GrayRaster img = oracle::random_image(40, 30, 3);
  RoiSpec roi{5, 4, 20, 15, 20.0, 15.0, 20, 15};
  const GrayRaster out = crop_resize(img, roi);
  ASSERT_EQ(out.width, 20);
  ASSERT_EQ(out.height, 15);
  for (int y = 0; y < 15; ++y)
    for (int x = 0; x < 20; ++x) EXPECT_EQ(out.at(x, y), img.at(x + 5, y + 4));
  EXPECT_DOUBLE_EQ(*out.mm_per_px, 1.0);
}

TEST(CropResize, FullImageIdentity) {
  const GrayRaster img = oracle::random_image(32, 24, 4);
  RoiSpec roi{0, 0, 32, 24, 32.0, 24.0, 32, 24};
  EXPECT_EQ(crop_resize(img, roi).values, img.values);
}

TEST(CropResize, ConstantStaysConstant) {
  GrayRaster img(61, 47, 93);
  RoiSpec roi{3, 2, 40, 30, 100.0, 75.0, 340, 255};
  const GrayRaster out = crop_resize(img, roi);
  EXPECT_EQ(out.width, 340);
  EXPECT_EQ(out.height, 255);
  for (auto v : out.values) ASSERT_EQ(v, 93);
}

TEST(CropResize, OutOfBoundsRoiIsDataError) {
  GrayRaster img(10, 10, 0);
  RoiSpec roi{5, 5, 8, 6, 100.0, 75.0, 40, 30};
  try {
    crop_resize(img, roi);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
  }
}

TEST(CropResize, UpsamplingInterpolatesBetweenNeighbours) {
  GrayRaster img(2, 1);
  img.values = {0, 100};
  RoiSpec roi{0, 0, 2, 1, 4.0, 1.0, 4, 1};
  const GrayRaster out = crop_resize(img, roi);
  // Half-pixel centres: x_src = (x + 0.5) / 2 - 0.5 -> -0.25, 0.25, 0.75, 1.25.
  EXPECT_EQ(out.values, (std::vector<std::uint8_t>{0, 25, 75, 100}));
}

TEST(Transpose, MaskRotationPreservesCount) {
  BinaryMask m(5, 3);
  m.set(1, 0, true);
  m.set(4, 2, true);
  EXPECT_EQ(transpose(m).foreground_count(), 2u);
  const BinaryMask r = rotate90(m);
  EXPECT_EQ(r.width, 3);
  EXPECT_EQ(r.height, 5);
  EXPECT_EQ(r.foreground_count(), 2u);
  EXPECT_EQ(rotate90(rotate90(rotate90(rotate90(m)))), m);
}

TEST(ImageIo, PpmRoundTrip) {
  const auto dir = oracle::scratch_dir("io_ppm");
  {
    std::ofstream out(dir / "two.ppm", std::ios::binary);
    out << "P6\n2 1\n255\n";
    const unsigned char px[] = {255, 0, 0, 0, 0, 255};
    out.write(reinterpret_cast<const char*>(px), sizeof px);
  }
  const ColorRaster img = load_image(dir / "two.ppm");
  EXPECT_EQ(img.width, 2);
  EXPECT_EQ(img.height, 1);
  EXPECT_EQ(img.rgb, (std::vector<std::uint8_t>{255, 0, 0, 0, 0, 255}));
}

TEST(ImageIo, AsciiPgmWithComments) {
  const auto dir = oracle::scratch_dir("io_pgm");
  {
    std::ofstream out(dir / "a.pgm");
    out << "P2\n# comment\n3 1\n255\n0 128 255\n";
  }
  const GrayRaster g = to_grayscale(load_image(dir / "a.pgm"));
  EXPECT_EQ(g.values, (std::vector<std::uint8_t>{0, 128, 255}));
}

TEST(ImageIo, PngAndJpegRoundTrip) {
  const auto dir = oracle::scratch_dir("io_png");
  const GrayRaster img = oracle::random_image(37, 21, 9);
  write_png(img, dir / "g.png");
  EXPECT_EQ(to_grayscale(load_image(dir / "g.png")).values, img.values);

  ColorRaster c(16, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 16; ++x) c.set(x, y, static_cast<std::uint8_t>(x * 16), static_cast<std::uint8_t>(y * 30), 77);
  write_png(c, dir / "c.png");
  EXPECT_EQ(load_image(dir / "c.png").rgb, c.rgb);

  write_jpeg(solid(24, 16, 120, 120, 120), dir / "j.jpg", 95);
  const ColorRaster j = load_image(dir / "j.jpg");
  EXPECT_EQ(j.width, 24);
  EXPECT_EQ(j.height, 16);
  for (auto v : j.rgb) EXPECT_NEAR(v, 120, 2);
}

TEST(ImageIo, FormatChosenByContentNotExtension) {
  const auto dir = oracle::scratch_dir("io_sniff");
  const GrayRaster img = oracle::random_image(5, 4, 2);
  write_png(img, dir / "looks_like.pgm.png");
  fs::rename(dir / "looks_like.pgm.png", dir / "actually_png.ppm");
  EXPECT_EQ(to_grayscale(load_image(dir / "actually_png.ppm")).values, img.values);
}

TEST(ImageIo, ErrorContracts) {
  const auto dir = oracle::scratch_dir("io_err");
  try {
    load_image(dir / "missing.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
    EXPECT_NE(std::string(e.what()).find("file not found"), std::string::npos);
  }
  {
    std::ofstream(dir / "junk.png") << "not an image at all";
  }
  try {
    load_image(dir / "junk.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported format"), std::string::npos);
  }
  {
    std::ofstream out(dir / "trunc.png", std::ios::binary);
    out << "\x89PNG\r\n\x1a\n" << "garbage";
  }
  try {
    load_image(dir / "trunc.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
  }
}

TEST(ImageIo, MaskDisplayPolarity) {
  const auto dir = oracle::scratch_dir("io_mask");
  BinaryMask m(3, 1);
  m.set(0, 0, true);
  write_mask_png(m, dir / "m.png");
  const GrayRaster back = to_grayscale(load_image(dir / "m.png"));
  EXPECT_EQ(back.values, (std::vector<std::uint8_t>{0, 255, 255}));
  write_mask_pbm(m, dir / "m.pbm");
  std::ifstream in(dir / "m.pbm", std::ios::binary);
  std::string magic;
  in >> magic;
  EXPECT_EQ(magic, "P4");
}
