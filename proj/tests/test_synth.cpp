#include <gtest/gtest.h>

#include <fstream>

#include "oracles.hpp"
#include "pavetex/error.hpp"
#include "pavetex/image_io.hpp"
#include "pavetex/segment.hpp"
#include "pavetex/synth.hpp"

using namespace pavetex;

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t lattice_points_in_disk(double r) {
  std::uint64_t n = 0;
  const int k = static_cast<int>(r);
  for (int y = -k; y <= k; ++y)
    for (int x = -k; x <= k; ++x)
      if (x * x + y * y <= r * r) ++n;
  return n;
}

}  // namespace

TEST(CounterRng, MatchesSequentialSplitMix) {
  // Stream key k: draw i equals the (i + 1)-th output of a SplitMix64 state
  // seeded with k.
  const std::uint64_t seed = 12345, stream = 7;
  const std::uint64_t key = seed ^ CounterRng::mix(stream);
  std::uint64_t state = key;
  CounterRng rng(seed, stream);
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t expect = splitmix(state);
    state += 0x9E3779B97F4A7C15ULL;
    EXPECT_EQ(rng.next(), expect);
  }
  EXPECT_EQ(CounterRng(seed, stream).at(41), CounterRng(seed, stream).at(41));
}

TEST(CounterRng, PinnedValues) {
  // SplitMix64 reference: seeding state 0 yields 0xE220A8397B1DCDAF first.
  EXPECT_EQ(CounterRng::mix(0x9E3779B97F4A7C15ULL), 0xE220A8397B1DCDAFULL);
}

TEST(CounterRng, UniformAndNormalMoments) {
  CounterRng rng(1, 99);
  double s = 0, s2 = 0, n1 = 0, n2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    s2 += u * u;
  }
  EXPECT_NEAR(s / n, 0.5, 0.005);
  EXPECT_NEAR(s2 / n - (s / n) * (s / n), 1.0 / 12.0, 0.002);
  CounterRng g(1, 100);
  for (int i = 0; i < n / 10; ++i) {
    const double z = g.normal();
    n1 += z;
    n2 += z * z;
  }
  EXPECT_NEAR(n1 / (n / 10), 0.0, 0.03);
  EXPECT_NEAR(n2 / (n / 10), 1.0, 0.03);
}

TEST(Bimodal, IsoDataNearMidpoint) {
  const GrayRaster img = gen_bimodal(256, 256, 50, 200, 0.5, 1);
  EXPECT_NEAR(isodata_threshold(histogram(img)).threshold, 125, 1);
  EXPECT_EQ(histogram(img).occupied_levels(), 2);
}

TEST(Bimodal, PreconditionsAndDeterminism) {
  EXPECT_THROW(gen_bimodal(8, 8, 50, 200, 1.0, 1), Error);
  EXPECT_THROW(gen_bimodal(8, 8, 50, 200, 0.0, 1), Error);
  EXPECT_THROW(gen_bimodal(0, 8, 50, 200, 0.5, 1), Error);
  EXPECT_EQ(gen_bimodal(64, 32, 1, 2, 0.3, 9), gen_bimodal(64, 32, 1, 2, 0.3, 9));
  EXPECT_NE(gen_bimodal(64, 32, 1, 2, 0.3, 9), gen_bimodal(64, 32, 1, 2, 0.3, 10));
}

TEST(DiskField, SingleCentredDisk) {
  DiskFieldSpec spec;
  spec.width = spec.height = 64;
  const DiskField f = render_disk_field(spec, {{32, 32, 10.0}}, 0.0, 0);
  EXPECT_EQ(f.cap_pixels, lattice_points_in_disk(10.0));
  EXPECT_EQ(f.cap_pixels, 317u);
  const BinaryMask m = binarize(f.image, (spec.bg_gray + spec.cap_gray) / 2, Polarity::kAbove);
  EXPECT_EQ(m.foreground_count(), f.cap_pixels);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) EXPECT_EQ(m.at(x, y), (x - 32) * (x - 32) + (y - 32) * (y - 32) <= 100);
}

TEST(DiskField, ZeroAndDisjointDisks) {
  DiskFieldSpec spec;
  spec.n_disks = 0;
  EXPECT_EQ(gen_disk_field(spec).cap_pixels, 0u);
  const DiskField a = render_disk_field(spec, {{20, 20, 6.0}}, 0.0, 0);
  const DiskField b = render_disk_field(spec, {{80, 80, 9.5}}, 0.0, 0);
  const DiskField ab = render_disk_field(spec, {{20, 20, 6.0}, {80, 80, 9.5}}, 0.0, 0);
  EXPECT_EQ(ab.cap_pixels, a.cap_pixels + b.cap_pixels);
}

TEST(DiskField, GroundTruthAtEveryInteriorThreshold) {
  DiskFieldSpec spec;
  spec.width = 200;
  spec.height = 150;
  spec.n_disks = 25;
  spec.seed = 42;
  const DiskField f = gen_disk_field(spec);
  for (int t = spec.bg_gray; t < spec.cap_gray; ++t)
    ASSERT_EQ(binarize(f.image, t, Polarity::kAbove).foreground_count(), f.cap_pixels);
}

TEST(DiskField, NoOverlapKeepsGap) {
  DiskFieldSpec spec;
  spec.width = spec.height = 300;
  spec.n_disks = 30;
  spec.allow_overlap = false;
  const DiskField f = gen_disk_field(spec);
  ASSERT_EQ(f.disks.size(), 30u);
  for (std::size_t i = 0; i < f.disks.size(); ++i)
    for (std::size_t j = i + 1; j < f.disks.size(); ++j) {
      const double dx = f.disks[i].cx - f.disks[j].cx, dy = f.disks[i].cy - f.disks[j].cy;
      EXPECT_GE(std::sqrt(dx * dx + dy * dy), f.disks[i].radius + f.disks[j].radius + 2.0);
    }
}

TEST(DiskField, ImpossiblePlacement) {
  DiskFieldSpec spec;
  spec.width = spec.height = 40;
  spec.n_disks = 50;
  spec.allow_overlap = false;
  spec.max_retries = 50;
  try {
    gen_disk_field(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kComputation);
    EXPECT_NE(std::string(e.what()).find("impossible placement"), std::string::npos);
  }
}

TEST(DiskField, AggregateBodiesAndNoise) {
  DiskFieldSpec spec;
  spec.aggregate_gray = 130;
  spec.cap_fraction = 0.6;
  spec.seed = 5;
  const DiskField f = gen_disk_field(spec);
  const auto h = histogram(f.image);
  EXPECT_EQ(h.occupied_levels(), 3);
  EXPECT_EQ(binarize(f.image, 170, Polarity::kAbove).foreground_count(), f.cap_pixels);
  EXPECT_GT(binarize(f.image, 100, Polarity::kAbove).foreground_count(), f.cap_pixels);

  spec.noise_sigma = 4.0;
  const DiskField noisy = gen_disk_field(spec);
  EXPECT_EQ(noisy.cap_pixels, f.cap_pixels);
  EXPECT_GT(histogram(noisy.image).occupied_levels(), 3);
  EXPECT_EQ(gen_disk_field(spec).image, noisy.image);
}

TEST(DiskField, FixtureBytesArePinnable) {
  const auto dir = oracle::scratch_dir("synth_png");
  DiskFieldSpec spec;
  spec.seed = 3;
  write_png(gen_disk_field(spec).image, dir / "a.png");
  write_png(gen_disk_field(spec).image, dir / "b.png");
  std::ifstream a(dir / "a.png", std::ios::binary), b(dir / "b.png", std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_FALSE(sa.empty());
  EXPECT_EQ(sa, sb);
}

TEST(Sierpinski, Counts) {
  const BinaryMask d1 = gen_sierpinski(1);
  EXPECT_EQ(d1.width, 3);
  EXPECT_EQ(d1.foreground_count(), 8u);
  EXPECT_FALSE(d1.at(1, 1));
  std::uint64_t expect = 1;
  for (int d = 1; d <= 5; ++d) {
    expect *= 8;
    EXPECT_EQ(gen_sierpinski(d).foreground_count(), expect);
  }
  EXPECT_THROW(gen_sierpinski(0), Error);
  EXPECT_THROW(gen_sierpinski(7), Error);
}

TEST(PolishSequence, CapsShrinkAndLayoutIsShared) {
  DiskFieldSpec spec;
  spec.n_disks = 15;
  spec.allow_overlap = false;
  const std::vector<double> wear = {0.0, 0.2, 0.4};
  const auto seq = gen_polish_sequence(spec, wear, 11);
  ASSERT_EQ(seq.size(), 3u);
  EXPECT_GT(seq[0].cap_pixels, seq[1].cap_pixels);
  EXPECT_GT(seq[1].cap_pixels, seq[2].cap_pixels);
  for (const auto& f : seq) ASSERT_EQ(f.disks.size(), seq[0].disks.size());

  spec.seed = 11;
  EXPECT_EQ(seq[0].image, gen_disk_field(spec).image);
}

TEST(PolishSequence, Preconditions) {
  DiskFieldSpec spec;
  const std::vector<double> descending = {0.4, 0.2};
  const std::vector<double> full = {0.0, 1.0};
  EXPECT_THROW(gen_polish_sequence(spec, descending, 1), Error);
  EXPECT_THROW(gen_polish_sequence(spec, full, 1), Error);
}
