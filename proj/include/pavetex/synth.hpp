#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pavetex/raster.hpp"

namespace pavetex {

/// Counter-based generator: the i-th draw of stream `s` under seed `k` is
/// splitmix64(k ^ splitmix64(s) + (i + 1) * 0x9E3779B97F4A7C15). The output is
/// a pure function of (seed, stream, index), so fixtures do not depend on
/// draw order, platform or standard-library version.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t at(std::uint64_t index) const;
  std::uint64_t next() { return at(counter_++); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Approximately standard normal: sum of 12 uniforms minus 6.
  double normal();

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Pixels are independently `high` with probability fraction_high, else `low`.
GrayRaster gen_bimodal(int width, int height, int low, int high, double fraction_high,
                       std::uint64_t seed);

struct Disk {
  int cx = 0;
  int cy = 0;
  double radius = 0.0;
};

/// Bright disks ("protruding caps") on a dark background. When
/// `aggregate_gray` is set, each particle is an aggregate body of the drawn
/// radius with a concentric cap of radius cap_fraction * radius on top.
struct DiskFieldSpec {
  int width = 256;
  int height = 256;
  int n_disks = 20;
  double radius_min = 6.0;
  double radius_max = 14.0;
  std::uint8_t cap_gray = 200;
  std::uint8_t bg_gray = 60;
  std::optional<std::uint8_t> aggregate_gray;
  double cap_fraction = 1.0;
  bool allow_overlap = true;
  int max_retries = 1000;     // per disk, only used without overlap
  double noise_sigma = 0.0;   // optional additive noise, gray levels
  std::optional<double> mm_per_px;
  std::uint64_t seed = 1;
};

struct DiskField {
  GrayRaster image;
  std::uint64_t cap_pixels = 0;  // ground-truth cap union area in pixels
  std::vector<Disk> disks;
};

/// Places the disks (seeded) and renders them.
DiskField gen_disk_field(const DiskFieldSpec& spec);

/// Renders an explicit disk layout; caps shrink by (1 - wear).
DiskField render_disk_field(const DiskFieldSpec& spec, const std::vector<Disk>& disks,
                            double wear, std::uint64_t noise_stream);

/// Sierpinski carpet of side 3^depth, foreground = retained cells.
BinaryMask gen_sierpinski(int depth);

/// One disk layout rendered at each wear fraction; cap radii scale by
/// (1 - f). Fractions must be ascending in [0, 1).
std::vector<DiskField> gen_polish_sequence(const DiskFieldSpec& base,
                                           std::span<const double> wear_fractions,
                                           std::uint64_t seed);

}  // namespace pavetex
