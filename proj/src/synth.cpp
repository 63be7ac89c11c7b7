#include "pavetex/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pavetex/error.hpp"

namespace pavetex {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

enum Stream : std::uint64_t {
  kBimodalStream = 1,
  kPlacementStream = 2,
  kNoiseStreamBase = 1000,
};
}  // namespace

std::uint64_t CounterRng::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(seed ^ mix(stream)) {}

std::uint64_t CounterRng::at(std::uint64_t index) const { return mix(key_ + (index + 1) * kGolden); }

double CounterRng::normal() {
  double s = 0.0;
  for (int i = 0; i < 12; ++i) s += uniform();
  return s - 6.0;
}

GrayRaster gen_bimodal(int width, int height, int low, int high, double fraction_high,
                       std::uint64_t seed) {
  if (width <= 0 || height <= 0) throw usage_error("synthetic image dims must be positive");
  if (low < 0 || high > 255 || low >= high) throw usage_error("bimodal levels need 0 <= low < high <= 255");
  if (!(fraction_high > 0.0 && fraction_high < 1.0)) throw usage_error("fraction_high must lie in (0, 1)");
  GrayRaster img(width, height, static_cast<std::uint8_t>(low));
  const CounterRng rng(seed, kBimodalStream);
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    const double u = static_cast<double>(rng.at(i) >> 11) * 0x1.0p-53;
    if (u < fraction_high) img.values[i] = static_cast<std::uint8_t>(high);
  }
  return img;
}

namespace {

void validate(const DiskFieldSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0) throw usage_error("disk field dims must be positive");
  if (spec.n_disks < 0) throw usage_error("disk count must be non-negative");
  if (!(spec.radius_min > 0.0) || spec.radius_max < spec.radius_min) {
    throw usage_error("radius range must satisfy 0 < min <= max");
  }
  if (spec.cap_gray <= spec.bg_gray) throw usage_error("cap_gray must exceed bg_gray");
  if (spec.aggregate_gray && (*spec.aggregate_gray <= spec.bg_gray || *spec.aggregate_gray >= spec.cap_gray)) {
    throw usage_error("aggregate_gray must lie strictly between bg_gray and cap_gray");
  }
  if (!(spec.cap_fraction > 0.0 && spec.cap_fraction <= 1.0)) throw usage_error("cap_fraction must lie in (0, 1]");
  if (spec.noise_sigma < 0.0) throw usage_error("noise sigma must be non-negative");
}

void stamp_disk(GrayRaster& img, int cx, int cy, double r, std::uint8_t value) {
  if (r <= 0.0) return;
  const int reach = static_cast<int>(std::floor(r));
  const double r2 = r * r;
  for (int dy = -reach; dy <= reach; ++dy) {
    const int y = cy + dy;
    if (y < 0 || y >= img.height) continue;
    for (int dx = -reach; dx <= reach; ++dx) {
      const int x = cx + dx;
      if (x < 0 || x >= img.width) continue;
      if (static_cast<double>(dx * dx + dy * dy) <= r2) img.at(x, y) = value;
    }
  }
}

}  // namespace

DiskField render_disk_field(const DiskFieldSpec& spec, const std::vector<Disk>& disks, double wear,
                            std::uint64_t noise_stream) {
  validate(spec);
  if (!(wear >= 0.0 && wear < 1.0)) throw usage_error("wear fraction must lie in [0, 1)");
  DiskField field;
  field.disks = disks;
  field.image = GrayRaster(spec.width, spec.height, spec.bg_gray, spec.mm_per_px);
  if (spec.aggregate_gray) {
    for (const auto& d : disks) stamp_disk(field.image, d.cx, d.cy, d.radius, *spec.aggregate_gray);
  }
  for (const auto& d : disks) {
    stamp_disk(field.image, d.cx, d.cy, d.radius * spec.cap_fraction * (1.0 - wear), spec.cap_gray);
  }
  field.cap_pixels = static_cast<std::uint64_t>(
      std::count(field.image.values.begin(), field.image.values.end(), spec.cap_gray));

  if (spec.noise_sigma > 0.0) {
    CounterRng rng(spec.seed, kNoiseStreamBase + noise_stream);
    for (auto& v : field.image.values) {
      const double noisy = v + spec.noise_sigma * rng.normal();
      v = static_cast<std::uint8_t>(std::clamp(std::lround(noisy), 0L, 255L));
    }
  }
  return field;
}

DiskField gen_disk_field(const DiskFieldSpec& spec) {
  validate(spec);
  CounterRng rng(spec.seed, kPlacementStream);
  std::vector<Disk> disks;
  disks.reserve(static_cast<std::size_t>(spec.n_disks));
  for (int i = 0; i < spec.n_disks; ++i) {
    bool placed = false;
    const int attempts = spec.allow_overlap ? 1 : spec.max_retries;
    for (int a = 0; a < attempts && !placed; ++a) {
      const double r = spec.radius_min + rng.uniform() * (spec.radius_max - spec.radius_min);
      const int margin = static_cast<int>(std::ceil(r));
      const int span_x = spec.width - 2 * margin;
      const int span_y = spec.height - 2 * margin;
      if (span_x <= 0 || span_y <= 0) break;
      Disk d{margin + static_cast<int>(rng.uniform() * span_x),
             margin + static_cast<int>(rng.uniform() * span_y), r};
      if (!spec.allow_overlap) {
        const bool clash = std::any_of(disks.begin(), disks.end(), [&](const Disk& o) {
          const double dx = d.cx - o.cx, dy = d.cy - o.cy;
          return std::sqrt(dx * dx + dy * dy) < d.radius + o.radius + 2.0;
        });
        if (clash) continue;
      }
      disks.push_back(d);
      placed = true;
    }
    if (!placed) {
      throw computation_error("impossible placement: disk " + std::to_string(i + 1) + " of " +
                              std::to_string(spec.n_disks) + " does not fit");
    }
  }
  return render_disk_field(spec, disks, 0.0, 0);
}

BinaryMask gen_sierpinski(int depth) {
  if (depth < 1 || depth > 6) throw usage_error("Sierpinski depth must be in [1, 6]");
  int side = 1;
  for (int i = 0; i < depth; ++i) side *= 3;
  BinaryMask mask(side, side, false);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      bool keep = true;
      for (int a = x, b = y; a > 0 || b > 0; a /= 3, b /= 3) {
        if (a % 3 == 1 && b % 3 == 1) {
          keep = false;
          break;
        }
      }
      mask.set(x, y, keep);
    }
  }
  return mask;
}

std::vector<DiskField> gen_polish_sequence(const DiskFieldSpec& base,
                                           std::span<const double> wear_fractions,
                                           std::uint64_t seed) {
  for (std::size_t i = 0; i < wear_fractions.size(); ++i) {
    const double f = wear_fractions[i];
    if (!(f >= 0.0 && f < 1.0)) throw usage_error("wear fractions must lie in [0, 1)");
    if (i > 0 && !(f > wear_fractions[i - 1])) throw usage_error("wear fractions must be ascending");
  }
  DiskFieldSpec spec = base;
  spec.seed = seed;
  const DiskField layout = gen_disk_field(spec);
  std::vector<DiskField> out;
  out.reserve(wear_fractions.size());
  for (std::size_t i = 0; i < wear_fractions.size(); ++i) {
    out.push_back(render_disk_field(spec, layout.disks, wear_fractions[i], i));
  }
  return out;
}

}  // namespace pavetex
