#pragma once

#include <array>
#include <cstdint>

#include "pavetex/raster.hpp"

namespace pavetex {

struct Histogram256 {
  std::array<std::uint64_t, 256> counts{};
  std::uint64_t total = 0;

  int min_level() const;  // lowest occupied level, -1 if empty
  int max_level() const;  // highest occupied level, -1 if empty
  int occupied_levels() const;
};

struct ThresholdResult {
  int threshold = 0;      // gray level; foreground/background split is "value > threshold"
  int iterations = 0;
  bool converged = true;
  double value = 0.0;     // unrounded threshold (IsoData), equals `threshold` otherwise
};

enum class Polarity {
  kAbove,  // foreground where value > t
  kBelow,  // foreground where value <= t
};

/// Relative tolerance under which two criterion values count as tied; ties go
/// to the smallest threshold.
inline constexpr double kThresholdTieTolerance = 1e-12;

Histogram256 histogram(const GrayRaster& img);

/// Iterative intermeans (IsoData) threshold. Starts at the midpoint of the
/// occupied range, repeats T <- (mean(v <= T) + mean(v > T)) / 2 until the
/// update moves less than `epsilon` without changing the split level, and
/// rounds half up. Gives up after `max_iterations` with converged = false.
ThresholdResult isodata_threshold(const Histogram256& h, double epsilon = 0.5,
                                  int max_iterations = 100);

/// Otsu: maximizes between-class variance w0 * w1 * (mu0 - mu1)^2.
ThresholdResult otsu_threshold(const Histogram256& h);

/// Kapur maximum entropy: maximizes H(v <= t) + H(v > t).
ThresholdResult max_entropy_threshold(const Histogram256& h);

BinaryMask binarize(const GrayRaster& img, int threshold, Polarity polarity);

/// Foreground area in mm^2. Throws data Error when the mask has no scale.
double area_mm2(const BinaryMask& mask);

}  // namespace pavetex
