#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pavetex/raster.hpp"

namespace pavetex {

/// Real-valued image plane, row-major.
struct RealGrid {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  RealGrid() = default;
  RealGrid(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}
  static RealGrid from(const GrayRaster& img);

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double sum_squares() const;
};

/// Multi-level orthonormal 2-D Haar decomposition.
struct WaveletPyramid {
  struct Level {
    int in_width = 0;   // size of the approximation this level decomposed
    int in_height = 0;
    RealGrid horizontal;  // low-pass along x, high-pass along y
    RealGrid vertical;    // high-pass along x, low-pass along y
    RealGrid diagonal;
  };
  std::vector<Level> details;  // details[0] is level 1 (finest)
  RealGrid approximation;      // coarsest low-pass band
  std::optional<double> mm_per_px;

  int levels() const { return static_cast<int>(details.size()); }
  double total_energy() const;
};

/// Fraction of mask pixels in the foreground.
double aggregate_ratio(const BinaryMask& mask);

/// Deepest decomposition the image supports: floor(log2(min(w, h))).
int max_wavelet_levels(int width, int height);

/// Orthonormal Haar analysis, recursively on the approximation band. An
/// unpaired trailing sample on an odd-length axis passes into the low band
/// unchanged with a zero detail. Later levels pair coefficients by the number
/// of pixels they cover (unbalanced Haar), so constants give zero detail at
/// every level and energy is preserved exactly.
WaveletPyramid haar_dwt2(const RealGrid& img, int levels);
WaveletPyramid haar_dwt2(const GrayRaster& img, int levels);

/// Exact inverse of haar_dwt2.
RealGrid haar_idwt2(const WaveletPyramid& pyramid);

/// Mean squared detail coefficient per level, pooled over the three subbands.
std::vector<double> level_energies(const WaveletPyramid& pyramid);

struct SmiConfig {
  double band_min_mm = 0.5;
  double band_max_mm = 50.0;
  /// weights[l - 1] applies to level l; levels beyond the vector weigh 1.
  std::vector<double> weights;
  /// Decomposition depth; 0 selects max_wavelet_levels.
  int levels = 0;
};

/// Weighted sum of level energies over levels whose spatial scale
/// mm_per_px * 2^l lies inside the configured band.
double smi(std::span<const double> energies, double mm_per_px, const SmiConfig& config);

/// Convenience: decomposition + energies + band sum for a scaled image.
double smi(const GrayRaster& img, const SmiConfig& config);

struct BoxCountCurve {
  std::vector<int> sizes;
  std::vector<std::uint64_t> counts;
};

/// Dyadic sizes 2, 4, 8, ... not exceeding min(width, height) / 4.
std::vector<int> dyadic_box_sizes(int width, int height);

/// Number of origin-anchored epsilon x epsilon cells (edge cells partial)
/// containing at least one foreground pixel, for each size.
BoxCountCurve box_count(const BinaryMask& mask, std::span<const int> sizes);

struct FractalFit {
  double dimension = 0.0;
  bool degenerate = false;  // every N(eps) equal; dimension reported as 0
  double r2 = 0.0;          // quality of the log-log line
};

/// Least-squares slope of log N(eps) against log(1 / eps).
FractalFit fractal_dimension(const BoxCountCurve& curve);

}  // namespace pavetex
