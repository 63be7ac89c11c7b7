#pragma once

#include <vector>

#include "pavetex/raster.hpp"

namespace pavetex {

/// Contrast-limited adaptive histogram equalization parameters.
struct ClaheParams {
  int tiles_x = 8;
  int tiles_y = 8;
  /// Multiple of the uniform bin height (tile_pixels / bins) at which each
  /// tile histogram is clipped. 1.0 flattens the histogram completely.
  double clip_limit = 2.0;
  int bins = 256;

  void validate() const;
};

struct GaussianParams {
  double sigma = 1.0;
  int radius = 3;

  void validate() const;
};

/// Square (2r+1)^2 weight grid, row-major, indexed by offset from the centre.
struct Kernel {
  int radius = 0;
  std::vector<double> weights;

  int size() const { return 2 * radius + 1; }
  double at(int dx, int dy) const { return weights[(dy + radius) * size() + (dx + radius)]; }
};

/// CLAHE with per-tile clipped histograms, one-pass uniform redistribution of
/// the clipped mass and bilinear blending of the tile mappings between tile
/// centres.
///
/// A tile mapping sends each level to the centre of its rank interval on the
/// 256-level output scale:
///   out(v) = 256 * (cdf_below(v) + h(v) / 2) / n - 0.5
/// so an unclipped tile is equalized towards a uniform histogram, and a fully
/// clipped one (clip_limit 1) is close to the identity.
GrayRaster clahe(const GrayRaster& img, const ClaheParams& params);

Kernel gaussian_kernel(const GaussianParams& params);

/// Normalized 1-D factor of the 2-D kernel; the 2-D kernel is its outer product.
std::vector<double> gaussian_kernel_1d(const GaussianParams& params);

/// Separable Gaussian convolution with symmetric-mirror borders, rounded to
/// 8 bits.
GrayRaster gaussian_smooth(const GrayRaster& img, const GaussianParams& params);

/// Symmetric reflection of an out-of-range index into [0, n): ... 1 0 | 0 1 ... n-1 | n-1 ...
int mirror_index(int i, int n);

}  // namespace pavetex
