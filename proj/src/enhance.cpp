#include "pavetex/enhance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pavetex/error.hpp"

namespace pavetex {

void ClaheParams::validate() const {
  if (tiles_x < 1 || tiles_y < 1) throw usage_error("CLAHE tile counts must be >= 1");
  if (!(clip_limit >= 1.0)) {
    throw usage_error("CLAHE clip limit must be >= 1.0 (got " + std::to_string(clip_limit) + ")");
  }
  if (bins < 2 || bins > 256) throw usage_error("CLAHE bin count must be in [2, 256]");
}

void GaussianParams::validate() const {
  if (!(sigma > 0.0)) throw usage_error("Gaussian sigma must be > 0");
  if (radius < 1) throw usage_error("Gaussian radius must be >= 1");
  if (radius < static_cast<int>(std::ceil(2.0 * sigma))) {
    throw usage_error("Gaussian radius must be >= ceil(2 * sigma)");
  }
}

namespace {

// Tile of the pixel whose centre is at x + 0.5, for tiles covering [0, extent)
// evenly.
int tile_of(int x, int extent, int tiles) {
  return static_cast<int>((2LL * x + 1) * tiles / (2LL * extent));
}

struct TileAxis {
  int lo;
  int hi;
  double w;  // weight of `hi`
};

// Neighbouring tile centres around pixel x and the interpolation weight.
std::vector<TileAxis> axis_weights(int extent, int tiles) {
  std::vector<TileAxis> out(extent);
  const double tile_size = static_cast<double>(extent) / tiles;
  for (int x = 0; x < extent; ++x) {
    const double f = (x + 0.5) / tile_size - 0.5;
    if (f <= 0.0) {
      out[x] = {0, 0, 0.0};
    } else if (f >= tiles - 1) {
      out[x] = {tiles - 1, tiles - 1, 0.0};
    } else {
      const int lo = static_cast<int>(std::floor(f));
      out[x] = {lo, lo + 1, f - lo};
    }
  }
  return out;
}

}  // namespace

GrayRaster clahe(const GrayRaster& img, const ClaheParams& params) {
  params.validate();
  if (img.width < params.tiles_x || img.height < params.tiles_y) {
    throw data_error("image " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                     " is smaller than the " + std::to_string(params.tiles_x) + "x" +
                     std::to_string(params.tiles_y) + " tile grid");
  }
  const int tx = params.tiles_x;
  const int ty = params.tiles_y;
  const int bins = params.bins;

  std::vector<int> bin_of(256);
  for (int v = 0; v < 256; ++v) bin_of[v] = v * bins / 256;

  std::vector<int> col_tile(img.width), row_tile(img.height);
  for (int x = 0; x < img.width; ++x) col_tile[x] = tile_of(x, img.width, tx);
  for (int y = 0; y < img.height; ++y) row_tile[y] = tile_of(y, img.height, ty);

  std::vector<long long> counts(static_cast<std::size_t>(tx) * ty * bins, 0);
  std::vector<long long> tile_pixels(static_cast<std::size_t>(tx) * ty, 0);
  for (int y = 0; y < img.height; ++y) {
    const int row = row_tile[y] * tx;
    for (int x = 0; x < img.width; ++x) {
      const int t = row + col_tile[x];
      ++counts[static_cast<std::size_t>(t) * bins + bin_of[img.at(x, y)]];
      ++tile_pixels[t];
    }
  }

  // Per-tile mapping, bin -> real-valued output level.
  std::vector<double> lut(counts.size());
  std::vector<double> hist(bins);
  for (int t = 0; t < tx * ty; ++t) {
    const double n = static_cast<double>(tile_pixels[t]);
    const double limit = params.clip_limit * n / bins;
    double excess = 0.0;
    for (int b = 0; b < bins; ++b) {
      const double h = static_cast<double>(counts[static_cast<std::size_t>(t) * bins + b]);
      if (h > limit) {
        excess += h - limit;
        hist[b] = limit;
      } else {
        hist[b] = h;
      }
    }
    const double share = excess / bins;
    double below = 0.0;
    for (int b = 0; b < bins; ++b) {
      const double h = hist[b] + share;
      lut[static_cast<std::size_t>(t) * bins + b] = 256.0 * (below + 0.5 * h) / n - 0.5;
      below += h;
    }
  }

  const auto xs = axis_weights(img.width, tx);
  const auto ys = axis_weights(img.height, ty);
  GrayRaster out(img.width, img.height, 0, img.mm_per_px);
  auto map = [&](int tile_x, int tile_y, int bin) {
    return lut[(static_cast<std::size_t>(tile_y) * tx + tile_x) * bins + bin];
  };
  for (int y = 0; y < img.height; ++y) {
    const TileAxis& ay = ys[y];
    for (int x = 0; x < img.width; ++x) {
      const TileAxis& ax = xs[x];
      const int b = bin_of[img.at(x, y)];
      const double top = (1.0 - ax.w) * map(ax.lo, ay.lo, b) + ax.w * map(ax.hi, ay.lo, b);
      const double bottom = (1.0 - ax.w) * map(ax.lo, ay.hi, b) + ax.w * map(ax.hi, ay.hi, b);
      const double v = (1.0 - ay.w) * top + ay.w * bottom;
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return out;
}

std::vector<double> gaussian_kernel_1d(const GaussianParams& params) {
  params.validate();
  const int r = params.radius;
  std::vector<double> w(2 * r + 1);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    w[i + r] = std::exp(-(i * i) / (2.0 * params.sigma * params.sigma));
    sum += w[i + r];
  }
  for (double& v : w) v /= sum;
  return w;
}

Kernel gaussian_kernel(const GaussianParams& params) {
  params.validate();
  Kernel k;
  k.radius = params.radius;
  const int size = k.size();
  k.weights.resize(static_cast<std::size_t>(size) * size);
  const double two_var = 2.0 * params.sigma * params.sigma;
  double sum = 0.0;
  for (int dy = -k.radius; dy <= k.radius; ++dy) {
    for (int dx = -k.radius; dx <= k.radius; ++dx) {
      const double w = std::exp(-(dx * dx + dy * dy) / two_var);
      k.weights[(dy + k.radius) * size + (dx + k.radius)] = w;
      sum += w;
    }
  }
  for (double& w : k.weights) w /= sum;
  return k;
}

int mirror_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

GrayRaster gaussian_smooth(const GrayRaster& img, const GaussianParams& params) {
  const auto w = gaussian_kernel_1d(params);
  const int r = params.radius;
  const int width = img.width;
  const int height = img.height;

  std::vector<int> xmap(width + 2 * r), ymap(height + 2 * r);
  for (int i = -r; i < width + r; ++i) xmap[i + r] = mirror_index(i, width);
  for (int i = -r; i < height + r; ++i) ymap[i + r] = mirror_index(i, height);

  std::vector<double> horizontal(img.pixel_count());
  for (int y = 0; y < height; ++y) {
    const std::uint8_t* row = img.values.data() + static_cast<std::size_t>(y) * width;
    double* dst = horizontal.data() + static_cast<std::size_t>(y) * width;
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) acc += w[k + r] * row[xmap[x + k + r]];
      dst[x] = acc;
    }
  }

  GrayRaster out(width, height, 0, img.mm_per_px);
  std::vector<double> acc(width);
  for (int y = 0; y < height; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int k = -r; k <= r; ++k) {
      const double wk = w[k + r];
      const double* src = horizontal.data() + static_cast<std::size_t>(ymap[y + k + r]) * width;
      for (int x = 0; x < width; ++x) acc[x] += wk * src[x];
    }
    for (int x = 0; x < width; ++x) {
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(acc[x]), 0L, 255L));
    }
  }
  return out;
}

}  // namespace pavetex
