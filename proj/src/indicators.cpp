#include "pavetex/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "pavetex/error.hpp"

namespace pavetex {

RealGrid RealGrid::from(const GrayRaster& img) {
  RealGrid g(img.width, img.height);
  std::copy(img.values.begin(), img.values.end(), g.values.begin());
  return g;
}

double RealGrid::sum_squares() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s;
}

double WaveletPyramid::total_energy() const {
  double e = approximation.sum_squares();
  for (const auto& l : details) {
    e += l.horizontal.sum_squares() + l.vertical.sum_squares() + l.diagonal.sum_squares();
  }
  return e;
}

double aggregate_ratio(const BinaryMask& mask) {
  if (mask.pixel_count() == 0) throw data_error("aggregate ratio of an empty mask");
  return static_cast<double>(mask.foreground_count()) / static_cast<double>(mask.pixel_count());
}

int max_wavelet_levels(int width, int height) {
  int levels = 0;
  const int m = std::min(width, height);
  while ((2LL << levels) <= m) ++levels;
  return levels;
}

namespace {

// Each approximation coefficient stands for a block of original samples.
// Merging blocks of n1 and n2 samples with the rotation [[c, s], [s, -c]],
// c = sqrt(n1 / (n1 + n2)), s = sqrt(n2 / (n1 + n2)), stays orthonormal and
// sends constants to zero detail; equal blocks give the usual 1/sqrt(2) Haar
// step. A trailing odd block passes through to the low band.
struct Rotation {
  double c, s;
};

Rotation rotation(int n1, int n2) {
  const double n = static_cast<double>(n1 + n2);
  return {std::sqrt(n1 / n), std::sqrt(n2 / n)};
}

std::vector<int> merged_counts(const std::vector<int>& n) {
  std::vector<int> out;
  out.reserve((n.size() + 1) / 2);
  for (std::size_t i = 0; i < n.size(); i += 2) out.push_back(n[i] + (i + 1 < n.size() ? n[i + 1] : 0));
  return out;
}

// Block sizes of the approximation coefficients entering each level.
std::vector<std::vector<int>> block_sizes(int length, int levels) {
  std::vector<std::vector<int>> out;
  out.emplace_back(static_cast<std::size_t>(length), 1);
  for (int l = 1; l < levels; ++l) out.push_back(merged_counts(out.back()));
  return out;
}

// Splits along x: low and high halves of ceil(w/2) columns each.
void split_rows(const RealGrid& in, const std::vector<int>& n, RealGrid& low, RealGrid& high) {
  const int half = (in.width + 1) / 2;
  low = RealGrid(half, in.height);
  high = RealGrid(half, in.height);
  for (int i = 0; i < half; ++i) {
    const int x = 2 * i;
    if (x + 1 < in.width) {
      const Rotation r = rotation(n[x], n[x + 1]);
      for (int y = 0; y < in.height; ++y) {
        const double a = in.at(x, y), b = in.at(x + 1, y);
        low.at(i, y) = r.c * a + r.s * b;
        high.at(i, y) = r.s * a - r.c * b;
      }
    } else {
      for (int y = 0; y < in.height; ++y) low.at(i, y) = in.at(x, y);
    }
  }
}

void split_cols(const RealGrid& in, const std::vector<int>& n, RealGrid& low, RealGrid& high) {
  const int half = (in.height + 1) / 2;
  low = RealGrid(in.width, half);
  high = RealGrid(in.width, half);
  for (int i = 0; i < half; ++i) {
    const int y = 2 * i;
    if (y + 1 < in.height) {
      const Rotation r = rotation(n[y], n[y + 1]);
      for (int x = 0; x < in.width; ++x) {
        const double a = in.at(x, y), b = in.at(x, y + 1);
        low.at(x, i) = r.c * a + r.s * b;
        high.at(x, i) = r.s * a - r.c * b;
      }
    } else {
      for (int x = 0; x < in.width; ++x) low.at(x, i) = in.at(x, y);
    }
  }
}

RealGrid merge_rows(const RealGrid& low, const RealGrid& high, const std::vector<int>& n, int width) {
  RealGrid out(width, low.height);
  for (int i = 0; i < low.width; ++i) {
    const int x = 2 * i;
    if (x + 1 < width) {
      const Rotation r = rotation(n[x], n[x + 1]);
      for (int y = 0; y < low.height; ++y) {
        out.at(x, y) = r.c * low.at(i, y) + r.s * high.at(i, y);
        out.at(x + 1, y) = r.s * low.at(i, y) - r.c * high.at(i, y);
      }
    } else {
      for (int y = 0; y < low.height; ++y) out.at(x, y) = low.at(i, y);
    }
  }
  return out;
}

RealGrid merge_cols(const RealGrid& low, const RealGrid& high, const std::vector<int>& n, int height) {
  RealGrid out(low.width, height);
  for (int i = 0; i < low.height; ++i) {
    const int y = 2 * i;
    if (y + 1 < height) {
      const Rotation r = rotation(n[y], n[y + 1]);
      for (int x = 0; x < low.width; ++x) {
        out.at(x, y) = r.c * low.at(x, i) + r.s * high.at(x, i);
        out.at(x, y + 1) = r.s * low.at(x, i) - r.c * high.at(x, i);
      }
    } else {
      for (int x = 0; x < low.width; ++x) out.at(x, y) = low.at(x, i);
    }
  }
  return out;
}

}  // namespace

WaveletPyramid haar_dwt2(const RealGrid& img, int levels) {
  if (levels < 1) throw usage_error("wavelet levels must be >= 1");
  if (img.width < (1 << std::min(levels, 30)) || img.height < (1 << std::min(levels, 30)) ||
      levels > 30) {
    throw usage_error("too many wavelet levels (" + std::to_string(levels) + ") for a " +
                      std::to_string(img.width) + "x" + std::to_string(img.height) + " image");
  }
  const auto nx = block_sizes(img.width, levels);
  const auto ny = block_sizes(img.height, levels);
  WaveletPyramid p;
  RealGrid current = img;
  for (int l = 0; l < levels; ++l) {
    WaveletPyramid::Level level;
    level.in_width = current.width;
    level.in_height = current.height;
    RealGrid low_x, high_x, ll;
    split_rows(current, nx[l], low_x, high_x);
    split_cols(low_x, ny[l], ll, level.horizontal);
    split_cols(high_x, ny[l], level.vertical, level.diagonal);
    p.details.push_back(std::move(level));
    current = std::move(ll);
  }
  p.approximation = std::move(current);
  return p;
}

WaveletPyramid haar_dwt2(const GrayRaster& img, int levels) {
  WaveletPyramid p = haar_dwt2(RealGrid::from(img), levels);
  p.mm_per_px = img.mm_per_px;
  return p;
}

RealGrid haar_idwt2(const WaveletPyramid& pyramid) {
  if (pyramid.details.empty()) return pyramid.approximation;
  const auto nx = block_sizes(pyramid.details[0].in_width, pyramid.levels());
  const auto ny = block_sizes(pyramid.details[0].in_height, pyramid.levels());
  RealGrid current = pyramid.approximation;
  for (int l = pyramid.levels() - 1; l >= 0; --l) {
    const auto& level = pyramid.details[l];
    RealGrid low_x = merge_cols(current, level.horizontal, ny[l], level.in_height);
    RealGrid high_x = merge_cols(level.vertical, level.diagonal, ny[l], level.in_height);
    current = merge_rows(low_x, high_x, nx[l], level.in_width);
  }
  return current;
}

std::vector<double> level_energies(const WaveletPyramid& pyramid) {
  std::vector<double> out;
  out.reserve(pyramid.details.size());
  for (const auto& l : pyramid.details) {
    const double sum = l.horizontal.sum_squares() + l.vertical.sum_squares() + l.diagonal.sum_squares();
    const std::size_t n = l.horizontal.values.size() + l.vertical.values.size() + l.diagonal.values.size();
    out.push_back(n ? sum / static_cast<double>(n) : 0.0);
  }
  return out;
}

double smi(std::span<const double> energies, double mm_per_px, const SmiConfig& config) {
  if (!(mm_per_px > 0.0)) throw data_error("SMI needs a physical pixel scale");
  double total = 0.0;
  int selected = 0;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    const int level = static_cast<int>(i) + 1;
    const double scale = mm_per_px * std::ldexp(1.0, level);
    if (scale < config.band_min_mm || scale > config.band_max_mm) continue;
    const double w = i < config.weights.size() ? config.weights[i] : 1.0;
    total += w * energies[i];
    ++selected;
  }
  if (selected == 0) {
    throw computation_error("no wavelet level falls inside the macrotexture band [" +
                            std::to_string(config.band_min_mm) + ", " +
                            std::to_string(config.band_max_mm) + "] mm");
  }
  return total;
}

double smi(const GrayRaster& img, const SmiConfig& config) {
  if (!img.mm_per_px) throw data_error("SMI needs a physical pixel scale");
  const int levels = config.levels > 0 ? config.levels : max_wavelet_levels(img.width, img.height);
  const auto energies = level_energies(haar_dwt2(img, levels));
  return smi(energies, *img.mm_per_px, config);
}

std::vector<int> dyadic_box_sizes(int width, int height) {
  std::vector<int> sizes;
  const int limit = std::min(width, height) / 4;
  for (int s = 2; s <= limit; s *= 2) sizes.push_back(s);
  return sizes;
}

BoxCountCurve box_count(const BinaryMask& mask, std::span<const int> sizes) {
  if (sizes.empty()) throw usage_error("box counting needs at least one box size");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] <= 0) throw usage_error("box sizes must be positive");
    if (i > 0 && sizes[i] <= sizes[i - 1]) throw usage_error("box sizes must be strictly ascending");
  }
  if (mask.foreground_count() == 0) throw computation_error("no foreground to count");

  BoxCountCurve curve;
  for (int eps : sizes) {
    const int cells_x = (mask.width + eps - 1) / eps;
    const int cells_y = (mask.height + eps - 1) / eps;
    std::vector<std::uint8_t> occupied(static_cast<std::size_t>(cells_x) * cells_y, 0);
    for (int y = 0; y < mask.height; ++y) {
      std::uint8_t* row = occupied.data() + static_cast<std::size_t>(y / eps) * cells_x;
      const std::uint8_t* bits = mask.bits.data() + static_cast<std::size_t>(y) * mask.width;
      for (int x = 0; x < mask.width; ++x) {
        if (bits[x]) row[x / eps] = 1;
      }
    }
    curve.sizes.push_back(eps);
    curve.counts.push_back(static_cast<std::uint64_t>(std::count(occupied.begin(), occupied.end(), 1)));
  }
  return curve;
}

FractalFit fractal_dimension(const BoxCountCurve& curve) {
  const std::size_t n = curve.sizes.size();
  if (n < 3 || curve.counts.size() != n) {
    throw computation_error("fractal dimension needs at least 3 box sizes");
  }
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (curve.sizes[i] == curve.sizes[j]) throw computation_error("box sizes must be distinct");
    }
  }
  for (auto c : curve.counts) {
    if (c == 0) throw computation_error("box count of zero cannot be log-transformed");
  }
  FractalFit fit;
  if (std::all_of(curve.counts.begin(), curve.counts.end(),
                  [&](auto c) { return c == curve.counts.front(); })) {
    fit.degenerate = true;
    return fit;
  }

  std::vector<double> xs(n), ys(n);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = -std::log(static_cast<double>(curve.sizes[i]));
    ys[i] = std::log(static_cast<double>(curve.counts[i]));
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.dimension = sxy / sxx;
  fit.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace pavetex
