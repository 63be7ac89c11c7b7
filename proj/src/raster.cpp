#include "pavetex/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pavetex/error.hpp"

namespace pavetex {

ColorRaster::ColorRaster(int w, int h)
    : width(w), height(h), rgb(3 * static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}

GrayRaster::GrayRaster(int w, int h, std::uint8_t fill, std::optional<double> scale)
    : width(w),
      height(h),
      values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill),
      mm_per_px(scale) {}

BinaryMask::BinaryMask(int w, int h, bool fill, std::optional<double> scale)
    : width(w),
      height(h),
      bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill ? 1 : 0),
      mm_per_px(scale) {}

std::size_t BinaryMask::foreground_count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

void RoiSpec::validate() const {
  if (width_px <= 0 || height_px <= 0 || target_width_px <= 0 || target_height_px <= 0 ||
      !(roi_width_mm > 0.0) || !(roi_height_mm > 0.0) || x0 < 0 || y0 < 0) {
    throw usage_error("ROI dimensions must be positive and offsets non-negative");
  }
  const double target_aspect = static_cast<double>(target_width_px) / target_height_px;
  const double mm_aspect = roi_width_mm / roi_height_mm;
  if (std::abs(target_aspect / mm_aspect - 1.0) > 1e-3) {
    throw usage_error("target aspect ratio " + std::to_string(target_aspect) +
                      " does not match ROI mm aspect ratio " + std::to_string(mm_aspect));
  }
}

GrayRaster to_grayscale(const ColorRaster& img) {
  GrayRaster out(img.width, img.height);
  const std::size_t n = img.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned r = img.rgb[3 * i];
    const unsigned g = img.rgb[3 * i + 1];
    const unsigned b = img.rgb[3 * i + 2];
    // Weights in thousandths; +500 rounds half away from zero for non-negative sums.
    const unsigned scaled = 299 * r + 587 * g + 114 * b;
    out.values[i] = static_cast<std::uint8_t>(std::min(255u, (scaled + 500) / 1000));
  }
  return out;
}

GrayRaster crop_resize(const GrayRaster& img, const RoiSpec& roi) {
  roi.validate();
  if (roi.x0 + roi.width_px > img.width || roi.y0 + roi.height_px > img.height) {
    throw data_error("ROI " + std::to_string(roi.width_px) + "x" + std::to_string(roi.height_px) +
                     "+" + std::to_string(roi.x0) + "+" + std::to_string(roi.y0) +
                     " exceeds image bounds " + std::to_string(img.width) + "x" +
                     std::to_string(img.height));
  }

  const int tw = roi.target_width_px;
  const int th = roi.target_height_px;
  GrayRaster out(tw, th, 0, roi.mm_per_px());

  const double sx = static_cast<double>(roi.width_px) / tw;
  const double sy = static_cast<double>(roi.height_px) / th;

  // Precompute horizontal taps; sampling is clamped to the ROI so pixels
  // outside it never leak in.
  std::vector<int> x_lo(tw), x_hi(tw);
  std::vector<double> x_w(tw);
  for (int x = 0; x < tw; ++x) {
    double fx = (x + 0.5) * sx - 0.5;
    fx = std::clamp(fx, 0.0, static_cast<double>(roi.width_px - 1));
    const int lo = static_cast<int>(std::floor(fx));
    x_lo[x] = roi.x0 + lo;
    x_hi[x] = roi.x0 + std::min(lo + 1, roi.width_px - 1);
    x_w[x] = fx - lo;
  }

  for (int y = 0; y < th; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(roi.height_px - 1));
    const int lo = static_cast<int>(std::floor(fy));
    const int y0 = roi.y0 + lo;
    const int y1 = roi.y0 + std::min(lo + 1, roi.height_px - 1);
    const double wy = fy - lo;
    for (int x = 0; x < tw; ++x) {
      const double top = img.at(x_lo[x], y0) * (1.0 - x_w[x]) + img.at(x_hi[x], y0) * x_w[x];
      const double bottom = img.at(x_lo[x], y1) * (1.0 - x_w[x]) + img.at(x_hi[x], y1) * x_w[x];
      const double v = top * (1.0 - wy) + bottom * wy;
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return out;
}

GrayRaster transpose(const GrayRaster& img) {
  GrayRaster out(img.height, img.width, 0, img.mm_per_px);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) out.at(y, x) = img.at(x, y);
  return out;
}

BinaryMask transpose(const BinaryMask& mask) {
  BinaryMask out(mask.height, mask.width, false, mask.mm_per_px);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) out.set(y, x, mask.at(x, y));
  return out;
}

BinaryMask rotate90(const BinaryMask& mask) {
  // Clockwise: (x, y) -> (H - 1 - y, x)
  BinaryMask out(mask.height, mask.width, false, mask.mm_per_px);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) out.set(mask.height - 1 - y, x, mask.at(x, y));
  return out;
}

}  // namespace pavetex
