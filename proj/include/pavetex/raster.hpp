#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace pavetex {

/// Interleaved 8-bit RGB image, row-major.
struct ColorRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // 3 * width * height bytes

  ColorRaster() = default;
  ColorRaster(int w, int h);

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool valid() const { return width > 0 && height > 0 && rgb.size() == 3 * pixel_count(); }

  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
    rgb[i] = r;
    rgb[i + 1] = g;
    rgb[i + 2] = b;
  }
};

/// 8-bit luminance image. `mm_per_px` is the physical pixel pitch once known
/// (after ROI normalization, or declared for synthetic fixtures).
struct GrayRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;
  std::optional<double> mm_per_px;

  GrayRaster() = default;
  GrayRaster(int w, int h, std::uint8_t fill = 0, std::optional<double> scale = std::nullopt);

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool empty() const { return pixel_count() == 0; }

  std::uint8_t at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }

  bool operator==(const GrayRaster&) const = default;
};

/// Foreground/background mask; `true` marks foreground.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // 0 or 1, one byte per pixel
  std::optional<double> mm_per_px;

  BinaryMask() = default;
  BinaryMask(int w, int h, bool fill = false, std::optional<double> scale = std::nullopt);

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }

  std::size_t foreground_count() const;

  bool operator==(const BinaryMask&) const = default;
};

/// Region of interest in source pixels plus the physical extent it covers and
/// the normalized output size.
///
/// The source rectangle is [x0, x0 + width_px) x [y0, y0 + height_px). After
/// resampling to target_width_px x target_height_px the pixel pitch is
/// roi_width_mm / target_width_px.
struct RoiSpec {
  int x0 = 0;
  int y0 = 0;
  int width_px = 0;
  int height_px = 0;
  double roi_width_mm = 100.0;
  double roi_height_mm = 75.0;
  int target_width_px = 3400;
  int target_height_px = 2550;

  /// Throws usage Error if any dimension is non-positive or the target
  /// aspect ratio disagrees with the mm aspect ratio by more than 0.1%.
  void validate() const;
  double mm_per_px() const { return roi_width_mm / target_width_px; }
};

/// Weighted-average luminance, 0.299 R + 0.587 G + 0.114 B, rounded half away
/// from zero. Computed in exact integer arithmetic.
GrayRaster to_grayscale(const ColorRaster& img);

/// Crops the ROI and resamples it bilinearly (pixel-center convention) to the
/// target size. Output carries mm_per_px from the ROI.
GrayRaster crop_resize(const GrayRaster& img, const RoiSpec& roi);

/// Row/column swap; used by symmetry tests and rotation helpers.
GrayRaster transpose(const GrayRaster& img);
BinaryMask transpose(const BinaryMask& mask);
BinaryMask rotate90(const BinaryMask& mask);

}  // namespace pavetex
