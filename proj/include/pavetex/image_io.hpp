#pragma once

#include <filesystem>

#include "pavetex/raster.hpp"

namespace pavetex {

/// Decodes a PNG, JPEG or PPM/PGM file (format chosen by magic bytes, not by
/// extension). Grayscale sources are expanded to RGB.
///
/// Throws data Error: "file not found", "unsupported format", or a decoder
/// message for corrupt streams.
ColorRaster load_image(const std::filesystem::path& path);

void write_png(const GrayRaster& img, const std::filesystem::path& path);
void write_png(const ColorRaster& img, const std::filesystem::path& path);
void write_jpeg(const ColorRaster& img, const std::filesystem::path& path, int quality = 95);
void write_pgm(const GrayRaster& img, const std::filesystem::path& path);
void write_ppm(const ColorRaster& img, const std::filesystem::path& path);

/// Writes by extension: .png, .pgm (anything else is rejected).
void write_gray(const GrayRaster& img, const std::filesystem::path& path);

/// Masks are written in display polarity: foreground is black, background
/// white. PBM is the raw P4 variant.
void write_mask_pbm(const BinaryMask& mask, const std::filesystem::path& path);
void write_mask_png(const BinaryMask& mask, const std::filesystem::path& path);
void write_mask(const BinaryMask& mask, const std::filesystem::path& path);

ColorRaster gray_to_color(const GrayRaster& img);

}  // namespace pavetex
