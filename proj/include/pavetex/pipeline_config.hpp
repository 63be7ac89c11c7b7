#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pavetex/enhance.hpp"
#include "pavetex/indicators.hpp"
#include "pavetex/raster.hpp"

namespace pavetex {

enum class ThresholdMode { kFixed, kIsodata };
enum class Aggregation { kMean, kMedian, kPerImage };

struct IndicatorSet {
  bool area = true;
  bool ar = true;
  bool smi = true;
  bool fd = true;

  static IndicatorSet parse(const std::string& csv);  // "area,ar,smi,fd"
  std::string to_string() const;
  bool none() const { return !area && !ar && !smi && !fd; }
  bool operator==(const IndicatorSet&) const = default;
};

struct FdConfig {
  std::vector<int> box_sizes;  // empty: dyadic sizes up to min(W, H) / 4
  bool operator==(const FdConfig&) const = default;
};

/// Every parameter that can change an indicator value.
struct PipelineConfig {
  std::optional<RoiSpec> roi;
  /// Source pixel pitch when no ROI normalization is applied.
  std::optional<double> mm_per_px;

  bool clahe_enabled = true;
  ClaheParams clahe;
  bool gaussian_enabled = true;
  GaussianParams gaussian;

  ThresholdMode threshold_mode = ThresholdMode::kFixed;
  std::map<std::string, int> threshold_table = default_threshold_table();
  double isodata_epsilon = 0.5;
  int isodata_max_iterations = 100;

  IndicatorSet indicators;
  SmiConfig smi;
  FdConfig fd;
  Aggregation aggregation = Aggregation::kMean;

  static std::map<std::string, int> default_threshold_table() {
    return {{"DGAC", 127}, {"ChipSeal", 124}, {"OGFC", 115}};
  }

  /// Throws usage Error for out-of-range values.
  void validate() const;

  /// Fixed-mode threshold for a mixture; throws data Error when missing.
  int fixed_threshold(const std::string& mixture) const;

  /// Canonical key = value text, one key per line in a fixed order.
  std::string to_text() const;
  /// 16 hex digits of FNV-1a 64 over to_text().
  std::string fingerprint() const;
};

bool operator==(const RoiSpec& a, const RoiSpec& b);
bool operator==(const ClaheParams& a, const ClaheParams& b);
bool operator==(const GaussianParams& a, const GaussianParams& b);
bool operator==(const SmiConfig& a, const SmiConfig& b);
bool operator==(const PipelineConfig& a, const PipelineConfig& b);

/// Parses the flat key = value format ('#' comments, blank lines allowed).
/// Unknown keys are usage errors.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Applies a single key = value assignment (used by CLI overrides).
void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value);

/// Environment variable naming the default config file.
inline constexpr const char* kConfigEnvVar = "PAVETEX_CONFIG";

std::uint64_t fnv1a64(std::string_view bytes);

/// Round-trip number formatting shared by config text and CSV sidecars.
std::string format_double(double v);

}  // namespace pavetex
