#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pavetex/indicators.hpp"
#include "pavetex/pipeline_config.hpp"
#include "pavetex/raster.hpp"
#include "pavetex/stats.hpp"

namespace pavetex {

/// One photographed sample. `image_path` is kept as written in the manifest;
/// relative paths resolve against `base_dir`.
struct SampleRecord {
  std::string image_path;
  std::string mixture;
  std::optional<double> dft40;
  std::optional<double> polish_cycles_k;
  std::optional<std::string> lighting_tag;
  std::filesystem::path base_dir;

  std::filesystem::path resolved_path() const;
  bool operator==(const SampleRecord& o) const {
    return image_path == o.image_path && mixture == o.mixture && dft40 == o.dft40 &&
           polish_cycles_k == o.polish_cycles_k && lighting_tag == o.lighting_tag;
  }
};

/// Reads the manifest CSV (header: image_path,mixture,dft40,polish_cycles_k
/// and optionally lighting_tag; columns in any order).
std::vector<SampleRecord> load_manifest(const std::filesystem::path& path);
std::vector<SampleRecord> parse_manifest(const std::string& text, const std::filesystem::path& base_dir = {});

struct IndicatorValues {
  std::optional<double> area_mm2;
  std::optional<double> ar;
  std::optional<double> smi;
  std::optional<double> fd;

  std::optional<double> get(const std::string& name) const;
  bool operator==(const IndicatorValues&) const = default;
};

struct IndicatorResult {
  SampleRecord record;
  bool ok = true;
  std::string error;  // stage-annotated message when !ok
  IndicatorValues values;
  int threshold = -1;
  double mm_per_px = 0.0;
  std::string config_fingerprint;
  nlohmann::json provenance = nlohmann::json::object();

  bool operator==(const IndicatorResult& o) const {
    return record == o.record && ok == o.ok && error == o.error && values == o.values &&
           threshold == o.threshold && mm_per_px == o.mm_per_px &&
           config_fingerprint == o.config_fingerprint && provenance == o.provenance;
  }
};

/// Full chain: load -> grayscale -> ROI crop/resize -> CLAHE -> Gaussian ->
/// threshold -> binarize -> indicators. Stage failures surface as StageError.
IndicatorResult run_pipeline(const SampleRecord& record, const PipelineConfig& cfg);
IndicatorResult run_pipeline(const ColorRaster& image, const SampleRecord& record, const PipelineConfig& cfg);
/// Entry point after grayscale conversion (synthetic fixtures).
IndicatorResult run_pipeline(const GrayRaster& gray, const SampleRecord& record, const PipelineConfig& cfg);

/// The normalized, enhanced grayscale image the indicators are computed on.
GrayRaster preprocess(const GrayRaster& gray, const PipelineConfig& cfg);

/// Runs every record (optionally on several threads). Failures are captured
/// per row; the output is sorted by (mixture, polish_cycles_k, image_path,
/// lighting_tag) regardless of thread count.
std::vector<IndicatorResult> run_batch(const std::vector<SampleRecord>& records,
                                       const PipelineConfig& cfg, unsigned threads = 1);

void sort_results(std::vector<IndicatorResult>& results);

/// Per-mixture (indicator, dft40) pairs for rows with a measured friction.
/// Rows sharing (polish_cycles_k, dft40) are combined per `aggregation`.
std::vector<ObservationSet> build_observations(const std::vector<IndicatorResult>& results,
                                               const std::string& indicator,
                                               Aggregation aggregation);

struct Report {
  std::string config_fingerprint;
  std::string config_text;
  std::vector<IndicatorResult> results;
  std::vector<RegressionModel> models;
};

nlohmann::json result_to_json(const IndicatorResult& r);
IndicatorResult result_from_json(const nlohmann::json& j);

/// Writes the report JSON and one plot-data CSV per mixture
/// (<stem>.<mixture>.plot.csv next to the report). Returns the CSV paths.
std::vector<std::filesystem::path> write_report(const std::vector<IndicatorResult>& results,
                                                const std::vector<RegressionModel>& models,
                                                const std::filesystem::path& path,
                                                const PipelineConfig* cfg = nullptr);
Report read_report(const std::filesystem::path& path);

/// Writes a box-count curve as "box_size,count" CSV.
void write_box_count_csv(const BoxCountCurve& curve, const std::filesystem::path& path);

inline const std::vector<std::string>& indicator_names() {
  static const std::vector<std::string> names = {"area", "ar", "smi", "fd"};
  return names;
}

}  // namespace pavetex
