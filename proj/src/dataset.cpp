#include "pavetex/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "pavetex/enhance.hpp"
#include "pavetex/error.hpp"
#include "pavetex/image_io.hpp"
#include "pavetex/segment.hpp"

namespace pavetex {
namespace fs = std::filesystem;
using nlohmann::json;

fs::path SampleRecord::resolved_path() const {
  const fs::path p(image_path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string& line, int line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw data_error("manifest line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(trim(cur));
  return fields;
}

std::optional<double> parse_optional_number(const std::string& field, const char* column, int line_no) {
  if (field.empty()) return std::nullopt;
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [p, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) {
    throw data_error("manifest line " + std::to_string(line_no) + ": cannot parse " + column + " '" +
                     field + "'");
  }
  return v;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

std::string fmt_opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::vector<SampleRecord> parse_manifest(const std::string& text, const fs::path& base_dir) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    header = split_csv_line(line, line_no);
  }
  if (header.empty()) throw data_error("manifest is empty");

  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!column.emplace(header[i], i).second) throw data_error("manifest: duplicate column '" + header[i] + "'");
  }
  for (const char* required : {"image_path", "mixture", "dft40", "polish_cycles_k"}) {
    if (!column.count(required)) throw data_error(std::string("manifest: missing required column '") + required + "'");
  }
  for (const auto& [name, idx] : column) {
    if (name != "image_path" && name != "mixture" && name != "dft40" && name != "polish_cycles_k" &&
        name != "lighting_tag") {
      throw data_error("manifest: unknown column '" + name + "'");
    }
  }

  std::vector<SampleRecord> records;
  std::set<std::pair<std::string, std::string>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line, line_no);
    if (fields.size() > header.size()) {
      throw data_error("manifest line " + std::to_string(line_no) + ": too many fields");
    }
    fields.resize(header.size());
    auto field = [&](const char* name) -> const std::string& { return fields[column.at(name)]; };

    SampleRecord r;
    r.base_dir = base_dir;
    r.image_path = field("image_path");
    r.mixture = canonical_mixture(field("mixture"));
    if (r.image_path.empty() || r.mixture.empty()) {
      throw data_error("manifest line " + std::to_string(line_no) + ": image_path and mixture are required");
    }
    r.dft40 = parse_optional_number(field("dft40"), "dft40", line_no);
    r.polish_cycles_k = parse_optional_number(field("polish_cycles_k"), "polish_cycles_k", line_no);
    if (r.dft40 && !(*r.dft40 > 0.0 && *r.dft40 < 1.5)) {
      throw data_error("manifest line " + std::to_string(line_no) + ": dft40 must lie in (0, 1.5)");
    }
    if (r.polish_cycles_k && *r.polish_cycles_k < 0.0) {
      throw data_error("manifest line " + std::to_string(line_no) + ": polish_cycles_k must be >= 0");
    }
    if (column.count("lighting_tag") && !field("lighting_tag").empty()) r.lighting_tag = field("lighting_tag");
    if (!seen.emplace(r.image_path, r.lighting_tag.value_or("")).second) {
      throw data_error("manifest line " + std::to_string(line_no) + ": duplicate image_path/lighting_tag '" +
                       r.image_path + "'");
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<SampleRecord> load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot read manifest " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str(), path.parent_path());
}

// ---------------------------------------------------------------------------
// Pipeline

std::optional<double> IndicatorValues::get(const std::string& name) const {
  if (name == "area") return area_mm2;
  if (name == "ar") return ar;
  if (name == "smi") return smi;
  if (name == "fd") return fd;
  throw usage_error("unknown indicator '" + name + "'");
}

namespace {

template <typename F>
auto in_stage(const char* name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.kind(), e.what());
  } catch (const std::exception& e) {
    throw StageError(name, ErrorKind::kComputation, e.what());
  }
}

GrayRaster normalize_geometry(const GrayRaster& gray, const PipelineConfig& cfg) {
  if (cfg.roi) return crop_resize(gray, *cfg.roi);
  GrayRaster out = gray;
  if (cfg.mm_per_px) out.mm_per_px = cfg.mm_per_px;
  return out;
}

GrayRaster enhance(const GrayRaster& normalized, const PipelineConfig& cfg, json& prov) {
  GrayRaster img = normalized;
  if (cfg.clahe_enabled) {
    img = in_stage("clahe", [&] { return clahe(img, cfg.clahe); });
    prov["stages"].push_back("clahe");
  }
  if (cfg.gaussian_enabled) {
    img = in_stage("gaussian", [&] { return gaussian_smooth(img, cfg.gaussian); });
    prov["stages"].push_back("gaussian");
  }
  return img;
}

}  // namespace

GrayRaster preprocess(const GrayRaster& gray, const PipelineConfig& cfg) {
  json scratch;
  const GrayRaster normalized = in_stage("roi", [&] { return normalize_geometry(gray, cfg); });
  return enhance(normalized, cfg, scratch);
}

IndicatorResult run_pipeline(const GrayRaster& gray, const SampleRecord& record, const PipelineConfig& cfg) {
  in_stage("config", [&] { cfg.validate(); });

  IndicatorResult res;
  res.record = record;
  res.config_fingerprint = cfg.fingerprint();
  json& prov = res.provenance;
  prov["stages"] = json::array({"load", "grayscale"});
  prov["input"] = {{"width", gray.width}, {"height", gray.height}};

  const GrayRaster normalized = in_stage("roi", [&] { return normalize_geometry(gray, cfg); });
  prov["stages"].push_back("roi");
  if (cfg.roi) {
    const auto& r = *cfg.roi;
    prov["roi"] = {{"x0", r.x0}, {"y0", r.y0}, {"width_px", r.width_px}, {"height_px", r.height_px},
                   {"width_mm", r.roi_width_mm}, {"height_mm", r.roi_height_mm},
                   {"target_width_px", r.target_width_px}, {"target_height_px", r.target_height_px},
                   {"resampling", "bilinear"}};
  } else {
    prov["roi"] = nullptr;
  }
  res.mm_per_px = normalized.mm_per_px.value_or(0.0);
  prov["mm_per_px"] = normalized.mm_per_px ? json(*normalized.mm_per_px) : json(nullptr);
  prov["clahe"] = {{"enabled", cfg.clahe_enabled}, {"tiles_x", cfg.clahe.tiles_x},
                   {"tiles_y", cfg.clahe.tiles_y}, {"clip_limit", cfg.clahe.clip_limit},
                   {"bins", cfg.clahe.bins}};
  prov["gaussian"] = {{"enabled", cfg.gaussian_enabled}, {"sigma", cfg.gaussian.sigma},
                      {"radius", cfg.gaussian.radius}, {"border", "mirror"}};

  const GrayRaster enhanced = enhance(normalized, cfg, prov);

  ThresholdResult t = in_stage("threshold", [&] {
    if (cfg.threshold_mode == ThresholdMode::kFixed) {
      ThresholdResult fixed;
      fixed.threshold = cfg.fixed_threshold(record.mixture);
      fixed.value = fixed.threshold;
      return fixed;
    }
    return isodata_threshold(histogram(enhanced), cfg.isodata_epsilon, cfg.isodata_max_iterations);
  });
  prov["stages"].push_back("threshold");
  res.threshold = t.threshold;
  prov["threshold"] = {{"mode", cfg.threshold_mode == ThresholdMode::kFixed ? "fixed" : "isodata"},
                       {"value", t.threshold},
                       {"table", cfg.threshold_table}};
  if (cfg.threshold_mode == ThresholdMode::kIsodata) {
    prov["threshold"]["unrounded"] = t.value;
    prov["threshold"]["iterations"] = t.iterations;
    prov["threshold"]["converged"] = t.converged;
    prov["threshold"]["epsilon"] = cfg.isodata_epsilon;
    prov["threshold"]["max_iterations"] = cfg.isodata_max_iterations;
  }

  const BinaryMask mask = in_stage("binarize", [&] { return binarize(enhanced, t.threshold, Polarity::kAbove); });
  prov["stages"].push_back("binarize");

  in_stage("indicators", [&] {
    if (cfg.indicators.area) {
      res.values.area_mm2 = area_mm2(mask);
      prov["area"] = {{"polarity", "above"}, {"foreground_px", mask.foreground_count()}};
    }
    if (cfg.indicators.ar) {
      const ThresholdResult at = otsu_threshold(histogram(normalized));
      const BinaryMask agg = binarize(normalized, at.threshold, Polarity::kAbove);
      res.values.ar = aggregate_ratio(agg);
      prov["ar"] = {{"method", "otsu"}, {"source", "pre-enhancement"}, {"threshold", at.threshold},
                    {"polarity", "above"}};
    }
    if (cfg.indicators.smi) {
      if (!enhanced.mm_per_px) throw data_error("SMI needs a physical pixel scale");
      const int levels = cfg.smi.levels > 0 ? cfg.smi.levels : max_wavelet_levels(enhanced.width, enhanced.height);
      const auto energies = level_energies(haar_dwt2(enhanced, levels));
      res.values.smi = smi(energies, *enhanced.mm_per_px, cfg.smi);
      prov["smi"] = {{"wavelet", "haar"}, {"levels", levels}, {"band_min_mm", cfg.smi.band_min_mm},
                     {"band_max_mm", cfg.smi.band_max_mm}, {"weights", cfg.smi.weights},
                     {"energies", energies}};
    }
    if (cfg.indicators.fd) {
      const ThresholdResult ft = max_entropy_threshold(histogram(enhanced));
      const BinaryMask concave = binarize(enhanced, ft.threshold, Polarity::kBelow);
      const auto sizes = cfg.fd.box_sizes.empty() ? dyadic_box_sizes(concave.width, concave.height)
                                                  : cfg.fd.box_sizes;
      const BoxCountCurve curve = box_count(concave, sizes);
      const FractalFit fit = fractal_dimension(curve);
      res.values.fd = fit.dimension;
      prov["fd"] = {{"method", "max-entropy"}, {"threshold", ft.threshold}, {"polarity", "below"},
                    {"box_sizes", curve.sizes}, {"box_counts", curve.counts},
                    {"degenerate", fit.degenerate}, {"fit_r2", fit.r2}};
    }
  });
  prov["stages"].push_back("indicators");
  return res;
}

IndicatorResult run_pipeline(const ColorRaster& image, const SampleRecord& record, const PipelineConfig& cfg) {
  const GrayRaster gray = in_stage("grayscale", [&] { return to_grayscale(image); });
  return run_pipeline(gray, record, cfg);
}

IndicatorResult run_pipeline(const SampleRecord& record, const PipelineConfig& cfg) {
  const ColorRaster image = in_stage("load", [&] { return load_image(record.resolved_path()); });
  return run_pipeline(image, record, cfg);
}

void sort_results(std::vector<IndicatorResult>& results) {
  auto key = [](const IndicatorResult& r) {
    return std::make_tuple(r.record.mixture, r.record.polish_cycles_k.has_value(),
                           r.record.polish_cycles_k.value_or(0.0), r.record.image_path,
                           r.record.lighting_tag.value_or(""));
  };
  std::stable_sort(results.begin(), results.end(),
                   [&](const IndicatorResult& a, const IndicatorResult& b) { return key(a) < key(b); });
}

std::vector<IndicatorResult> run_batch(const std::vector<SampleRecord>& records, const PipelineConfig& cfg,
                                       unsigned threads) {
  std::vector<IndicatorResult> results(records.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      try {
        results[i] = run_pipeline(records[i], cfg);
      } catch (const std::exception& e) {
        IndicatorResult failed;
        failed.record = records[i];
        failed.ok = false;
        failed.error = e.what();
        failed.config_fingerprint = cfg.fingerprint();
        results[i] = std::move(failed);
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(records.size())));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  sort_results(results);
  return results;
}

std::vector<ObservationSet> build_observations(const std::vector<IndicatorResult>& results,
                                               const std::string& indicator, Aggregation aggregation) {
  // mixture -> (cycles, dft40) -> indicator values
  std::map<std::string, std::map<std::pair<std::optional<double>, double>, std::vector<double>>> groups;
  std::map<std::string, ObservationSet> per_image;
  for (const auto& r : results) {
    if (!r.ok || !r.record.dft40) continue;
    const auto v = r.values.get(indicator);
    if (!v) continue;
    if (aggregation == Aggregation::kPerImage) {
      auto& obs = per_image[r.record.mixture];
      obs.mixture = r.record.mixture;
      obs.indicator = indicator;
      obs.x.push_back(*v);
      obs.y.push_back(*r.record.dft40);
    } else {
      groups[r.record.mixture][{r.record.polish_cycles_k, *r.record.dft40}].push_back(*v);
    }
  }
  std::vector<ObservationSet> out;
  if (aggregation == Aggregation::kPerImage) {
    for (auto& [m, obs] : per_image) out.push_back(std::move(obs));
    return out;
  }
  for (auto& [mixture, levels] : groups) {
    ObservationSet obs;
    obs.mixture = mixture;
    obs.indicator = indicator;
    for (auto& [key, values] : levels) {
      double x = 0.0;
      if (aggregation == Aggregation::kMean) {
        for (double v : values) x += v;
        x /= static_cast<double>(values.size());
      } else {
        std::sort(values.begin(), values.end());
        const std::size_t n = values.size();
        x = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
      }
      obs.x.push_back(x);
      obs.y.push_back(key.second);
    }
    out.push_back(std::move(obs));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report

namespace {

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_double(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

json result_to_json(const IndicatorResult& r) {
  json j;
  j["image_path"] = r.record.image_path;
  j["mixture"] = r.record.mixture;
  j["dft40"] = opt_json(r.record.dft40);
  j["polish_cycles_k"] = opt_json(r.record.polish_cycles_k);
  j["lighting_tag"] = r.record.lighting_tag ? json(*r.record.lighting_tag) : json(nullptr);
  j["status"] = r.ok ? "ok" : "failed";
  if (!r.ok) j["error"] = r.error;
  j["threshold"] = r.threshold;
  j["mm_per_px"] = r.mm_per_px;
  json ind = json::object();
  if (r.values.area_mm2) ind["area_mm2"] = *r.values.area_mm2;
  if (r.values.ar) ind["ar"] = *r.values.ar;
  if (r.values.smi) ind["smi"] = *r.values.smi;
  if (r.values.fd) ind["fd"] = *r.values.fd;
  j["indicators"] = ind;
  j["config_fingerprint"] = r.config_fingerprint;
  j["provenance"] = r.provenance;
  return j;
}

IndicatorResult result_from_json(const json& j) {
  IndicatorResult r;
  r.record.image_path = j.at("image_path").get<std::string>();
  r.record.mixture = j.at("mixture").get<std::string>();
  r.record.dft40 = opt_double(j, "dft40");
  r.record.polish_cycles_k = opt_double(j, "polish_cycles_k");
  if (j.contains("lighting_tag") && !j.at("lighting_tag").is_null()) {
    r.record.lighting_tag = j.at("lighting_tag").get<std::string>();
  }
  r.ok = j.value("status", std::string("ok")) == "ok";
  r.error = j.value("error", std::string());
  r.threshold = j.value("threshold", -1);
  r.mm_per_px = j.value("mm_per_px", 0.0);
  const json ind = j.value("indicators", json::object());
  r.values.area_mm2 = opt_double(ind, "area_mm2");
  r.values.ar = opt_double(ind, "ar");
  r.values.smi = opt_double(ind, "smi");
  r.values.fd = opt_double(ind, "fd");
  r.config_fingerprint = j.value("config_fingerprint", std::string());
  r.provenance = j.value("provenance", json::object());
  return r;
}

std::vector<fs::path> write_report(const std::vector<IndicatorResult>& results,
                                   const std::vector<RegressionModel>& models, const fs::path& path,
                                   const PipelineConfig* cfg) {
  if (results.empty()) throw data_error("report needs at least one result");
  std::vector<IndicatorResult> sorted = results;
  sort_results(sorted);

  json doc;
  doc["format"] = "pavetex-report/1";
  doc["config_fingerprint"] = cfg ? cfg->fingerprint() : sorted.front().config_fingerprint;
  doc["config"] = cfg ? json(cfg->to_text()) : json(nullptr);
  doc["samples"] = json::array();
  std::size_t failed = 0;
  for (const auto& r : sorted) {
    doc["samples"].push_back(result_to_json(r));
    if (!r.ok) ++failed;
  }
  doc["failed"] = failed;
  doc["models"] = models;

  {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write report " + path.string());
    out << doc.dump(2) << "\n";
    if (!out) throw data_error("write failed for " + path.string());
  }

  std::map<std::string, std::vector<const IndicatorResult*>> by_mixture;
  for (const auto& r : sorted)
    if (r.ok) by_mixture[r.record.mixture].push_back(&r);

  std::vector<fs::path> sidecars;
  for (const auto& [mixture, rows] : by_mixture) {
    fs::path csv = path.parent_path() / (path.stem().string() + "." + mixture + ".plot.csv");
    std::ofstream out(csv);
    if (!out) throw data_error("cannot write " + csv.string());
    out << "image_path,lighting_tag,polish_cycles_k,dft40,area_mm2,ar,smi,fd\n";
    for (const auto* r : rows) {
      out << csv_escape(r->record.image_path) << "," << csv_escape(r->record.lighting_tag.value_or("")) << ","
          << fmt_opt(r->record.polish_cycles_k) << "," << fmt_opt(r->record.dft40) << ","
          << fmt_opt(r->values.area_mm2) << "," << fmt_opt(r->values.ar) << "," << fmt_opt(r->values.smi) << ","
          << fmt_opt(r->values.fd) << "\n";
    }
    sidecars.push_back(csv);
  }
  return sidecars;
}

Report read_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot read report " + path.string());
  try {
    const json doc = json::parse(in);
    Report rep;
    rep.config_fingerprint = doc.value("config_fingerprint", std::string());
    if (doc.contains("config") && doc.at("config").is_string()) rep.config_text = doc.at("config").get<std::string>();
    for (const auto& s : doc.at("samples")) rep.results.push_back(result_from_json(s));
    if (doc.contains("models")) rep.models = doc.at("models").get<std::vector<RegressionModel>>();
    return rep;
  } catch (const json::exception& e) {
    throw data_error("invalid report " + path.string() + ": " + e.what());
  }
}

void write_box_count_csv(const BoxCountCurve& curve, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path.string());
  out << "box_size,count\n";
  for (std::size_t i = 0; i < curve.sizes.size(); ++i) out << curve.sizes[i] << "," << curve.counts[i] << "\n";
}

}  // namespace pavetex
