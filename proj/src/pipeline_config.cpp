#include "pavetex/pipeline_config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pavetex/error.hpp"
#include "pavetex/stats.hpp"

namespace pavetex {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || v.empty()) {
    throw usage_error("config key '" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || v.empty()) {
    throw usage_error("config key '" + key + "': expected an integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw usage_error("config key '" + key + "': expected true/false, got '" + v + "'");
}

// "WxH" pair, or a single value meaning both.
std::pair<int, int> parse_pair_int(const std::string& key, const std::string& v) {
  const auto parts = split(v, 'x');
  if (parts.size() == 1) {
    const int n = parse_int(key, parts[0]);
    return {n, n};
  }
  if (parts.size() != 2) throw usage_error("config key '" + key + "': expected WxH, got '" + v + "'");
  return {parse_int(key, parts[0]), parse_int(key, parts[1])};
}

std::pair<double, double> parse_pair_double(const std::string& key, const std::string& v) {
  const auto parts = split(v, 'x');
  if (parts.size() != 2) throw usage_error("config key '" + key + "': expected WxH, got '" + v + "'");
  return {parse_double(key, parts[0]), parse_double(key, parts[1])};
}

RoiSpec& ensure_roi(PipelineConfig& cfg) {
  if (!cfg.roi) cfg.roi = RoiSpec{};
  return *cfg.roi;
}

template <typename T, typename F>
std::string join(const std::vector<T>& v, F fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += fmt(v[i]);
  }
  return out;
}

const char* mode_name(ThresholdMode m) { return m == ThresholdMode::kFixed ? "fixed" : "isodata"; }

const char* aggregation_name(Aggregation a) {
  switch (a) {
    case Aggregation::kMean: return "mean";
    case Aggregation::kMedian: return "median";
    case Aggregation::kPerImage: return "per-image";
  }
  return "mean";
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc() ? p : buf);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

IndicatorSet IndicatorSet::parse(const std::string& csv) {
  IndicatorSet s{false, false, false, false};
  for (const auto& raw : split(csv, ',')) {
    std::string name = raw;
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    if (name == "area") s.area = true;
    else if (name == "ar") s.ar = true;
    else if (name == "smi") s.smi = true;
    else if (name == "fd") s.fd = true;
    else if (name == "all") s = IndicatorSet{};
    else throw usage_error("unknown indicator '" + raw + "' (expected area, ar, smi, fd)");
  }
  if (s.none()) throw usage_error("indicator set must not be empty");
  return s;
}

std::string IndicatorSet::to_string() const {
  std::vector<std::string> parts;
  if (area) parts.emplace_back("area");
  if (ar) parts.emplace_back("ar");
  if (smi) parts.emplace_back("smi");
  if (fd) parts.emplace_back("fd");
  return join(parts, [](const std::string& s) { return s; });
}

bool operator==(const RoiSpec& a, const RoiSpec& b) {
  return a.x0 == b.x0 && a.y0 == b.y0 && a.width_px == b.width_px && a.height_px == b.height_px &&
         a.roi_width_mm == b.roi_width_mm && a.roi_height_mm == b.roi_height_mm &&
         a.target_width_px == b.target_width_px && a.target_height_px == b.target_height_px;
}
bool operator==(const ClaheParams& a, const ClaheParams& b) {
  return a.tiles_x == b.tiles_x && a.tiles_y == b.tiles_y && a.clip_limit == b.clip_limit && a.bins == b.bins;
}
bool operator==(const GaussianParams& a, const GaussianParams& b) {
  return a.sigma == b.sigma && a.radius == b.radius;
}
bool operator==(const SmiConfig& a, const SmiConfig& b) {
  return a.band_min_mm == b.band_min_mm && a.band_max_mm == b.band_max_mm && a.weights == b.weights &&
         a.levels == b.levels;
}
bool operator==(const PipelineConfig& a, const PipelineConfig& b) { return a.to_text() == b.to_text(); }

void PipelineConfig::validate() const {
  if (roi) roi->validate();
  if (mm_per_px && !(*mm_per_px > 0.0)) throw usage_error("mm_per_px must be > 0");
  clahe.validate();
  gaussian.validate();
  if (!(isodata_epsilon > 0.0)) throw usage_error("isodata.epsilon must be > 0");
  if (isodata_max_iterations < 1) throw usage_error("isodata.max_iterations must be >= 1");
  for (const auto& [k, v] : threshold_table) {
    if (v < 0 || v > 255) throw usage_error("threshold for " + k + " must be in [0, 255]");
  }
  if (indicators.none()) throw usage_error("indicator set must not be empty");
  if (!(smi.band_min_mm > 0.0) || smi.band_max_mm < smi.band_min_mm) {
    throw usage_error("SMI band must satisfy 0 < min <= max");
  }
  if (smi.levels < 0) throw usage_error("smi.levels must be >= 0");
  for (std::size_t i = 0; i < fd.box_sizes.size(); ++i) {
    if (fd.box_sizes[i] <= 0 || (i > 0 && fd.box_sizes[i] <= fd.box_sizes[i - 1])) {
      throw usage_error("fd.box_sizes must be positive and strictly ascending");
    }
  }
}

int PipelineConfig::fixed_threshold(const std::string& mixture) const {
  const std::string key = canonical_mixture(mixture);
  for (const auto& [k, v] : threshold_table) {
    if (canonical_mixture(k) == key) return v;
  }
  throw data_error("threshold table has no entry for mixture '" + mixture + "'");
}

std::string PipelineConfig::to_text() const {
  std::ostringstream out;
  if (roi) {
    out << "roi = " << roi->x0 << "," << roi->y0 << "," << roi->width_px << "," << roi->height_px << "\n";
    out << "roi.mm = " << format_double(roi->roi_width_mm) << "x" << format_double(roi->roi_height_mm) << "\n";
    out << "roi.target = " << roi->target_width_px << "x" << roi->target_height_px << "\n";
  } else {
    out << "roi = none\n";
  }
  out << "mm_per_px = " << (mm_per_px ? format_double(*mm_per_px) : std::string("none")) << "\n";
  out << "clahe.enabled = " << (clahe_enabled ? "true" : "false") << "\n";
  out << "clahe.tiles = " << clahe.tiles_x << "x" << clahe.tiles_y << "\n";
  out << "clahe.clip = " << format_double(clahe.clip_limit) << "\n";
  out << "clahe.bins = " << clahe.bins << "\n";
  out << "gaussian.enabled = " << (gaussian_enabled ? "true" : "false") << "\n";
  out << "gaussian.sigma = " << format_double(gaussian.sigma) << "\n";
  out << "gaussian.radius = " << gaussian.radius << "\n";
  out << "threshold.mode = " << mode_name(threshold_mode) << "\n";
  std::vector<std::string> entries;
  for (const auto& [k, v] : threshold_table) entries.push_back(k + ":" + std::to_string(v));
  out << "threshold.table = " << join(entries, [](const std::string& s) { return s; }) << "\n";
  out << "isodata.epsilon = " << format_double(isodata_epsilon) << "\n";
  out << "isodata.max_iterations = " << isodata_max_iterations << "\n";
  out << "indicators = " << indicators.to_string() << "\n";
  out << "smi.band_min_mm = " << format_double(smi.band_min_mm) << "\n";
  out << "smi.band_max_mm = " << format_double(smi.band_max_mm) << "\n";
  out << "smi.weights = " << join(smi.weights, [](double w) { return format_double(w); }) << "\n";
  out << "smi.levels = " << smi.levels << "\n";
  out << "fd.box_sizes = "
      << (fd.box_sizes.empty() ? std::string("dyadic") : join(fd.box_sizes, [](int s) { return std::to_string(s); }))
      << "\n";
  out << "aggregation = " << aggregation_name(aggregation) << "\n";
  return out.str();
}

std::string PipelineConfig::fingerprint() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_text())));
  return buf;
}

void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  const std::string& v = value;
  if (key == "roi") {
    if (v == "none") {
      cfg.roi.reset();
      return;
    }
    const auto parts = split(v, ',');
    if (parts.size() != 4) throw usage_error("roi expects x0,y0,width,height in source pixels");
    RoiSpec& r = ensure_roi(cfg);
    r.x0 = parse_int(key, parts[0]);
    r.y0 = parse_int(key, parts[1]);
    r.width_px = parse_int(key, parts[2]);
    r.height_px = parse_int(key, parts[3]);
  } else if (key == "roi.mm") {
    auto [w, h] = parse_pair_double(key, v);
    ensure_roi(cfg).roi_width_mm = w;
    ensure_roi(cfg).roi_height_mm = h;
  } else if (key == "roi.target") {
    auto [w, h] = parse_pair_int(key, v);
    ensure_roi(cfg).target_width_px = w;
    ensure_roi(cfg).target_height_px = h;
  } else if (key == "mm_per_px") {
    if (v == "none") cfg.mm_per_px.reset();
    else cfg.mm_per_px = parse_double(key, v);
  } else if (key == "clahe.enabled") {
    cfg.clahe_enabled = parse_bool(key, v);
  } else if (key == "clahe.tiles") {
    auto [x, y] = parse_pair_int(key, v);
    cfg.clahe.tiles_x = x;
    cfg.clahe.tiles_y = y;
  } else if (key == "clahe.clip") {
    cfg.clahe.clip_limit = parse_double(key, v);
  } else if (key == "clahe.bins") {
    cfg.clahe.bins = parse_int(key, v);
  } else if (key == "gaussian.enabled") {
    cfg.gaussian_enabled = parse_bool(key, v);
  } else if (key == "gaussian.sigma") {
    cfg.gaussian.sigma = parse_double(key, v);
  } else if (key == "gaussian.radius") {
    cfg.gaussian.radius = parse_int(key, v);
  } else if (key == "threshold.mode") {
    if (v == "fixed") cfg.threshold_mode = ThresholdMode::kFixed;
    else if (v == "isodata") cfg.threshold_mode = ThresholdMode::kIsodata;
    else throw usage_error("threshold.mode must be fixed or isodata");
  } else if (key == "threshold.table") {
    cfg.threshold_table.clear();
    if (!v.empty()) {
      for (const auto& entry : split(v, ',')) {
        const auto kv = split(entry, ':');
        if (kv.size() != 2 || kv[0].empty()) throw usage_error("threshold.table expects mixture:level,...");
        cfg.threshold_table[canonical_mixture(kv[0])] = parse_int(key, kv[1]);
      }
    }
  } else if (key.rfind("threshold.", 0) == 0) {
    cfg.threshold_table[canonical_mixture(key.substr(10))] = parse_int(key, v);
  } else if (key == "isodata.epsilon") {
    cfg.isodata_epsilon = parse_double(key, v);
  } else if (key == "isodata.max_iterations") {
    cfg.isodata_max_iterations = parse_int(key, v);
  } else if (key == "indicators") {
    cfg.indicators = IndicatorSet::parse(v);
  } else if (key == "smi.band_min_mm") {
    cfg.smi.band_min_mm = parse_double(key, v);
  } else if (key == "smi.band_max_mm") {
    cfg.smi.band_max_mm = parse_double(key, v);
  } else if (key == "smi.weights") {
    cfg.smi.weights.clear();
    if (!v.empty()) {
      for (const auto& w : split(v, ',')) cfg.smi.weights.push_back(parse_double(key, w));
    }
  } else if (key == "smi.levels") {
    cfg.smi.levels = parse_int(key, v);
  } else if (key == "fd.box_sizes") {
    cfg.fd.box_sizes.clear();
    if (v != "dyadic" && !v.empty()) {
      for (const auto& s : split(v, ',')) cfg.fd.box_sizes.push_back(parse_int(key, s));
    }
  } else if (key == "aggregation") {
    if (v == "mean") cfg.aggregation = Aggregation::kMean;
    else if (v == "median") cfg.aggregation = Aggregation::kMedian;
    else if (v == "per-image") cfg.aggregation = Aggregation::kPerImage;
    else throw usage_error("aggregation must be mean, median or per-image");
  } else {
    throw usage_error("unknown config key '" + key + "'");
  }
}

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw usage_error("config line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_config_entry(cfg, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace pavetex
