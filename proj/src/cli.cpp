#include "pavetex/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "pavetex/dataset.hpp"
#include "pavetex/error.hpp"
#include "pavetex/image_io.hpp"
#include "pavetex/pipeline_config.hpp"
#include "pavetex/segment.hpp"
#include "pavetex/stats.hpp"
#include "pavetex/synth.hpp"

namespace pavetex {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Pipeline flags shared by the image-processing subcommands. Values stay as
// text and go through the config parser so flags and config files agree.
struct ConfigFlags {
  std::string config;
  std::map<std::string, std::string> values;
  bool no_clahe = false;
  bool no_gaussian = false;
  std::vector<std::string> sets;

  void add_to(CLI::App* app, bool with_indicators) {
    app->add_option("--config", config, "Pipeline config file (default: $PAVETEX_CONFIG)");
    add(app, "--roi", "roi", "ROI in source pixels: x0,y0,width,height");
    add(app, "--roi-mm", "roi.mm", "Physical ROI size in mm: WxH (default 100x75)");
    add(app, "--target", "roi.target", "Normalized ROI size in pixels: WxH (default 3400x2550)");
    add(app, "--mm-per-px", "mm_per_px", "Pixel pitch when no ROI is given");
    add(app, "--clahe-tiles", "clahe.tiles", "CLAHE tile grid: N or NxM (default 8x8)");
    add(app, "--clahe-clip", "clahe.clip", "CLAHE clip limit, >= 1 (default 2)");
    add(app, "--clahe-bins", "clahe.bins", "CLAHE histogram bins, 2..256 (default 256)");
    add(app, "--sigma", "gaussian.sigma", "Gaussian sigma in pixels (default 1)");
    add(app, "--radius", "gaussian.radius", "Gaussian kernel radius, >= ceil(2 sigma) (default 3)");
    add(app, "--threshold-mode", "threshold.mode", "Area threshold: fixed or isodata (default fixed)");
    if (with_indicators) add(app, "--only", "indicators", "Indicator subset, e.g. area,fd (default all)");
    app->add_flag("--no-clahe", no_clahe, "Skip CLAHE");
    app->add_flag("--no-gaussian", no_gaussian, "Skip Gaussian smoothing");
    app->add_option("--set", sets, "Extra config assignment key=value (repeatable)");
  }

  PipelineConfig build() const {
    PipelineConfig cfg;
    if (!config.empty()) {
      cfg = load_config(config);
    } else if (const char* env = std::getenv(kConfigEnvVar); env && *env) {
      cfg = load_config(env);
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw usage_error("--set expects key=value, got '" + s + "'");
      apply_config_entry(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) apply_config_entry(cfg, key, values.at(key));
    }
    if (no_clahe) cfg.clahe_enabled = false;
    if (no_gaussian) cfg.gaussian_enabled = false;
    cfg.validate();
    return cfg;
  }

 private:
  std::vector<std::pair<std::string, CLI::Option*>> options;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    options.emplace_back(key, app->add_option(flag, values[key], help));
  }
};

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path.string());
  out << text;
}

GrayRaster load_gray(const fs::path& input) {
  try {
    return to_grayscale(load_image(input));
  } catch (const Error& e) {
    throw StageError("load", e.kind(), e.what());
  }
}

ModelRegistry resolve_models(const std::string& spec, std::ostream& out) {
  if (spec.empty() || spec == "builtin") {
    out << "# models: " << kBuiltinCaveat << "\n";
    return builtin_models();
  }
  return load_models(spec);
}

std::vector<ObservationSet> observations_for(const Report& report, const std::string& indicator,
                                             Aggregation aggregation) {
  return build_observations(report.results, indicator, aggregation);
}

Aggregation parse_aggregation(const std::string& s) {
  if (s == "mean") return Aggregation::kMean;
  if (s == "median") return Aggregation::kMedian;
  if (s == "per-image") return Aggregation::kPerImage;
  throw usage_error("aggregation must be mean, median or per-image");
}

std::set<std::string> report_mixtures(const Report& report) {
  std::set<std::string> out;
  for (const auto& r : report.results) out.insert(r.record.mixture);
  return out;
}

// ---------------------------------------------------------------------------

struct PreprocessCmd {
  std::string input, out;
  ConfigFlags flags;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("preprocess", "Normalize and enhance one image");
    sub->add_option("--input", input, "Input photograph (PNG, JPEG or PPM/PGM)")->required();
    sub->add_option("--out", out, "Output grayscale image (.png or .pgm)")->required();
    flags.add_to(sub, false);
  }

  int run(std::ostream& os) const {
    const PipelineConfig cfg = flags.build();
    const GrayRaster gray = load_gray(input);
    const GrayRaster processed = preprocess(gray, cfg);
    write_gray(processed, out);
    json side;
    side["input"] = input;
    side["output"] = out;
    side["width"] = processed.width;
    side["height"] = processed.height;
    side["mm_per_px"] = processed.mm_per_px ? json(*processed.mm_per_px) : json(nullptr);
    side["config_fingerprint"] = cfg.fingerprint();
    side["config"] = cfg.to_text();
    side["generated_at"] = utc_timestamp();
    write_text(out + ".json", side.dump(2) + "\n");
    os << "wrote " << out << " (" << processed.width << "x" << processed.height << ")\n";
    return 0;
  }
};

struct SegmentCmd {
  std::string input, out, method, mixture = "DGAC", polarity = "above", box_csv;
  int threshold = -1;
  ConfigFlags flags;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("segment", "Threshold one preprocessed image into a mask");
    sub->add_option("--input", input, "Input photograph")->required();
    sub->add_option("--out", out, "Output mask (.pbm or .png, foreground black)")->required();
    sub->add_option("--method", method, "fixed, isodata, otsu or max-entropy (default: config mode)")
        ->check(CLI::IsMember({"fixed", "isodata", "otsu", "max-entropy"}));
    sub->add_option("--mixture", mixture, "Mixture for the fixed threshold table (default DGAC)");
    sub->add_option("--threshold", threshold, "Explicit gray-level threshold 0..255")->check(CLI::Range(0, 255));
    sub->add_option("--polarity", polarity, "Foreground side: above or below (default above)")
        ->check(CLI::IsMember({"above", "below"}));
    sub->add_option("--box-counts", box_csv, "Also write the box-count curve of the mask as CSV");
    flags.add_to(sub, false);
  }

  int run(std::ostream& os) const {
    const PipelineConfig cfg = flags.build();
    const GrayRaster img = preprocess(load_gray(input), cfg);
    int t = threshold;
    if (t < 0) {
      const Histogram256 h = histogram(img);
      const std::string m = method.empty()
                                ? (cfg.threshold_mode == ThresholdMode::kFixed ? "fixed" : "isodata")
                                : method;
      if (m == "fixed") t = cfg.fixed_threshold(canonical_mixture(mixture));
      else if (m == "isodata") t = isodata_threshold(h, cfg.isodata_epsilon, cfg.isodata_max_iterations).threshold;
      else if (m == "otsu") t = otsu_threshold(h).threshold;
      else t = max_entropy_threshold(h).threshold;
    }
    const BinaryMask mask = binarize(img, t, polarity == "above" ? Polarity::kAbove : Polarity::kBelow);
    write_mask(mask, out);
    os << "threshold=" << t << " foreground_px=" << mask.foreground_count();
    if (mask.mm_per_px) os << " area_mm2=" << format_double(area_mm2(mask));
    os << "\n";
    if (!box_csv.empty()) {
      const auto sizes = cfg.fd.box_sizes.empty() ? dyadic_box_sizes(mask.width, mask.height) : cfg.fd.box_sizes;
      write_box_count_csv(box_count(mask, sizes), box_csv);
    }
    return 0;
  }
};

struct IndicatorsCmd {
  std::string manifest, out;
  unsigned threads = 1;
  ConfigFlags flags;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("indicators", "Compute indicators for every manifest record");
    sub->add_option("--manifest", manifest, "Manifest CSV")->required();
    sub->add_option("--out", out, "Report JSON (plot CSVs are written next to it)")->required();
    sub->add_option("--threads", threads, "Worker threads (default 1)")->check(CLI::Range(1u, 256u));
    flags.add_to(sub, true);
  }

  int run(std::ostream& os, std::ostream& es) const {
    const PipelineConfig cfg = flags.build();
    const auto records = load_manifest(manifest);
    if (records.empty()) throw data_error("manifest has no records");
    const auto results = run_batch(records, cfg, threads);
    write_report(results, {}, out, &cfg);
    std::size_t failed = 0;
    for (const auto& r : results) {
      if (r.ok) continue;
      ++failed;
      es << "failed: " << r.record.image_path << ": " << r.error << "\n";
    }
    os << "processed " << results.size() << " records, " << failed << " failed; report " << out << "\n";
    return failed ? 2 : 0;
  }
};

struct FitCmd {
  std::string results, indicator = "area", out_models, aggregation;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("fit", "Fit per-mixture friction models from a report");
    sub->add_option("--results", results, "Report JSON from `indicators`")->required();
    sub->add_option("--indicator", indicator, "Indicator to regress on (default area)")
        ->check(CLI::IsMember(indicator_names()));
    sub->add_option("--out-models", out_models, "Output model JSON")->required();
    sub->add_option("--aggregation", aggregation, "mean, median or per-image (default: report config)");
  }

  int run(std::ostream& os, std::ostream& es) const {
    const Report report = read_report(results);
    Aggregation agg = Aggregation::kMean;
    if (!aggregation.empty()) agg = parse_aggregation(aggregation);
    else if (!report.config_text.empty()) agg = parse_config(report.config_text).aggregation;

    const auto sets = observations_for(report, indicator, agg);
    std::set<std::string> pending = report_mixtures(report);
    std::vector<RegressionModel> models;
    int code = 0;
    for (const auto& obs : sets) {
      pending.erase(obs.mixture);
      if (obs.x.size() < 3) {
        es << "warning: skipping " << obs.mixture << ": " << obs.x.size() << " point(s), need at least 3\n";
        code = std::max(code, 2);
        continue;
      }
      try {
        models.push_back(ols_fit(obs));
      } catch (const Error& e) {
        es << "warning: skipping " << obs.mixture << ": " << e.what() << "\n";
        code = std::max(code, static_cast<int>(e.kind()));
      }
    }
    for (const auto& m : pending) {
      es << "warning: skipping " << m << ": no rows with dft40 and " << indicator << "\n";
      code = std::max(code, 2);
    }
    save_models(models, out_models);
    os << "mixture,indicator,n,intercept,slope,r,r2,r2_adj\n";
    for (const auto& m : models) {
      os << m.mixture << "," << m.indicator << "," << m.n << "," << format_double(m.intercept) << ","
         << format_double(m.slope) << "," << fixed4(m.pearson_r) << "," << fixed4(m.r2) << ","
         << fixed4(m.r2_adj) << "\n";
    }
    return code;
  }
};

struct PredictCmd {
  std::string image, manifest, mixture, models = "builtin", indicator = "area", out;
  unsigned threads = 1;
  ConfigFlags flags;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("predict", "Predict DFT40 friction from images");
    auto* img = sub->add_option("--image", image, "Single photograph");
    auto* man = sub->add_option("--manifest", manifest, "Manifest CSV (dft40 may be empty)");
    img->excludes(man);
    sub->add_option("--mixture", mixture, "Mixture of --image (DGAC, ChipSeal, OGFC)")->needs(img);
    sub->add_option("--models", models, "`builtin` or a model JSON file (default builtin)");
    sub->add_option("--indicator", indicator, "Model indicator (default area)")
        ->check(CLI::IsMember(indicator_names()));
    sub->add_option("--out", out, "Also write the predictions CSV here");
    sub->add_option("--threads", threads, "Worker threads (default 1)")->check(CLI::Range(1u, 256u));
    flags.add_to(sub, false);
  }

  int run(std::ostream& os, std::ostream& es) const {
    if (image.empty() == manifest.empty()) throw usage_error("predict needs exactly one of --image or --manifest");
    if (!image.empty() && mixture.empty()) throw usage_error("--image needs --mixture");
    PipelineConfig cfg = flags.build();
    apply_config_entry(cfg, "indicators", indicator);

    std::vector<SampleRecord> records;
    if (!image.empty()) {
      SampleRecord r;
      r.image_path = image;
      r.mixture = canonical_mixture(mixture);
      records.push_back(r);
    } else {
      records = load_manifest(manifest);
    }
    const ModelRegistry registry = resolve_models(models, os);
    for (const auto& r : records) {
      if (!registry.contains(r.mixture, indicator)) {
        throw data_error("no model for mixture '" + r.mixture + "' and indicator '" + indicator + "'");
      }
    }

    const auto results = run_batch(records, cfg, threads);
    std::ostringstream csv;
    csv << "image_path,mixture,indicator,value,predicted_dft40,advisory\n";
    int code = 0;
    for (const auto& r : results) {
      if (!r.ok) {
        es << "failed: " << r.record.image_path << ": " << r.error << "\n";
        code = 2;
        continue;
      }
      const double x = *r.values.get(indicator);
      const Prediction p = predict(registry.find(r.record.mixture, indicator), x);
      csv << r.record.image_path << "," << r.record.mixture << "," << indicator << "," << format_double(x) << ","
          << fixed4(p.value) << "," << (p.out_of_range ? "outside [0,1]" : "") << "\n";
    }
    os << csv.str();
    if (!out.empty()) write_text(out, csv.str());
    return code;
  }
};

struct CompareCmd {
  std::string results, out, aggregation;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("compare", "Compare fit quality across indicators");
    sub->add_option("--results", results, "Report JSON from `indicators`")->required();
    sub->add_option("--out", out, "Comparison table CSV (plot CSVs are written next to it)")->required();
    sub->add_option("--aggregation", aggregation, "mean, median or per-image (default: report config)");
  }

  int run(std::ostream& os, std::ostream& es) const {
    const Report report = read_report(results);
    Aggregation agg = Aggregation::kMean;
    if (!aggregation.empty()) agg = parse_aggregation(aggregation);
    else if (!report.config_text.empty()) agg = parse_config(report.config_text).aggregation;

    std::vector<std::string> indicators;
    for (const auto& name : indicator_names()) {
      const bool present = std::any_of(report.results.begin(), report.results.end(), [&](const IndicatorResult& r) {
        return r.ok && r.record.dft40 && r.values.get(name);
      });
      if (present) indicators.push_back(name);
    }
    if (indicators.empty()) throw data_error("no rows with both dft40 and an indicator value");

    // mixture -> indicator -> diagnostics
    std::map<std::string, std::map<std::string, std::map<std::string, std::string>>> table;
    int code = 0;
    for (const auto& ind : indicators) {
      for (const auto& obs : build_observations(report.results, ind, agg)) {
        auto& cell = table[obs.mixture][ind];
        cell["n"] = std::to_string(obs.x.size());
        if (obs.x.size() < 3) {
          cell["status"] = "insufficient data";
          es << "warning: " << obs.mixture << "/" << ind << ": " << obs.x.size() << " point(s), need at least 3\n";
          code = 2;
          continue;
        }
        try {
          const RegressionModel m = ols_fit(obs);
          cell["intercept"] = format_double(m.intercept);
          cell["slope"] = format_double(m.slope);
          cell["r"] = fixed4(m.pearson_r);
          cell["r2"] = fixed4(m.r2);
          cell["r2_adj"] = fixed4(m.r2_adj);
          cell["status"] = "ok";
        } catch (const Error& e) {
          cell["r2"] = fixed4(0.0);
          cell["status"] = std::string("refused: ") + e.what();
        }
      }
    }

    static const char* kStats[] = {"n", "intercept", "slope", "r", "r2", "r2_adj", "status"};
    std::ostringstream csv;
    csv << "mixture,statistic";
    for (const auto& ind : indicators) csv << "," << ind;
    csv << "\n";
    for (const auto& [mixture, cells] : table) {
      for (const char* stat : kStats) {
        csv << mixture << "," << stat;
        for (const auto& ind : indicators) {
          std::string v;
          if (auto c = cells.find(ind); c != cells.end()) {
            if (auto s = c->second.find(stat); s != c->second.end()) v = s->second;
          }
          if (v.find_first_of(",\"") != std::string::npos) {
            std::string q = "\"";
            for (char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
            v = q + "\"";
          }
          csv << "," << v;
        }
        csv << "\n";
      }
    }
    write_text(out, csv.str());
    os << csv.str();

    const fs::path base(out);
    std::map<std::string, std::vector<const IndicatorResult*>> rows;
    for (const auto& r : report.results)
      if (r.ok && r.record.dft40) rows[r.record.mixture].push_back(&r);
    for (const auto& [mixture, list] : rows) {
      std::ostringstream plot;
      plot << "image_path,polish_cycles_k,dft40";
      for (const auto& ind : indicators) plot << "," << ind;
      plot << "\n";
      for (const auto* r : list) {
        plot << r->record.image_path << ","
             << (r->record.polish_cycles_k ? format_double(*r->record.polish_cycles_k) : "") << ","
             << format_double(*r->record.dft40);
        for (const auto& ind : indicators) {
          const auto v = r->values.get(ind);
          plot << "," << (v ? format_double(*v) : "");
        }
        plot << "\n";
      }
      write_text(base.parent_path() / (base.stem().string() + "." + mixture + ".plot.csv"), plot.str());
    }
    return code;
  }
};

struct SynthCmd {
  std::string kind = "disks", out, mixture = "DGAC";
  int width = 256, height = 256, n_disks = 20, low = 60, high = 200, depth = 4;
  int cap_gray = 200, bg_gray = 60, aggregate_gray = -1;
  double radius_min = 6.0, radius_max = 14.0, cap_fraction = 1.0, noise = 0.0, mm_per_px = 0.0,
         fraction = 0.5;
  bool no_overlap = false;
  std::uint64_t seed = 1;
  std::vector<double> wear = {0.0, 0.2, 0.4, 0.6, 0.8};

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("synth", "Generate seeded synthetic fixtures");
    sub->add_option("--kind", kind, "bimodal, disks, sierpinski or polish (default disks)")
        ->check(CLI::IsMember({"bimodal", "disks", "sierpinski", "polish"}));
    sub->add_option("--out", out, "Output image, or output directory for --kind polish")->required();
    sub->add_option("--width", width, "Image width (default 256)");
    sub->add_option("--height", height, "Image height (default 256)");
    sub->add_option("--seed", seed, "RNG seed (default 1)");
    sub->add_option("--low", low, "bimodal: low gray level (default 60)");
    sub->add_option("--high", high, "bimodal: high gray level (default 200)");
    sub->add_option("--fraction", fraction, "bimodal: probability of the high level (default 0.5)");
    sub->add_option("--depth", depth, "sierpinski: recursion depth 1..6 (default 4)");
    sub->add_option("--disks", n_disks, "disks/polish: particle count (default 20)");
    sub->add_option("--radius-min", radius_min, "disks/polish: smallest radius in px (default 6)");
    sub->add_option("--radius-max", radius_max, "disks/polish: largest radius in px (default 14)");
    sub->add_option("--cap-gray", cap_gray, "disks/polish: cap gray level (default 200)")->check(CLI::Range(0, 255));
    sub->add_option("--bg-gray", bg_gray, "disks/polish: background gray level (default 60)")
        ->check(CLI::Range(0, 255));
    sub->add_option("--aggregate-gray", aggregate_gray, "disks/polish: aggregate body gray level (default none)")
        ->check(CLI::Range(0, 255));
    sub->add_option("--cap-fraction", cap_fraction, "disks/polish: cap radius / particle radius (default 1)");
    sub->add_flag("--no-overlap", no_overlap, "disks/polish: keep particles apart");
    sub->add_option("--noise", noise, "disks/polish: additive noise sigma in gray levels (default 0)");
    sub->add_option("--mm-per-px", mm_per_px, "Pixel pitch recorded in the truth sidecar");
    sub->add_option("--wear", wear, "polish: ascending wear fractions in [0,1) (default 0,0.2,0.4,0.6,0.8)")
        ->delimiter(',');
    sub->add_option("--mixture", mixture, "polish: mixture written to the manifest (default DGAC)");
  }

  DiskFieldSpec disk_spec() const {
    DiskFieldSpec s;
    s.width = width;
    s.height = height;
    s.n_disks = n_disks;
    s.radius_min = radius_min;
    s.radius_max = radius_max;
    s.cap_gray = static_cast<std::uint8_t>(cap_gray);
    s.bg_gray = static_cast<std::uint8_t>(bg_gray);
    if (aggregate_gray >= 0) s.aggregate_gray = static_cast<std::uint8_t>(aggregate_gray);
    s.cap_fraction = cap_fraction;
    s.allow_overlap = !no_overlap;
    s.noise_sigma = noise;
    if (mm_per_px > 0.0) s.mm_per_px = mm_per_px;
    s.seed = seed;
    return s;
  }

  json truth(const DiskField& f) const {
    json j;
    j["cap_pixels"] = f.cap_pixels;
    if (mm_per_px > 0.0) j["cap_area_mm2"] = static_cast<double>(f.cap_pixels) * mm_per_px * mm_per_px;
    j["disks"] = json::array();
    for (const auto& d : f.disks) j["disks"].push_back({d.cx, d.cy, d.radius});
    return j;
  }

  int run(std::ostream& os) const {
    if (kind == "bimodal") {
      write_gray(gen_bimodal(width, height, low, high, fraction, seed), out);
    } else if (kind == "sierpinski") {
      write_mask(gen_sierpinski(depth), out);
    } else if (kind == "disks") {
      const DiskField f = gen_disk_field(disk_spec());
      write_gray(f.image, out);
      write_text(out + ".truth.json", truth(f).dump(2) + "\n");
      os << "cap_pixels=" << f.cap_pixels << "\n";
    } else {
      const auto frames = gen_polish_sequence(disk_spec(), wear, seed);
      const fs::path dir(out);
      fs::create_directories(dir);
      std::ostringstream manifest;
      manifest << "image_path,mixture,dft40,polish_cycles_k\n";
      json truths = json::array();
      for (std::size_t i = 0; i < frames.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "wear_%02zu.png", i);
        write_gray(frames[i].image, dir / name);
        manifest << name << "," << canonical_mixture(mixture) << ",," << i << "\n";
        json t = truth(frames[i]);
        t["image_path"] = name;
        t["wear"] = wear[i];
        truths.push_back(t);
      }
      write_text(dir / "manifest.csv", manifest.str());
      write_text(dir / "truth.json", truths.dump(2) + "\n");
      os << "wrote " << frames.size() << " frames to " << dir.string() << "\n";
      return 0;
    }
    os << "wrote " << out << "\n";
    return 0;
  }
};

struct ReportCmd {
  std::string results, out, models;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("report", "Re-emit a report with models and plot CSVs");
    sub->add_option("--results", results, "Report JSON from `indicators`")->required();
    sub->add_option("--out", out, "Output report JSON")->required();
    sub->add_option("--models", models, "`builtin` or a model JSON file to embed");
  }

  int run(std::ostream& os) const {
    const Report report = read_report(results);
    std::vector<RegressionModel> embedded = report.models;
    if (!models.empty()) embedded = resolve_models(models, os).models();
    std::optional<PipelineConfig> cfg;
    if (!report.config_text.empty()) cfg = parse_config(report.config_text);
    const auto csvs = write_report(report.results, embedded, out, cfg ? &*cfg : nullptr);
    os << "wrote " << out;
    for (const auto& p : csvs) os << " " << p.string();
    os << "\n";
    return 0;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pavement texture indicators and friction models", "pavetex"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  PreprocessCmd preprocess_cmd;
  SegmentCmd segment_cmd;
  IndicatorsCmd indicators_cmd;
  FitCmd fit_cmd;
  PredictCmd predict_cmd;
  CompareCmd compare_cmd;
  SynthCmd synth_cmd;
  ReportCmd report_cmd;
  preprocess_cmd.attach(app);
  segment_cmd.attach(app);
  indicators_cmd.attach(app);
  fit_cmd.attach(app);
  predict_cmd.attach(app);
  compare_cmd.attach(app);
  synth_cmd.attach(app);
  report_cmd.attach(app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kUsage);
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "preprocess") return preprocess_cmd.run(out);
    if (name == "segment") return segment_cmd.run(out);
    if (name == "indicators") return indicators_cmd.run(out, err);
    if (name == "fit") return fit_cmd.run(out, err);
    if (name == "predict") return predict_cmd.run(out, err);
    if (name == "compare") return compare_cmd.run(out, err);
    if (name == "synth") return synth_cmd.run(out);
    if (name == "report") return report_cmd.run(out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kComputation);
  }
  return static_cast<int>(ErrorKind::kUsage);
}

}  // namespace pavetex
