#include "pavetex/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "pavetex/error.hpp"

namespace pavetex {

namespace {

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw usage_error("pearson_r: sequences differ in length");
  if (xs.size() < 2) throw computation_error("pearson_r needs at least 2 points");
  const double mx = mean(xs), my = mean(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw computation_error("pearson_r: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double r_squared(std::span<const double> ys, std::span<const double> yhats) {
  if (ys.size() != yhats.size()) throw usage_error("r_squared: sequences differ in length");
  if (ys.size() < 2) throw computation_error("r_squared needs at least 2 points");
  const double my = mean(ys);
  double ssr = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    ssr += (ys[i] - yhats[i]) * (ys[i] - yhats[i]);
    sst += (ys[i] - my) * (ys[i] - my);
  }
  if (sst == 0.0) throw computation_error("r_squared: observed values have zero variance");
  return 1.0 - ssr / sst;
}

double adjusted_r_squared(double r2, int n, int p) {
  if (p < 0 || n <= p + 1) {
    throw computation_error("adjusted R^2 needs n > p + 1 (n = " + std::to_string(n) +
                            ", p = " + std::to_string(p) + ")");
  }
  return 1.0 - ((1.0 - r2) / (n - p - 1)) * (n - 1);
}

RegressionModel ols_fit(const ObservationSet& obs) {
  if (obs.x.size() != obs.y.size()) throw usage_error("ols_fit: x and y differ in length");
  const int n = static_cast<int>(obs.x.size());
  if (n < 3) {
    throw computation_error("too few points to fit " + obs.mixture + " (" + std::to_string(n) +
                            " < 3)");
  }
  const double mx = mean(obs.x), my = mean(obs.y);
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < n; ++i) {
    sxy += (obs.x[i] - mx) * (obs.y[i] - my);
    sxx += (obs.x[i] - mx) * (obs.x[i] - mx);
  }
  if (sxx == 0.0) throw computation_error("degenerate x: indicator " + obs.indicator + " is constant for " + obs.mixture);

  RegressionModel m;
  m.mixture = obs.mixture;
  m.indicator = obs.indicator;
  m.slope = sxy / sxx;
  m.intercept = my - m.slope * mx;
  m.n = n;
  m.provenance = "ordinary least squares fit";

  std::vector<double> yhat(n);
  for (int i = 0; i < n; ++i) yhat[i] = m.intercept + m.slope * obs.x[i];

  const bool y_constant = std::all_of(obs.y.begin(), obs.y.end(), [&](double v) { return v == obs.y.front(); });
  if (y_constant) {
    // Flat exact fit: no variance to explain, correlation undefined. Both
    // reported as 0 so r^2 == R^2 still holds.
    m.pearson_r = 0.0;
    m.r2 = 0.0;
  } else {
    m.pearson_r = pearson_r(obs.x, obs.y);
    m.r2 = r_squared(obs.y, yhat);
  }
  m.r2_adj = adjusted_r_squared(m.r2, n, 1);
  return m;
}

Prediction predict(const RegressionModel& model, double x) {
  Prediction p;
  p.value = model.intercept + model.slope * x;
  p.out_of_range = p.value < 0.0 || p.value > 1.0;
  return p;
}

std::string canonical_mixture(std::string_view label) {
  std::string squashed;
  for (char c : label) {
    if (c == ' ' || c == '_' || c == '-') continue;
    squashed.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (squashed == "dgac") return "DGAC";
  if (squashed == "ogfc") return "OGFC";
  if (squashed == "chipseal") return "ChipSeal";
  auto begin = label.find_first_not_of(" \t");
  auto end = label.find_last_not_of(" \t");
  if (begin == std::string_view::npos) return {};
  return std::string(label.substr(begin, end - begin + 1));
}

const RegressionModel* ModelRegistry::lookup(std::string_view mixture, std::string_view indicator) const {
  const std::string key = canonical_mixture(mixture);
  for (const auto& m : models_) {
    if (canonical_mixture(m.mixture) == key && m.indicator == indicator) return &m;
  }
  return nullptr;
}

const RegressionModel& ModelRegistry::find(std::string_view mixture, std::string_view indicator) const {
  if (const auto* m = lookup(mixture, indicator)) return *m;
  throw data_error("no model for mixture '" + std::string(mixture) + "' (indicator " +
                   std::string(indicator) + ")");
}

bool ModelRegistry::contains(std::string_view mixture, std::string_view indicator) const {
  return lookup(mixture, indicator) != nullptr;
}

const ModelRegistry& builtin_models() {
  static const ModelRegistry registry = [] {
    auto make = [](std::string mixture, double intercept, double slope, double r, double r2,
                   double r2_adj) {
      RegressionModel m;
      m.mixture = std::move(mixture);
      m.indicator = "area";
      m.intercept = intercept;
      m.slope = slope;
      m.n = 8;
      m.pearson_r = r;
      m.r2 = r2;
      m.r2_adj = r2_adj;
      m.builtin = true;
      m.provenance = kBuiltinCaveat;
      return m;
    };
    return ModelRegistry({
        make("DGAC", 0.2396, 1.0632e-4, 0.9620, 0.9255, 0.9130),
        make("ChipSeal", 0.3151, 1.4331e-4, 0.9851, 0.9704, 0.9655),
        make("OGFC", -0.2504, 2.4260e-4, 0.9782, 0.9569, 0.9498),
    });
  }();
  return registry;
}

void to_json(nlohmann::json& j, const RegressionModel& m) {
  j = nlohmann::json{{"mixture", m.mixture},
                     {"indicator", m.indicator},
                     {"intercept", m.intercept},
                     {"slope", m.slope},
                     {"diagnostics",
                      {{"n", m.n}, {"pearson_r", m.pearson_r}, {"r2", m.r2}, {"r2_adj", m.r2_adj}}},
                     {"builtin", m.builtin},
                     {"provenance", m.provenance}};
}

void from_json(const nlohmann::json& j, RegressionModel& m) {
  m.mixture = j.at("mixture").get<std::string>();
  m.indicator = j.value("indicator", std::string("area"));
  m.intercept = j.at("intercept").get<double>();
  m.slope = j.at("slope").get<double>();
  if (j.contains("diagnostics")) {
    const auto& d = j.at("diagnostics");
    m.n = d.value("n", 0);
    m.pearson_r = d.value("pearson_r", 0.0);
    m.r2 = d.value("r2", 0.0);
    m.r2_adj = d.value("r2_adj", 0.0);
  }
  m.builtin = j.value("builtin", false);
  m.provenance = j.value("provenance", std::string());
}

void save_models(const std::vector<RegressionModel>& models, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path.string());
  nlohmann::json doc = {{"models", models}};
  out << doc.dump(2) << "\n";
}

ModelRegistry load_models(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot read model file " + path.string());
  try {
    const auto doc = nlohmann::json::parse(in);
    const auto& list = doc.is_array() ? doc : doc.at("models");
    return ModelRegistry(list.get<std::vector<RegressionModel>>());
  } catch (const nlohmann::json::exception& e) {
    throw data_error("invalid model file " + path.string() + ": " + e.what());
  }
}

}  // namespace pavetex
