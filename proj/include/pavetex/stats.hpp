#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace pavetex {

/// Paired (indicator, measured friction) values for one mixture.
struct ObservationSet {
  std::string mixture;
  std::string indicator = "area";
  std::vector<double> x;
  std::vector<double> y;
};

/// Simple linear friction model y = intercept + slope * x with its fit
/// diagnostics.
struct RegressionModel {
  std::string mixture;
  std::string indicator = "area";
  double intercept = 0.0;
  double slope = 0.0;
  int n = 0;
  double pearson_r = 0.0;
  double r2 = 0.0;
  double r2_adj = 0.0;
  bool builtin = false;
  std::string provenance;

  bool operator==(const RegressionModel&) const = default;
};

struct Prediction {
  double value = 0.0;
  bool out_of_range = false;  // outside [0, 1]; advisory only
};

/// Closed-form least squares with r, R^2 and adjusted R^2 (p = 1).
/// Throws computation Error for n < 3 or constant x.
RegressionModel ols_fit(const ObservationSet& obs);

double pearson_r(std::span<const double> xs, std::span<const double> ys);
double r_squared(std::span<const double> ys, std::span<const double> yhats);
double adjusted_r_squared(double r2, int n, int p);

Prediction predict(const RegressionModel& model, double x);

/// Canonical mixture spelling: "chip seal", "Chip_Seal" -> "ChipSeal";
/// "dgac" -> "DGAC"; "ogfc" -> "OGFC". Other labels are returned trimmed.
std::string canonical_mixture(std::string_view label);

class ModelRegistry {
 public:
  ModelRegistry() = default;
  explicit ModelRegistry(std::vector<RegressionModel> models) : models_(std::move(models)) {}

  /// Throws data Error "no model for mixture ..." when absent.
  const RegressionModel& find(std::string_view mixture, std::string_view indicator = "area") const;
  bool contains(std::string_view mixture, std::string_view indicator = "area") const;
  const std::vector<RegressionModel>& models() const { return models_; }

 private:
  std::vector<RegressionModel> models_;
  const RegressionModel* lookup(std::string_view mixture, std::string_view indicator) const;
};

/// The three laboratory Area models (DGAC, ChipSeal, OGFC), n = 8 each.
const ModelRegistry& builtin_models();

inline constexpr const char* kBuiltinCaveat =
    "built-in laboratory calibration (DFT40 vs protruding-aggregate Area, 8 polishing levels "
    "per mixture); thresholds and models require recalibration for field imagery";

void to_json(nlohmann::json& j, const RegressionModel& m);
void from_json(const nlohmann::json& j, RegressionModel& m);

void save_models(const std::vector<RegressionModel>& models, const std::filesystem::path& path);
ModelRegistry load_models(const std::filesystem::path& path);

}  // namespace pavetex
