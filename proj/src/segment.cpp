#include "pavetex/segment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pavetex/error.hpp"

namespace pavetex {

int Histogram256::min_level() const {
  for (int v = 0; v < 256; ++v)
    if (counts[v]) return v;
  return -1;
}

int Histogram256::max_level() const {
  for (int v = 255; v >= 0; --v)
    if (counts[v]) return v;
  return -1;
}

int Histogram256::occupied_levels() const {
  return static_cast<int>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }));
}

Histogram256 histogram(const GrayRaster& img) {
  if (img.empty()) throw data_error("histogram of an empty image");
  Histogram256 h;
  for (std::uint8_t v : img.values) ++h.counts[v];
  h.total = img.values.size();
  return h;
}

namespace {

void require_two_levels(const Histogram256& h) {
  if (h.total == 0 || h.occupied_levels() < 2) {
    throw computation_error("no threshold exists: histogram has fewer than two occupied levels");
  }
}

// Smallest candidate whose score is within tolerance of the best one.
int argmax_smallest(const std::vector<double>& scores, const std::vector<bool>& valid) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < scores.size(); ++t)
    if (valid[t]) best = std::max(best, scores[t]);
  const double tol = kThresholdTieTolerance * std::max(1.0, std::abs(best));
  for (std::size_t t = 0; t < scores.size(); ++t)
    if (valid[t] && scores[t] >= best - tol) return static_cast<int>(t);
  return -1;
}

}  // namespace

ThresholdResult isodata_threshold(const Histogram256& h, double epsilon, int max_iterations) {
  if (!(epsilon > 0.0)) throw usage_error("IsoData tolerance must be > 0");
  require_two_levels(h);

  // Prefix count and sum over levels <= k.
  std::array<std::uint64_t, 256> below_count{};
  std::array<std::uint64_t, 256> below_sum{};
  std::uint64_t c = 0, s = 0;
  for (int v = 0; v < 256; ++v) {
    c += h.counts[v];
    s += h.counts[v] * static_cast<std::uint64_t>(v);
    below_count[v] = c;
    below_sum[v] = s;
  }
  const std::uint64_t total_sum = s;

  ThresholdResult result;
  result.converged = false;
  double t = 0.5 * (h.min_level() + h.max_level());
  for (int iter = 1; iter <= max_iterations; ++iter) {
    const int k = static_cast<int>(std::floor(t));
    const std::uint64_t n_low = below_count[k];
    const std::uint64_t n_high = h.total - n_low;
    if (n_low == 0 || n_high == 0) throw computation_error("degenerate partition at T = " + std::to_string(t));
    const double mu_low = static_cast<double>(below_sum[k]) / static_cast<double>(n_low);
    const double mu_high = static_cast<double>(total_sum - below_sum[k]) / static_cast<double>(n_high);
    const double t_new = 0.5 * (mu_low + mu_high);
    result.iterations = iter;
    const bool done = std::abs(t_new - t) < epsilon && static_cast<int>(std::floor(t_new)) == k;
    t = t_new;
    if (done) {
      result.converged = true;
      break;
    }
  }
  result.value = t;
  result.threshold = static_cast<int>(std::floor(t + 0.5));
  return result;
}

ThresholdResult otsu_threshold(const Histogram256& h) {
  require_two_levels(h);
  const auto total = static_cast<std::int64_t>(h.total);
  std::int64_t total_sum = 0;
  for (int v = 0; v < 256; ++v) total_sum += static_cast<std::int64_t>(h.counts[v]) * v;

  // N^2 * sigma_B^2 * (n0 n1 / N^2) rearranged: (N*S0 - n0*S)^2 / (n0 * n1),
  // with the numerator difference formed exactly in integers.
  std::vector<double> score(256, 0.0);
  std::vector<bool> valid(256, false);
  std::int64_t n0 = 0, s0 = 0;
  for (int t = 0; t < 256; ++t) {
    n0 += static_cast<std::int64_t>(h.counts[t]);
    s0 += static_cast<std::int64_t>(h.counts[t]) * t;
    const std::int64_t n1 = total - n0;
    if (n0 == 0 || n1 == 0) continue;
    const auto d = static_cast<double>(total * s0 - n0 * total_sum);
    score[t] = d * d / (static_cast<double>(n0) * static_cast<double>(n1));
    valid[t] = true;
  }
  ThresholdResult r;
  r.threshold = argmax_smallest(score, valid);
  r.value = r.threshold;
  r.iterations = 1;
  return r;
}

ThresholdResult max_entropy_threshold(const Histogram256& h) {
  require_two_levels(h);
  // Class entropy from counts: H = ln n - (sum c ln c) / n.
  std::array<double, 256> clnc{};
  for (int v = 0; v < 256; ++v) {
    const double c = static_cast<double>(h.counts[v]);
    clnc[v] = c > 0 ? c * std::log(c) : 0.0;
  }
  std::array<double, 257> low_acc{}, high_acc{};
  std::array<std::uint64_t, 257> low_n{}, high_n{};
  for (int v = 0; v < 256; ++v) {
    low_acc[v + 1] = low_acc[v] + clnc[v];
    low_n[v + 1] = low_n[v] + h.counts[v];
  }
  for (int v = 255; v >= 0; --v) {
    high_acc[v] = high_acc[v + 1] + clnc[v];
    high_n[v] = high_n[v + 1] + h.counts[v];
  }

  std::vector<double> score(256, 0.0);
  std::vector<bool> valid(256, false);
  for (int t = 0; t < 256; ++t) {
    const double n0 = static_cast<double>(low_n[t + 1]);
    const double n1 = static_cast<double>(high_n[t + 1]);
    if (n0 == 0 || n1 == 0) continue;
    const double h0 = std::log(n0) - low_acc[t + 1] / n0;
    const double h1 = std::log(n1) - high_acc[t + 1] / n1;
    score[t] = h0 + h1;
    valid[t] = true;
  }
  ThresholdResult r;
  r.threshold = argmax_smallest(score, valid);
  r.value = r.threshold;
  r.iterations = 1;
  return r;
}

BinaryMask binarize(const GrayRaster& img, int threshold, Polarity polarity) {
  if (threshold < 0 || threshold > 255) throw usage_error("threshold must be in [0, 255]");
  BinaryMask mask(img.width, img.height, false, img.mm_per_px);
  const bool above = polarity == Polarity::kAbove;
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    const bool high = img.values[i] > threshold;
    mask.bits[i] = (high == above) ? 1 : 0;
  }
  return mask;
}

double area_mm2(const BinaryMask& mask) {
  if (!mask.mm_per_px || !(*mask.mm_per_px > 0.0)) {
    throw data_error("missing physical scale (mm_per_px) for area computation");
  }
  const double pitch = *mask.mm_per_px;
  return static_cast<double>(mask.foreground_count()) * (pitch * pitch);
}

}  // namespace pavetex
