#include "mellin_deconv/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "mellin_deconv/parallel.hpp"

namespace mellin_deconv {

void PenaltyConfig::validate() const {
  if (!(chi > 0.0) || !std::isfinite(chi)) {
    throw std::invalid_argument("PenaltyConfig: chi must be positive");
  }
  if (gamma < 0) throw std::invalid_argument("PenaltyConfig: gamma must be nonnegative");
  if (K_cap < 1) throw std::invalid_argument("PenaltyConfig: K_cap must be positive");
}

double default_chi(int gamma) {
  switch (gamma) {
    case 0:
      return 1.2;
    case 1:
      return 0.8;
    case 2:
      return 0.01;
    default:
      throw std::invalid_argument("default_chi: no reference value for gamma = " +
                                  std::to_string(gamma));
  }
}

PenaltyConfig default_penalty(const ErrorDensity& g) {
  return PenaltyConfig{default_chi(g.gamma()), g.gamma(), PenaltyConfig::kDefaultKCap};
}

namespace {

// k^p saturating at n + 1, so comparisons against n stay exact.
std::size_t saturating_power(std::size_t k, int p, std::size_t n) {
  std::size_t out = 1;
  for (int i = 0; i < p; ++i) {
    if (k != 0 && out > (n + 1) / k) return n + 1;
    out *= k;
  }
  return out;
}

}  // namespace

int cutoff_bound(std::size_t n, int gamma, int K_cap) {
  if (n == 0) throw std::invalid_argument("cutoff_bound: n must be positive");
  if (gamma < 0 || K_cap < 1) throw std::invalid_argument("cutoff_bound: bad gamma or cap");
  const int p = 2 * gamma + 1;
  auto k = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), 1.0 / p)));
  while (k > 0 && saturating_power(k, p, n) > n) --k;
  while (saturating_power(k + 1, p, n) <= n) ++k;
  k = std::max<std::size_t>(k, 1);
  return static_cast<int>(std::min<std::size_t>(k, static_cast<std::size_t>(K_cap)));
}

double penalty(double chi, int gamma, int k, std::size_t n) {
  return chi * std::pow(static_cast<double>(k), 2 * gamma + 1) / static_cast<double>(n);
}

SelectionResult select_from_norms(std::span<const double> norms, double chi, int gamma,
                                  std::size_t n) {
  if (norms.empty()) throw std::invalid_argument("select_from_norms: no cut-offs");
  SelectionResult result;
  result.K_n = static_cast<int>(norms.size());
  result.table.reserve(norms.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < norms.size(); ++i) {
    SelectionRow row;
    row.k = static_cast<int>(i) + 1;
    row.omega_norm_sq = norms[i];
    row.pen = penalty(chi, gamma, row.k, n);
    row.contrast = -row.omega_norm_sq + row.pen;
    if (row.contrast < best) {
      best = row.contrast;
      result.k_hat = row.k;
    }
    result.table.push_back(row);
  }
  return result;
}

std::vector<double> integer_cutoffs(int K) {
  std::vector<double> ks(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) ks[static_cast<std::size_t>(k - 1)] = static_cast<double>(k);
  return ks;
}

SelectionResult select_k(const Sample& sample, const ErrorDensity& g, const PenaltyConfig& pc,
                         const EstimatorConfig& cfg) {
  pc.validate();
  cfg.validate();
  if (cfg.alpha != 1.0) throw std::invalid_argument("select_k: requires alpha = 1");
  const int K_n = cutoff_bound(sample.size(), pc.gamma, pc.K_cap);
  if (static_cast<double>(K_n) > cfg.grid.k_max()) {
    std::ostringstream msg;
    msg << "select_k: K_n = " << K_n << " exceeds the grid bound " << cfg.grid.k_max();
    throw std::invalid_argument(msg.str());
  }
  const std::vector<double> ks = integer_cutoffs(K_n);
  const MellinValue mv = deconvolved_mellin(sample, g, ks.back(), cfg);
  const std::vector<double> norms = parseval_path(mv, ks);
  return select_from_norms(norms, pc.chi, pc.gamma, sample.size());
}

AdaptiveResult adaptive_estimate(const Sample& sample, const ErrorDensity& g,
                                 const PenaltyConfig& pc, const EstimatorConfig& cfg) {
  AdaptiveResult result;
  result.selection = select_k(sample, g, pc, cfg);
  result.estimate = estimate_noisy(sample, g, static_cast<double>(result.selection.k_hat), cfg);
  result.chi_threshold =
      12.0 * cg_estimate(g, 1, result.selection.K_n, cfg.grid) / std::numbers::pi;
  return result;
}

// ---------------------------------------------------------------------------
// Calibration

void CalibrationConfig::validate() const {
  if (histograms < 1 || reps < 1 || n < 1) {
    throw std::invalid_argument("CalibrationConfig: histograms, reps and n must be positive");
  }
  if (min_bins < 1 || max_bins < min_bins) {
    throw std::invalid_argument("CalibrationConfig: bad bin range");
  }
  if (!(span > 0.0)) throw std::invalid_argument("CalibrationConfig: span must be positive");
  if (K_cap < 1) throw std::invalid_argument("CalibrationConfig: K_cap must be positive");
}

namespace {

// Stream families: histogram shapes use index 0, samples of histogram h use 1 + h.
constexpr std::uint64_t kHistogramFamily = 0;

}  // namespace

TargetDensity calibration_histogram(const CalibrationConfig& cal, std::size_t index) {
  Rng rng = make_stream(derive_seed(cal.seed, kHistogramFamily), index);
  const int range = cal.max_bins - cal.min_bins + 1;
  const int bins =
      cal.min_bins + std::min(range - 1, static_cast<int>(uniform_open(rng) * range));
  std::vector<double> edges;
  edges.reserve(static_cast<std::size_t>(bins) + 1);
  edges.push_back(0.0);
  for (int b = 1; b < bins; ++b) edges.push_back(uniform_open(rng) * cal.span);
  std::sort(edges.begin() + 1, edges.end());
  edges.push_back(cal.span);
  std::vector<double> weights(static_cast<std::size_t>(bins));
  double total = 0.0;
  for (auto& w : weights) {
    w = -std::log(uniform_open(rng));
    total += w;
  }
  for (auto& w : weights) w /= total;
  return make_histogram(std::move(edges), std::move(weights));
}

CalibrationResult calibrate_chi(const ErrorDensity& g, std::span<const double> chi_grid,
                                const CalibrationConfig& cal, const EstimatorConfig& cfg,
                                unsigned threads) {
  if (chi_grid.empty()) throw std::invalid_argument("calibrate_chi: empty chi grid");
  for (double chi : chi_grid) {
    if (!(chi > 0.0)) throw std::invalid_argument("calibrate_chi: chi must be positive");
  }
  cal.validate();
  cfg.validate();
  if (cfg.alpha != 1.0) throw std::invalid_argument("calibrate_chi: requires alpha = 1");

  const auto histograms = static_cast<std::size_t>(cal.histograms);
  const auto reps = static_cast<std::size_t>(cal.reps);
  std::vector<TargetDensity> targets;
  std::vector<std::vector<double>> truths;
  targets.reserve(histograms);
  for (std::size_t h = 0; h < histograms; ++h) {
    targets.push_back(calibration_histogram(cal, h));
    truths.push_back(tabulate_pdf(targets.back(), cfg.x_grid));
  }

  const int K_n = cutoff_bound(cal.n, g.gamma(), cal.K_cap);
  if (static_cast<double>(K_n) > cfg.grid.k_max()) {
    throw std::invalid_argument("calibrate_chi: K_n exceeds the grid bound");
  }
  const std::vector<double> ks = integer_cutoffs(K_n);

  // ise[task][c] for task = h * reps + r.
  std::vector<std::vector<double>> ise(histograms * reps);
  parallel_for(ise.size(), threads, [&](std::size_t task) {
    const std::size_t h = task / reps;
    const std::size_t r = task % reps;
    Rng rng = make_stream(derive_seed(cal.seed, 1 + h), r);
    const Sample sample = sample_noisy(targets[h], g, cal.n, rng);
    const MellinValue mv = deconvolved_mellin(sample, g, ks.back(), cfg);
    const std::vector<double> norms = parseval_path(mv, ks);
    const auto curves = invert_cutoff_path(mv, ks, cfg.x_grid);
    std::vector<double> by_k(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
      by_k[i] = weighted_ise(cfg.x_grid, curves[i], truths[h], 1.0);
    }
    std::vector<double> out(chi_grid.size());
    for (std::size_t c = 0; c < chi_grid.size(); ++c) {
      const SelectionResult sel = select_from_norms(norms, chi_grid[c], g.gamma(), cal.n);
      out[c] = by_k[static_cast<std::size_t>(sel.k_hat - 1)];
    }
    ise[task] = std::move(out);
  });

  CalibrationResult result;
  result.chi_grid.assign(chi_grid.begin(), chi_grid.end());
  result.mean_ise.assign(chi_grid.size(), 0.0);
  for (const auto& row : ise) {
    for (std::size_t c = 0; c < chi_grid.size(); ++c) result.mean_ise[c] += row[c];
  }
  for (auto& m : result.mean_ise) m /= static_cast<double>(ise.size());

  std::size_t best = 0;
  for (std::size_t c = 1; c < chi_grid.size(); ++c) {
    const double m = result.mean_ise[c];
    const double b = result.mean_ise[best];
    if (m < b || (m == b && chi_grid[c] > chi_grid[best])) best = c;
  }
  result.chi = chi_grid[best];
  return result;
}

}  // namespace mellin_deconv
