#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mellin_deconv/estimator.hpp"
#include "mellin_deconv/models.hpp"

namespace mellin_deconv {

/// Penalty pen(k) = chi k^{2 gamma + 1} / n on the cut-offs 1..K_n.
struct PenaltyConfig {
  static constexpr int kDefaultKCap = 200;

  double chi = 1.0;
  int gamma = 0;
  int K_cap = kDefaultKCap;

  void validate() const;
};

/// Penalty constants used for gamma = 0, 1, 2 in the reference simulations:
/// 1.2, 0.8 and 0.01. Throws for other gamma.
double default_chi(int gamma);

/// Penalty configuration for error law g with its default chi.
PenaltyConfig default_penalty(const ErrorDensity& g);

struct SelectionRow {
  int k = 0;
  double omega_norm_sq = 0.0;
  double pen = 0.0;
  /// -omega_norm_sq + pen
  double contrast = 0.0;
};

struct SelectionResult {
  int k_hat = 0;
  int K_n = 0;
  /// One row per k = 1..K_n.
  std::vector<SelectionRow> table;
};

/// K_n = min(max(1, floor(n^{1/(2 gamma + 1)})), K_cap), computed in integers.
int cutoff_bound(std::size_t n, int gamma, int K_cap);

double penalty(double chi, int gamma, int k, std::size_t n);

/// Builds the table from ||f_hat_k||^2 for k = 1..norms.size() and returns
/// the first minimizer of the contrast.
SelectionResult select_from_norms(std::span<const double> norms, double chi, int gamma,
                                  std::size_t n);

/// Integer cut-offs 1..K as grid values.
std::vector<double> integer_cutoffs(int K);

/// Data-driven cut-off: argmin over k in 1..K_n of -||f_hat_k||^2 + pen(k).
/// The norms come from one cumulative Parseval pass over the t-grid.
SelectionResult select_k(const Sample& sample, const ErrorDensity& g, const PenaltyConfig& pc,
                         const EstimatorConfig& cfg);

struct AdaptiveResult {
  CutoffEstimate estimate;
  SelectionResult selection;
  /// 12 C_g / pi with C_g from cg_estimate over 1..K_n; diagnostic only.
  double chi_threshold = 0.0;
};

AdaptiveResult adaptive_estimate(const Sample& sample, const ErrorDensity& g,
                                 const PenaltyConfig& pc, const EstimatorConfig& cfg);

/// Random histogram targets for penalty calibration.
struct CalibrationConfig {
  int histograms = 50;
  int reps = 20;
  std::size_t n = 1000;
  int min_bins = 3;
  int max_bins = 10;
  double span = 5.0;
  int K_cap = PenaltyConfig::kDefaultKCap;
  std::uint64_t seed = 20240601;

  void validate() const;
};

/// Histogram number `index` of the calibration family: B ~ U{min_bins..max_bins},
/// interior edges sorted U[0, span], weights ~ Dirichlet(1, ..., 1).
TargetDensity calibration_histogram(const CalibrationConfig& cal, std::size_t index);

struct CalibrationResult {
  double chi = 0.0;
  std::vector<double> chi_grid;
  /// Mean weighted ISE of the adaptive estimator, per chi_grid entry.
  std::vector<double> mean_ise;
};

/// Picks the chi in chi_grid minimizing the mean weighted ISE of the adaptive
/// estimator over histograms x replications; ties go to the larger chi.
/// Every chi sees the same samples.
CalibrationResult calibrate_chi(const ErrorDensity& g, std::span<const double> chi_grid,
                                const CalibrationConfig& cal, const EstimatorConfig& cfg,
                                unsigned threads = 0);

}  // namespace mellin_deconv
