#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mellin_deconv/mellin.hpp"
#include "mellin_deconv/models.hpp"

namespace mellin_deconv {

/// count points log-spaced on [lo, hi], both ends included.
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

/// Evaluation setup shared by the estimators.
///
/// The t-grid must resolve the oscillation of x^{-it} on the whole x-grid:
/// step <= (2 pi / max |ln x|) / 20, checked by validate().
struct EstimatorConfig {
  static constexpr double kDefaultXMin = 0.01;
  static constexpr double kDefaultXMax = 10.0;
  static constexpr std::size_t kDefaultXPoints = 400;
  static constexpr double kNodesPerPeriod = 20.0;

  double alpha = 1.0;
  FrequencyGrid grid{};
  std::vector<double> x_grid = log_spaced(kDefaultXMin, kDefaultXMax, kDefaultXPoints);
  /// Clip negative values to zero in reported curves. Norms, risks and the
  /// selection contrast always use the unclipped values.
  bool truncation_negative = true;

  /// Throws std::invalid_argument on a bad configuration.
  void validate() const;
};

/// Builds and validates a configuration.
EstimatorConfig make_estimator_config(double alpha, const FrequencyGrid& grid,
                                      std::vector<double> x_grid, bool truncation_negative = true);

/// One realization of the spectral cut-off estimator on the x-grid.
struct CutoffEstimate {
  double k = 0.0;
  std::vector<double> x;
  std::vector<double> values;
  /// ||f_hat_k||^2_omega by Parseval, over the whole half-line.
  double omega_norm_sq = 0.0;
  std::size_t n = 0;
  std::string error_name;

  /// values with negatives replaced by zero.
  std::vector<double> clipped_values() const;
};

/// M_hat(t) / M[g](t) for |t| <= k, i.e. the Mellin transform of the
/// estimator before the cut-off. Identity division is skipped for dirac.
MellinValue deconvolved_mellin(const Sample& sample, const ErrorDensity& g, double k,
                               const EstimatorConfig& cfg);

/// Direct observations, any alpha >= 0.
CutoffEstimate estimate_direct(const Sample& sample, double k, const EstimatorConfig& cfg);

/// Observations Y = X U with known error law g; requires cfg.alpha == 1.
/// With g = dirac the result is identical to estimate_direct.
CutoffEstimate estimate_noisy(const Sample& sample, const ErrorDensity& g, double k,
                              const EstimatorConfig& cfg);

/// int (truth - values)^2 x^{2 alpha - 1} dx by trapezoid over the x-grid.
double weighted_ise(std::span<const double> x, std::span<const double> values,
                    std::span<const double> truth, double alpha);
double weighted_ise(const CutoffEstimate& est, const TargetDensity& truth, double alpha);

/// truth.pdf on every node of x.
std::vector<double> tabulate_pdf(const TargetDensity& truth, std::span<const double> x);

/// (2 pi n)^{-1} Delta_g(k); k / (pi n) for the dirac law.
double variance_bound(std::size_t n, double k, const ErrorDensity& g, const FrequencyGrid& grid);

/// sigma_hat^2 k / (pi n) with sigma_hat^2 = n^{-1} sum X_j^{2(alpha - 1)};
/// the direct-observation variance bound for general alpha.
double direct_variance_bound(const Sample& sample, double k, double alpha);

}  // namespace mellin_deconv
