#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mellin_deconv/estimator.hpp"
#include "mellin_deconv/selection.hpp"

namespace mellin_deconv {

/// How each replication picks its cut-off.
struct MCMode {
  enum class Kind { adaptive, oracle, fixed };

  Kind kind = Kind::adaptive;
  /// Penalty constant for adaptive mode.
  double chi = 0.0;
  /// Cut-off for fixed mode.
  double k = 0.0;

  static MCMode adaptive(double chi) { return {Kind::adaptive, chi, 0.0}; }
  /// The single k in 1..K_n minimizing the Monte Carlo mean weighted ISE.
  static MCMode oracle() { return {Kind::oracle, 0.0, 0.0}; }
  static MCMode fixed(double k) { return {Kind::fixed, 0.0, k}; }
};

struct MCConfig {
  std::string target;
  std::string error;
  std::size_t n = 1000;
  std::size_t reps = 50;
  std::uint64_t master_seed = 1;
  MCMode mode{};
  int K_cap = PenaltyConfig::kDefaultKCap;

  void validate() const;
};

struct RiskReport {
  /// Weighted ISE and cut-off of every replication, in replication order.
  std::vector<double> ise;
  std::vector<double> k_used;
  double mean = 0.0;
  double median = 0.0;
  std::vector<double> x;
  std::vector<double> truth;
  /// Pointwise median of the reported (clipped if configured) curves.
  std::vector<double> median_curve;
  /// (cut-off, count) in increasing cut-off.
  std::vector<std::pair<double, std::size_t>> k_histogram;
  /// Cut-off bound for n and the error law; fixed mode only reports it.
  int K_n = 0;
};

/// Replication r draws its sample from make_stream(master_seed, r). Output
/// is independent of `threads` (0 = all cores).
RiskReport monte_carlo(const MCConfig& mc, const EstimatorConfig& cfg, unsigned threads = 0);

struct OracleRisk {
  int k_star = 0;
  double risk = 0.0;
  /// Mean weighted ISE for k = 1..K_n.
  std::vector<double> risk_by_k;
};

/// Grid search over k in 1..K_n (gamma of the error law) of the Monte Carlo
/// mean weighted ISE, using the same streams as monte_carlo.
OracleRisk oracle_risk(const std::string& target, const std::string& error, std::size_t n,
                       std::size_t reps, std::uint64_t seed, const EstimatorConfig& cfg,
                       unsigned threads = 0, int K_cap = PenaltyConfig::kDefaultKCap);

struct RateStudy {
  std::vector<std::size_t> n_list;
  std::vector<double> k_used;
  std::vector<double> mean_ise;
  double slope = 0.0;
  /// -2 s / (2 s + 2 gamma + 1)
  double theoretical_exponent = 0.0;
  /// Target is super-smooth, so the polynomial-rate comparison is not meaningful.
  bool super_smooth_warning = false;
};

/// Least-squares slope of log(values) against log(n).
double loglog_slope(std::span<const double> n, std::span<const double> values);

/// k_o = n^{1/(2 s + 2 gamma + 1)} rounded to the nearest grid node.
double rate_cutoff(std::size_t n, double s, int gamma, const FrequencyGrid& grid);

/// Mean weighted ISE at k_o for every n; sample size index i uses master
/// seed derive_seed(seed, i).
RateStudy rate_study(const std::string& target, const std::string& error, double s,
                     std::span<const std::size_t> n_list, std::size_t reps, std::uint64_t seed,
                     const EstimatorConfig& cfg, unsigned threads = 0);

}  // namespace mellin_deconv
