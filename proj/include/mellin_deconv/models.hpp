#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mellin_deconv/mellin.hpp"
#include "mellin_deconv/random.hpp"

namespace mellin_deconv {

/// Known target density f with exact pdf, sampler and Mellin transform on
/// the line Re = 1.
class TargetDensity {
 public:
  using Pdf = std::function<double(double)>;
  using Transform = std::function<complex(double)>;
  using Draw = std::function<double(Rng&)>;

  /// s_ref empty means super-smooth (exponentially decaying transform).
  TargetDensity(std::string name, Pdf pdf, Transform mellin, Draw draw,
                std::optional<double> s_ref, std::optional<double> support_upper = std::nullopt);

  const std::string& name() const { return name_; }
  double pdf(double x) const { return pdf_(x); }
  /// M[f](1 + i t).
  complex mellin(double t) const { return mellin_(t); }
  double draw(Rng& rng) const { return draw_(rng); }
  Sample sample(Rng& rng, std::size_t n) const;

  const std::optional<double>& s_ref() const { return s_ref_; }
  bool super_smooth() const { return !s_ref_.has_value(); }
  const std::optional<double>& support_upper() const { return support_upper_; }

 private:
  std::string name_;
  Pdf pdf_;
  Transform mellin_;
  Draw draw_;
  std::optional<double> s_ref_;
  std::optional<double> support_upper_;
};

/// Known multiplicative error density g. The "dirac" law (U = 1) has no pdf;
/// its transform is identically one and sampling it leaves data unchanged.
class ErrorDensity {
 public:
  using Pdf = std::function<double(double)>;
  using Transform = std::function<complex(double)>;
  using Draw = std::function<double(Rng&)>;

  ErrorDensity(std::string name, std::optional<Pdf> pdf, Transform mellin, Draw draw, int gamma,
               double tau1, std::optional<double> support_upper);

  const std::string& name() const { return name_; }
  bool is_dirac() const { return !pdf_.has_value(); }
  /// Throws std::logic_error for the dirac law.
  double pdf(double x) const;
  /// M[g](1 + i t).
  complex mellin(double t) const { return mellin_(t); }
  double draw(Rng& rng) const { return draw_(rng); }
  Sample sample(Rng& rng, std::size_t n) const;

  /// Polynomial decay index: |M[g](1+it)| ~ |t|^{-gamma}.
  int gamma() const { return gamma_; }
  double tau1() const { return tau1_; }
  const std::optional<double>& support_upper() const { return support_upper_; }

 private:
  std::string name_;
  std::optional<Pdf> pdf_;
  Transform mellin_;
  Draw draw_;
  int gamma_;
  double tau1_;
  std::optional<double> support_upper_;
};

/// gamma5, gamma_mixture, scaled_beta, weibull2, exponential.
TargetDensity make_target(const std::string& name);
const std::vector<std::string>& target_names();

/// Piecewise-constant density: mass weights[b] spread uniformly over
/// [edges[b], edges[b+1]]. edges strictly increasing from >= 0, weights sum to one.
TargetDensity make_histogram(std::vector<double> edges, std::vector<double> weights);

/// dirac, uniform01, uniform_half_threehalf, beta_1_<k> (e.g. beta_1_2).
ErrorDensity make_error(const std::string& name);
/// g(x) = k (1 - x)^{k-1} on (0, 1); beta_1_k(1) is uniform01.
ErrorDensity make_beta_1_k(int k);
/// Names used by the built-in experiments; includes beta_1_2.
const std::vector<std::string>& error_names();

/// M[g](1 + i t) tabulated on `grid`.
MellinValue error_mellin(const ErrorDensity& g, const FrequencyGrid& grid);
/// M[f](1 + i t) tabulated on `grid`.
MellinValue target_mellin(const TargetDensity& f, const FrequencyGrid& grid);

/// |M[g](1+it)| below this on a node is treated as a zero of the transform.
inline constexpr double kMellinFloor = 1e-300;

/// Throws AssumptionViolation if |M[g](1+it)| < kMellinFloor on a node |t| <= k.
void require_nonvanishing(const MellinValue& mg, double k);

/// Delta_g(k) = int_{-k}^{k} |M[g](1+it)|^{-2} dt by trapezoid on `grid`.
double noise_functional(const ErrorDensity& g, double k, const FrequencyGrid& grid);

/// max over integer k in [k_lo, k_hi] of Delta_g(k) / k^{2 gamma + 1}.
double cg_estimate(const ErrorDensity& g, int k_lo, int k_hi,
                   const FrequencyGrid& grid = FrequencyGrid{});

Sample sample_target(const TargetDensity& f, std::size_t n, Rng& rng);
Sample sample_error(const ErrorDensity& g, std::size_t n, Rng& rng);
/// Y_j = X_j U_j: n target draws followed by n error draws from `rng`.
/// With the dirac law the target draws are returned as they are.
Sample sample_noisy(const TargetDensity& f, const ErrorDensity& g, std::size_t n, Rng& rng);

}  // namespace mellin_deconv
