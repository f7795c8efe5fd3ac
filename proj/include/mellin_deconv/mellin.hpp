#pragma once

/**
 * Empirical and analytic Mellin transforms on the critical line Re = alpha,
 * evaluated on a symmetric uniform frequency grid, together with the
 * spectral cut-off inversion and the Parseval-type functionals.
 *
 * Conventions:
 *   M[h](alpha + i t) = int_0^inf x^{alpha - 1 + i t} h(x) dx
 *   inverse at cut-off k: (2 pi)^{-1} int_{-k}^{k} x^{-alpha - i t} M(t) dt
 *
 * Integrals over t use the composite trapezoid rule on the grid; the
 * inversion adds Gregory's end correction at +-k. Sums are formed cell by
 * cell, [t_j, t_{j+1}] in increasing j, so the integral up to any node k is
 * a prefix of the integral up to a larger node and the two agree bit for bit.
 */

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mellin_deconv {

using complex = std::complex<double>;

/// Symmetric grid t_{-m} < ... < t_0 = 0 < ... < t_m = k_max with spacing
/// `step`. If k_max is not a multiple of step the outermost cells are
/// shortened to end exactly at +-k_max.
class FrequencyGrid {
 public:
  static constexpr double kDefaultKMax = 200.0;
  static constexpr double kDefaultStep = 0.01;

  FrequencyGrid() : FrequencyGrid(kDefaultKMax, kDefaultStep) {}
  FrequencyGrid(double k_max, double step);

  double k_max() const { return k_max_; }
  double step() const { return step_; }

  /// Number of strictly positive nodes, m.
  std::size_t half_size() const { return half_; }
  /// Total node count, 2m + 1.
  std::size_t size() const { return 2 * half_ + 1; }

  /// j-th nonnegative node, j in [0, m].
  double positive_node(std::size_t j) const;
  /// All nodes in increasing order.
  std::vector<double> nodes() const;

  bool is_node(double t) const;
  /// Index j with positive_node(j) == t; throws std::invalid_argument if t
  /// is not a nonnegative node.
  std::size_t index_of(double t) const;
  /// Node closest to t (t clamped to [0, k_max]).
  double nearest_node(double t) const;

  /// Width of the cell [t_j, t_{j+1}], j < m. Exactly step() except for a
  /// shortened outermost cell.
  double cell_width(std::size_t j) const;
  /// k_max is a whole number of steps.
  bool uniform() const;

  /// Same nodes up to the node k (inclusive).
  FrequencyGrid truncated(double k) const;

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  double k_max_;
  double step_;
  std::size_t half_;
};

/// Transform values on every node of `grid`, stored in increasing t.
struct MellinValue {
  double alpha = 1.0;
  FrequencyGrid grid;
  std::vector<complex> values;

  /// Value at the j-th nonnegative node.
  const complex& at_positive(std::size_t j) const { return values[grid.half_size() + j]; }
  /// Value at node -t_j.
  const complex& at_negative(std::size_t j) const { return values[grid.half_size() - j]; }
};

/// Observations X_1..X_n, all strictly positive and finite, n >= 1.
class Sample {
 public:
  /// Throws InvalidSample on an empty input or a nonpositive/non-finite point.
  explicit Sample(std::vector<double> points);

  std::span<const double> points() const { return points_; }
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<double> points_;
};

/// M_hat_alpha(t) = n^{-1} sum_j X_j^{alpha - 1 + i t} on every node.
/// Computed on t >= 0 and mirrored, so conjugate symmetry is exact.
MellinValue empirical_mellin(const Sample& sample, double alpha, const FrequencyGrid& grid);

/// Tabulates t -> transform(t) for t >= 0 and mirrors by conjugation.
MellinValue tabulate_mellin(const std::function<complex(double)>& transform, double alpha,
                            const FrequencyGrid& grid);

/// Throws std::domain_error when |value(-t) - conj(value(t))| exceeds
/// tol * (max |value| + 1) for some |t| <= k.
void require_conjugate_symmetry(const MellinValue& mv, double k, double tol = 1e-10);

/// Spectral cut-off inverse at x: (2 pi)^{-1} int_{-k}^{k} x^{-alpha-it} mv(t) dt.
/// k must be a grid node. The symmetric integral equals twice the real part
/// of the half-line integral, so the result is real by construction.
/// Quadrature: trapezoid with end weights 3/8, 7/6, 23/24 at +-k.
double invert_cutoff(const MellinValue& mv, double k, double x);
std::vector<double> invert_cutoff(const MellinValue& mv, double k, std::span<const double> xs);

/// Inverse at several cut-offs at once: result[i][j] is the inverse at
/// ks[i], xs[j]. Each row equals invert_cutoff(mv, ks[i], xs) exactly.
/// ks must be nondecreasing grid nodes.
std::vector<std::vector<double>> invert_cutoff_path(const MellinValue& mv,
                                                    std::span<const double> ks,
                                                    std::span<const double> xs);

/// ||h_k||^2_{omega_alpha} = (2 pi)^{-1} int_{-k}^{k} |mv(t)|^2 dt.
double parseval_norm(const MellinValue& mv, double k);
/// parseval_norm at every ks[i] (nondecreasing nodes), one pass over the grid.
std::vector<double> parseval_path(const MellinValue& mv, std::span<const double> ks);

/// int_{-k_max}^{k_max} |mv(t)|^2 (1 + t^2)^s dt.
double sobolev_seminorm(const MellinValue& mv, double s);

struct TailReport {
  /// pi^{-1} int_k^{k_max} |mv(t)|^2 dt.
  double value = 0.0;
  /// Power-law extrapolation of pi^{-1} int_{k_max}^inf |mv(t)|^2 dt.
  double beyond_grid = 0.0;
  /// beyond_grid exceeds dominance_fraction * value.
  bool truncation_dominant = false;
};

/// Squared weighted bias ||f - f_k||^2 = pi^{-1} int_k^inf |M[f](1+it)|^2 dt,
/// truncated at the grid edge, with an estimate of what was cut off.
TailReport bias_tail_report(const MellinValue& mv_f, double k, double dominance_fraction = 0.01);

/// bias_tail_report(...).value; writes a warning to std::clog when the
/// truncated tail dominates.
double bias_tail(const MellinValue& mv_f, double k, double dominance_fraction = 0.01);

}  // namespace mellin_deconv
