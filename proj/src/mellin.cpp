#include "mellin_deconv/mellin.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "mellin_deconv/errors.hpp"

namespace mellin_deconv {

namespace {

// Phasors advanced by repeated rotation are re-seeded from sin/cos at every
// multiple of this many nodes, which bounds the accumulated rounding drift.
constexpr std::size_t kAnchorInterval = 64;

constexpr double kNodeTolerance = 1e-9;

constexpr double kNegligibleTail = 1e-14;

bool is_anchor(std::size_t j) { return j % kAnchorInterval == 0; }

bool grid_is_uniform(double k_max, double step, std::size_t half) {
  return std::abs(static_cast<double>(half) * step - k_max) <= kNodeTolerance * step;
}

bool last_cell_truncated(const FrequencyGrid& grid) { return !grid.uniform(); }

// S_j = sum_i w_i exp(i t_j u_i) for j = 0..out.size()-1; empty w means
// unit weights.
//
// The phasor of every point is carried across nodes by multiplication with
// exp(i step u_i) and re-anchored at multiples of kAnchorInterval. The sum
// over points uses four interleaved partial sums, combined in fixed order.
// Points are processed in blocks that stay in cache; lane q of node j still
// receives points q, q + 4, q + 8, ... in order, with the n % 4 leftover
// points added to lane 0 last, so the blocking does not change any sum.
void accumulate_phase_sums(std::span<const double> u, std::span<const double> w,
                           const FrequencyGrid& grid, std::span<complex> out) {
  constexpr std::size_t kBlock = 512;
  const std::size_t n = u.size();
  const bool unit = w.empty();
  const std::size_t n4 = n - n % 4;
  const double step = grid.step();
  const bool truncated_tail = last_cell_truncated(grid);
  const std::size_t walked = truncated_tail ? std::min(out.size(), grid.half_size()) : out.size();

  std::vector<std::array<double, 8>> lanes(walked, std::array<double, 8>{});
  std::vector<double> pr(kBlock), pi(kBlock), rr(kBlock), ri(kBlock);
  for (std::size_t lo = 0; lo < n; lo += kBlock) {
    const std::size_t m = std::min(kBlock, n - lo);
    const std::size_t main_end = n4 > lo ? std::min(m, n4 - lo) : 0;
    for (std::size_t i = 0; i < m; ++i) {
      rr[i] = std::cos(step * u[lo + i]);
      ri[i] = std::sin(step * u[lo + i]);
    }
    for (std::size_t j = 0; j < walked; ++j) {
      if (j == 0) {
        // cos(0) = 1 and sin(0) = 0 exactly.
        if (unit) {
          std::fill_n(pr.begin(), m, 1.0);
        } else {
          std::copy_n(w.begin() + static_cast<std::ptrdiff_t>(lo), m, pr.begin());
        }
        std::fill_n(pi.begin(), m, 0.0);
      } else if (is_anchor(j)) {
        const double t = static_cast<double>(j) * step;
        for (std::size_t i = 0; i < m; ++i) {
          const double wi = unit ? 1.0 : w[lo + i];
          pr[i] = wi * std::cos(t * u[lo + i]);
          pi[i] = wi * std::sin(t * u[lo + i]);
        }
      }
      auto& acc = lanes[j];
      double a0 = acc[0], a1 = acc[1], a2 = acc[2], a3 = acc[3];
      double b0 = acc[4], b1 = acc[5], b2 = acc[6], b3 = acc[7];
      std::size_t i = 0;
      for (; i < main_end; i += 4) {
        a0 += pr[i];
        a1 += pr[i + 1];
        a2 += pr[i + 2];
        a3 += pr[i + 3];
        b0 += pi[i];
        b1 += pi[i + 1];
        b2 += pi[i + 2];
        b3 += pi[i + 3];
      }
      for (; i < m; ++i) {
        a0 += pr[i];
        b0 += pi[i];
      }
      acc = {a0, a1, a2, a3, b0, b1, b2, b3};
      if (!is_anchor(j + 1)) {
        for (std::size_t q = 0; q < m; ++q) {
          const double re = pr[q] * rr[q] - pi[q] * ri[q];
          const double im = pr[q] * ri[q] + pi[q] * rr[q];
          pr[q] = re;
          pi[q] = im;
        }
      }
    }
  }
  for (std::size_t j = 0; j < walked; ++j) {
    const auto& a = lanes[j];
    out[j] = {(a[0] + a[1]) + (a[2] + a[3]), (a[4] + a[5]) + (a[6] + a[7])};
  }
  if (walked < out.size()) {
    const double t = grid.positive_node(walked);
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = unit ? 1.0 : w[i];
      re += wi * std::cos(t * u[i]);
      im += wi * std::sin(t * u[i]);
    }
    out[walked] = {re, im};
  }
}

MellinValue mirror(double alpha, const FrequencyGrid& grid, std::span<const complex> half) {
  MellinValue mv{alpha, grid, std::vector<complex>(grid.size())};
  const std::size_t m = grid.half_size();
  for (std::size_t j = 0; j <= m; ++j) {
    mv.values[m + j] = half[j];
    mv.values[m - j] = std::conj(half[j]);
  }
  return mv;
}

// Walks G_j = x^{-alpha - i t_j} mv(t_j) over j = 0..last, calling
// on_node(j, I_j) with I_j the quadrature of G over [0, t_j].
//
// I_j is the running trapezoid sum plus Gregory's end correction at t_j,
// h (-G_j / 8 + G_{j-1} / 6 - G_{j-2} / 24), which turns the end weights
// 1/2, 1, 1 into 3/8, 7/6, 23/24 and the O(h^2) error into O(h^4). The end at
// t = 0 needs no correction: it is interior to [-k, k]. One- and two-node
// ranges and a shortened last cell keep the plain trapezoid.
template <typename OnNode>
void walk_inverse(const MellinValue& mv, std::size_t last, double x, OnNode&& on_node) {
  const FrequencyGrid& grid = mv.grid;
  const double lx = std::log(x);
  const double scale = std::exp(-mv.alpha * lx);
  const double step = grid.step();
  const complex rot = std::polar(1.0, -step * lx);
  const bool truncated_tail = last_cell_truncated(grid);
  complex phasor{1.0, 0.0};
  complex g1{};
  complex g2{};
  complex sum{0.0, 0.0};
  for (std::size_t j = 0; j <= last; ++j) {
    complex ph;
    const bool short_cell = truncated_tail && j == grid.half_size();
    if (short_cell) {
      ph = std::polar(1.0, -grid.positive_node(j) * lx);
    } else {
      if (is_anchor(j)) phasor = std::polar(1.0, -(static_cast<double>(j) * step) * lx);
      ph = phasor;
      phasor *= rot;
    }
    const complex g = scale * (ph * mv.at_positive(j));
    if (j > 0) {
      sum += (g1 + g) * (0.5 * grid.cell_width(j - 1));
    }
    if (j >= 2 && !short_cell) {
      const complex end = (g1 / 6.0 - g / 8.0) - g2 / 24.0;
      on_node(j, sum + end * step);
    } else {
      on_node(j, sum);
    }
    g2 = g1;
    g1 = g;
  }
}

void require_positive_x(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument("invert_cutoff: x must be positive and finite");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// FrequencyGrid

FrequencyGrid::FrequencyGrid(double k_max, double step) : k_max_(k_max), step_(step), half_(0) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw std::invalid_argument("FrequencyGrid: step must be positive");
  }
  if (!(k_max > 0.0) || !std::isfinite(k_max)) {
    throw std::invalid_argument("FrequencyGrid: k_max must be positive");
  }
  const double ratio = k_max / step;
  const double rounded = std::round(ratio);
  if (rounded >= 1.0 && grid_is_uniform(k_max, step, static_cast<std::size_t>(rounded))) {
    half_ = static_cast<std::size_t>(rounded);
    k_max_ = static_cast<double>(half_) * step;
  } else {
    half_ = static_cast<std::size_t>(std::ceil(ratio));
  }
  if (half_ > (std::size_t{1} << 26)) {
    throw std::invalid_argument("FrequencyGrid: too many nodes");
  }
}

double FrequencyGrid::positive_node(std::size_t j) const {
  if (j > half_) throw std::out_of_range("FrequencyGrid: node index out of range");
  if (j == half_) return k_max_;
  return static_cast<double>(j) * step_;
}

std::vector<double> FrequencyGrid::nodes() const {
  std::vector<double> out(size());
  for (std::size_t j = 0; j <= half_; ++j) {
    out[half_ + j] = positive_node(j);
    out[half_ - j] = -positive_node(j);
  }
  out[half_] = 0.0;
  return out;
}

bool FrequencyGrid::is_node(double t) const {
  if (!(t >= 0.0) || t > k_max_ + kNodeTolerance * step_) return false;
  const double j = std::round(t / step_);
  if (j <= static_cast<double>(half_) &&
      std::abs(positive_node(static_cast<std::size_t>(j)) - t) <= kNodeTolerance * step_) {
    return true;
  }
  return std::abs(k_max_ - t) <= kNodeTolerance * step_;
}

std::size_t FrequencyGrid::index_of(double t) const {
  if (!is_node(t)) {
    std::ostringstream msg;
    msg << "FrequencyGrid: " << t << " is not a node (step " << step_ << ", k_max " << k_max_
        << ")";
    throw std::invalid_argument(msg.str());
  }
  if (std::abs(k_max_ - t) <= kNodeTolerance * step_) return half_;
  return static_cast<std::size_t>(std::round(t / step_));
}

double FrequencyGrid::nearest_node(double t) const {
  const double clamped = std::clamp(t, 0.0, k_max_);
  const double j = std::round(clamped / step_);
  if (j >= static_cast<double>(half_)) return k_max_;
  const double below = positive_node(static_cast<std::size_t>(j));
  if (std::abs(k_max_ - clamped) < std::abs(below - clamped)) return k_max_;
  return below;
}

double FrequencyGrid::cell_width(std::size_t j) const {
  if (j + 1 == half_ && !uniform()) return k_max_ - static_cast<double>(j) * step_;
  return step_;
}

bool FrequencyGrid::uniform() const { return grid_is_uniform(k_max_, step_, half_); }

FrequencyGrid FrequencyGrid::truncated(double k) const {
  const std::size_t j = index_of(k);
  if (j == 0) throw std::invalid_argument("FrequencyGrid: cannot truncate at t = 0");
  if (j == half_) return *this;
  FrequencyGrid out = *this;
  out.half_ = j;
  out.k_max_ = positive_node(j);
  return out;
}

// ---------------------------------------------------------------------------
// Sample

Sample::Sample(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty()) throw InvalidSample("sample is empty");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double p = points_[i];
    if (!(p > 0.0) || !std::isfinite(p)) {
      std::ostringstream msg;
      msg << "sample point " << i << " is not a positive finite real: " << p;
      throw InvalidSample(msg.str());
    }
  }
}

// ---------------------------------------------------------------------------
// Transforms

MellinValue empirical_mellin(const Sample& sample, double alpha, const FrequencyGrid& grid) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("empirical_mellin: alpha must be nonnegative");
  }
  const auto points = sample.points();
  const std::size_t n = points.size();
  std::vector<double> u(n);
  std::vector<double> w;
  for (std::size_t i = 0; i < n; ++i) u[i] = std::log(points[i]);
  if (alpha != 1.0) {
    w.resize(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::exp((alpha - 1.0) * u[i]);
  }
  std::vector<complex> half(grid.half_size() + 1);
  accumulate_phase_sums(u, w, grid, half);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& v : half) v *= inv_n;
  return mirror(alpha, grid, half);
}

MellinValue tabulate_mellin(const std::function<complex(double)>& transform, double alpha,
                            const FrequencyGrid& grid) {
  std::vector<complex> half(grid.half_size() + 1);
  for (std::size_t j = 0; j < half.size(); ++j) half[j] = transform(grid.positive_node(j));
  half[0] = {half[0].real(), 0.0};
  return mirror(alpha, grid, half);
}

void require_conjugate_symmetry(const MellinValue& mv, double k, double tol) {
  const std::size_t last = mv.grid.index_of(k);
  if (mv.values.size() != mv.grid.size()) {
    throw std::invalid_argument("MellinValue: value count does not match grid");
  }
  double scale = 0.0;
  double worst = 0.0;
  for (std::size_t j = 0; j <= last; ++j) {
    scale = std::max(scale, std::abs(mv.at_positive(j)));
    worst = std::max(worst, std::abs(mv.at_negative(j) - std::conj(mv.at_positive(j))));
  }
  if (worst > tol * (scale + 1.0)) {
    std::ostringstream msg;
    msg << "Mellin values are not conjugate symmetric (deviation " << worst
        << "); the inverse would not be real";
    throw std::domain_error(msg.str());
  }
}

double invert_cutoff(const MellinValue& mv, double k, double x) {
  const double xs[] = {x};
  return invert_cutoff(mv, k, xs).front();
}

std::vector<double> invert_cutoff(const MellinValue& mv, double k, std::span<const double> xs) {
  const double ks[] = {k};
  return std::move(invert_cutoff_path(mv, ks, xs).front());
}

std::vector<std::vector<double>> invert_cutoff_path(const MellinValue& mv,
                                                    std::span<const double> ks,
                                                    std::span<const double> xs) {
  if (ks.empty()) return {};
  std::vector<std::size_t> stops(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!(ks[i] > 0.0)) throw std::invalid_argument("invert_cutoff: k must be positive");
    stops[i] = mv.grid.index_of(ks[i]);
    if (i > 0 && stops[i] < stops[i - 1]) {
      throw std::invalid_argument("invert_cutoff_path: cut-offs must be nondecreasing");
    }
  }
  require_conjugate_symmetry(mv, ks.back());
  for (double x : xs) require_positive_x(x);

  std::vector<std::vector<double>> out(ks.size(), std::vector<double>(xs.size()));
  for (std::size_t ix = 0; ix < xs.size(); ++ix) {
    std::size_t next = 0;
    walk_inverse(mv, stops.back(), xs[ix], [&](std::size_t j, const complex& sum) {
      while (next < stops.size() && stops[next] == j) {
        out[next][ix] = sum.real() / std::numbers::pi;
        ++next;
      }
    });
  }
  return out;
}

double parseval_norm(const MellinValue& mv, double k) {
  const double ks[] = {k};
  return parseval_path(mv, ks).front();
}

std::vector<double> parseval_path(const MellinValue& mv, std::span<const double> ks) {
  std::vector<double> out(ks.size());
  if (ks.empty()) return out;
  std::size_t next = 0;
  double sum = 0.0;
  double previous = std::norm(mv.at_positive(0));
  auto emit = [&](std::size_t j) {
    while (next < ks.size() && mv.grid.index_of(ks[next]) == j) {
      out[next++] = sum / std::numbers::pi;
    }
  };
  emit(0);
  const std::size_t last = mv.grid.index_of(ks.back());
  for (std::size_t j = 1; j <= last; ++j) {
    const double current = std::norm(mv.at_positive(j));
    sum += (previous + current) * (0.5 * mv.grid.cell_width(j - 1));
    previous = current;
    emit(j);
  }
  if (next != ks.size()) {
    throw std::invalid_argument("parseval_path: cut-offs must be nondecreasing grid nodes");
  }
  return out;
}

double sobolev_seminorm(const MellinValue& mv, double s) {
  if (!(s >= 0.0)) throw std::invalid_argument("sobolev_seminorm: s must be nonnegative");
  const FrequencyGrid& grid = mv.grid;
  auto weighted = [&](std::size_t j) {
    const double t = grid.positive_node(j);
    return std::norm(mv.at_positive(j)) * std::pow(1.0 + t * t, s);
  };
  double sum = 0.0;
  double previous = weighted(0);
  for (std::size_t j = 1; j <= grid.half_size(); ++j) {
    const double current = weighted(j);
    sum += (previous + current) * (0.5 * grid.cell_width(j - 1));
    previous = current;
  }
  return 2.0 * sum;
}

TailReport bias_tail_report(const MellinValue& mv_f, double k, double dominance_fraction) {
  const FrequencyGrid& grid = mv_f.grid;
  const std::size_t first = grid.index_of(k);
  const std::size_t last = grid.half_size();
  TailReport report;
  double sum = 0.0;
  for (std::size_t j = first; j < last; ++j) {
    sum += (std::norm(mv_f.at_positive(j)) + std::norm(mv_f.at_positive(j + 1))) *
           (0.5 * grid.cell_width(j));
  }
  report.value = sum / std::numbers::pi;

  // Local power law |M|^2 ~ A t^{-p} fitted between k_max/2 and k_max.
  const double t_b = grid.k_max();
  const double t_a = grid.nearest_node(0.5 * t_b);
  const double m_b = std::norm(mv_f.at_positive(last));
  const double m_a = std::norm(mv_f.at_positive(grid.index_of(t_a)));
  if (m_b > 0.0 && m_a > 0.0 && t_a > 0.0 && t_a < t_b) {
    const double p = std::log(m_a / m_b) / std::log(t_b / t_a);
    report.beyond_grid = p > 1.0 ? m_b * t_b / ((p - 1.0) * std::numbers::pi)
                                 : std::numeric_limits<double>::infinity();
  }
  // Tails below kNegligibleTail are never reported, so k = k_max stays quiet.
  report.truncation_dominant =
      report.beyond_grid > std::max(dominance_fraction * report.value, kNegligibleTail);
  return report;
}

double bias_tail(const MellinValue& mv_f, double k, double dominance_fraction) {
  const TailReport report = bias_tail_report(mv_f, k, dominance_fraction);
  if (report.truncation_dominant) {
    std::clog << "warning: bias_tail at k=" << k << " ignores an estimated tail of "
              << report.beyond_grid << " beyond k_max=" << mv_f.grid.k_max()
              << " (computed part " << report.value << ")\n";
  }
  return report.value;
}

}  // namespace mellin_deconv
