#include "mellin_deconv/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mellin_deconv {

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    throw std::invalid_argument("log_spaced: need 0 < lo < hi and at least two points");
  }
  std::vector<double> out(count);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

void EstimatorConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("EstimatorConfig: alpha must be nonnegative");
  }
  if (x_grid.empty()) throw std::invalid_argument("EstimatorConfig: empty x-grid");
  double max_log = 0.0;
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    if (!(x_grid[i] > 0.0) || !std::isfinite(x_grid[i])) {
      throw std::invalid_argument("EstimatorConfig: x-grid points must be positive");
    }
    if (i > 0 && !(x_grid[i] > x_grid[i - 1])) {
      throw std::invalid_argument("EstimatorConfig: x-grid must be strictly increasing");
    }
    max_log = std::max(max_log, std::abs(std::log(x_grid[i])));
  }
  if (max_log > 0.0) {
    const double limit = 2.0 * std::numbers::pi / max_log / kNodesPerPeriod;
    if (grid.step() > limit) {
      std::ostringstream msg;
      msg << "EstimatorConfig: t-step " << grid.step() << " exceeds " << limit
          << " needed to resolve x^{-it} on the x-grid";
      throw std::invalid_argument(msg.str());
    }
  }
}

EstimatorConfig make_estimator_config(double alpha, const FrequencyGrid& grid,
                                      std::vector<double> x_grid, bool truncation_negative) {
  EstimatorConfig cfg;
  cfg.alpha = alpha;
  cfg.grid = grid;
  cfg.x_grid = std::move(x_grid);
  cfg.truncation_negative = truncation_negative;
  cfg.validate();
  return cfg;
}

std::vector<double> CutoffEstimate::clipped_values() const {
  std::vector<double> out(values);
  for (auto& v : out) v = std::max(v, 0.0);
  return out;
}

MellinValue deconvolved_mellin(const Sample& sample, const ErrorDensity& g, double k,
                               const EstimatorConfig& cfg) {
  if (!g.is_dirac() && cfg.alpha != 1.0) {
    throw std::invalid_argument("noisy estimation is defined on alpha = 1 only");
  }
  const FrequencyGrid sub = cfg.grid.truncated(k);
  MellinValue mv = empirical_mellin(sample, cfg.alpha, sub);
  if (g.is_dirac()) return mv;
  const MellinValue mg = error_mellin(g, sub);
  require_nonvanishing(mg, sub.k_max());
  for (std::size_t i = 0; i < mv.values.size(); ++i) mv.values[i] /= mg.values[i];
  return mv;
}

namespace {

CutoffEstimate finish(const MellinValue& mv, double k, const Sample& sample,
                      const EstimatorConfig& cfg, std::string error_name) {
  CutoffEstimate est;
  est.k = k;
  est.x = cfg.x_grid;
  est.values = invert_cutoff(mv, k, cfg.x_grid);
  est.omega_norm_sq = parseval_norm(mv, k);
  est.n = sample.size();
  est.error_name = std::move(error_name);
  return est;
}

}  // namespace

CutoffEstimate estimate_direct(const Sample& sample, double k, const EstimatorConfig& cfg) {
  cfg.validate();
  const MellinValue mv = empirical_mellin(sample, cfg.alpha, cfg.grid.truncated(k));
  return finish(mv, k, sample, cfg, "dirac");
}

CutoffEstimate estimate_noisy(const Sample& sample, const ErrorDensity& g, double k,
                              const EstimatorConfig& cfg) {
  if (cfg.alpha != 1.0) {
    throw std::invalid_argument("estimate_noisy: the noisy estimator requires alpha = 1");
  }
  cfg.validate();
  return finish(deconvolved_mellin(sample, g, k, cfg), k, sample, cfg, g.name());
}

double weighted_ise(std::span<const double> x, std::span<const double> values,
                    std::span<const double> truth, double alpha) {
  if (x.size() != values.size() || x.size() != truth.size()) {
    throw std::invalid_argument("weighted_ise: size mismatch");
  }
  const double power = 2.0 * alpha - 1.0;
  auto integrand = [&](std::size_t i) {
    const double d = truth[i] - values[i];
    return d * d * (power == 1.0 ? x[i] : std::pow(x[i], power));
  };
  double sum = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    sum += 0.5 * (integrand(i - 1) + integrand(i)) * (x[i] - x[i - 1]);
  }
  return sum;
}

double weighted_ise(const CutoffEstimate& est, const TargetDensity& truth, double alpha) {
  const std::vector<double> pdf = tabulate_pdf(truth, est.x);
  return weighted_ise(est.x, est.values, pdf, alpha);
}

std::vector<double> tabulate_pdf(const TargetDensity& truth, std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = truth.pdf(x[i]);
  return out;
}

double variance_bound(std::size_t n, double k, const ErrorDensity& g, const FrequencyGrid& grid) {
  if (n == 0) throw std::invalid_argument("variance_bound: n must be positive");
  return noise_functional(g, k, grid) / (2.0 * std::numbers::pi * static_cast<double>(n));
}

double direct_variance_bound(const Sample& sample, double k, double alpha) {
  double sigma2 = 0.0;
  for (double x : sample.points()) sigma2 += std::pow(x, 2.0 * (alpha - 1.0));
  sigma2 /= static_cast<double>(sample.size());
  return sigma2 * k / (std::numbers::pi * static_cast<double>(sample.size()));
}

}  // namespace mellin_deconv
