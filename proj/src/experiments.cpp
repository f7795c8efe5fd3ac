#include "mellin_deconv/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mellin_deconv/parallel.hpp"
#include "mellin_deconv/random.hpp"

namespace mellin_deconv {

void MCConfig::validate() const {
  if (n == 0) throw std::invalid_argument("MCConfig: n must be positive");
  if (reps == 0) throw std::invalid_argument("MCConfig: reps must be positive");
  if (K_cap < 1) throw std::invalid_argument("MCConfig: K_cap must be positive");
  switch (mode.kind) {
    case MCMode::Kind::adaptive:
      if (!(mode.chi > 0.0) || !std::isfinite(mode.chi)) {
        throw std::invalid_argument("MCConfig: adaptive mode needs chi > 0");
      }
      break;
    case MCMode::Kind::fixed:
      if (!(mode.k > 0.0) || !std::isfinite(mode.k)) {
        throw std::invalid_argument("MCConfig: fixed mode needs k > 0");
      }
      break;
    case MCMode::Kind::oracle:
      break;
  }
}

namespace {

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

int checked_bound(std::size_t n, int gamma, int K_cap, const FrequencyGrid& grid) {
  const int K_n = cutoff_bound(n, gamma, K_cap);
  if (static_cast<double>(K_n) > grid.k_max()) {
    std::ostringstream msg;
    msg << "K_n = " << K_n << " exceeds the grid bound " << grid.k_max();
    throw std::invalid_argument(msg.str());
  }
  return K_n;
}

struct Replication {
  double k = 0.0;
  double ise = 0.0;
  std::vector<double> curve;
};

// Weighted ISE of every k in ks for each replication: risk[r][i].
std::vector<std::vector<double>> risk_paths(const TargetDensity& f, const ErrorDensity& g,
                                            std::size_t n, std::size_t reps, std::uint64_t seed,
                                            std::span<const double> ks,
                                            std::span<const double> truth,
                                            const EstimatorConfig& cfg, unsigned threads) {
  std::vector<std::vector<double>> risk(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    Rng rng = make_stream(seed, r);
    const Sample sample = sample_noisy(f, g, n, rng);
    const MellinValue mv = deconvolved_mellin(sample, g, ks.back(), cfg);
    const auto curves = invert_cutoff_path(mv, ks, cfg.x_grid);
    std::vector<double> row(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
      row[i] = weighted_ise(cfg.x_grid, curves[i], truth, cfg.alpha);
    }
    risk[r] = std::move(row);
  });
  return risk;
}

std::size_t argmin_mean(const std::vector<std::vector<double>>& risk, std::vector<double>& means) {
  means.assign(risk.front().size(), 0.0);
  for (const auto& row : risk) {
    for (std::size_t i = 0; i < row.size(); ++i) means[i] += row[i];
  }
  for (auto& m : means) m /= static_cast<double>(risk.size());
  return static_cast<std::size_t>(std::min_element(means.begin(), means.end()) - means.begin());
}

}  // namespace

RiskReport monte_carlo(const MCConfig& mc, const EstimatorConfig& cfg, unsigned threads) {
  mc.validate();
  cfg.validate();
  const TargetDensity f = make_target(mc.target);
  const ErrorDensity g = make_error(mc.error);
  if (!g.is_dirac() && cfg.alpha != 1.0) {
    throw std::invalid_argument("monte_carlo: noisy designs require alpha = 1");
  }

  RiskReport report;
  report.x = cfg.x_grid;
  report.truth = tabulate_pdf(f, cfg.x_grid);

  std::vector<Replication> reps(mc.reps);
  auto finish_curve = [&](std::vector<double> values) {
    if (cfg.truncation_negative) {
      for (auto& v : values) v = std::max(v, 0.0);
    }
    return values;
  };
  auto run_fixed = [&](double k) {
    parallel_for(mc.reps, threads, [&](std::size_t r) {
      Rng rng = make_stream(mc.master_seed, r);
      const Sample sample = sample_noisy(f, g, mc.n, rng);
      const MellinValue mv = deconvolved_mellin(sample, g, k, cfg);
      std::vector<double> values = invert_cutoff(mv, k, cfg.x_grid);
      reps[r].k = k;
      reps[r].ise = weighted_ise(cfg.x_grid, values, report.truth, cfg.alpha);
      reps[r].curve = finish_curve(std::move(values));
    });
  };

  switch (mc.mode.kind) {
    case MCMode::Kind::fixed:
      report.K_n = cutoff_bound(mc.n, g.gamma(), mc.K_cap);
      if (mc.mode.k > cfg.grid.k_max()) {
        throw std::invalid_argument("monte_carlo: k exceeds the grid bound");
      }
      run_fixed(mc.mode.k);
      break;
    case MCMode::Kind::adaptive: {
      if (cfg.alpha != 1.0) throw std::invalid_argument("monte_carlo: adaptive needs alpha = 1");
      report.K_n = checked_bound(mc.n, g.gamma(), mc.K_cap, cfg.grid);
      const std::vector<double> ks = integer_cutoffs(report.K_n);
      parallel_for(mc.reps, threads, [&](std::size_t r) {
        Rng rng = make_stream(mc.master_seed, r);
        const Sample sample = sample_noisy(f, g, mc.n, rng);
        const MellinValue mv = deconvolved_mellin(sample, g, ks.back(), cfg);
        const std::vector<double> norms = parseval_path(mv, ks);
        const SelectionResult sel = select_from_norms(norms, mc.mode.chi, g.gamma(), mc.n);
        const double k = static_cast<double>(sel.k_hat);
        std::vector<double> values = invert_cutoff(mv, k, cfg.x_grid);
        reps[r].k = k;
        reps[r].ise = weighted_ise(cfg.x_grid, values, report.truth, cfg.alpha);
        reps[r].curve = finish_curve(std::move(values));
      });
      break;
    }
    case MCMode::Kind::oracle: {
      report.K_n = checked_bound(mc.n, g.gamma(), mc.K_cap, cfg.grid);
      const std::vector<double> ks = integer_cutoffs(report.K_n);
      const auto risk =
          risk_paths(f, g, mc.n, mc.reps, mc.master_seed, ks, report.truth, cfg, threads);
      std::vector<double> means;
      const std::size_t best = argmin_mean(risk, means);
      run_fixed(ks[best]);
      break;
    }
  }

  std::map<double, std::size_t> counts;
  report.ise.reserve(mc.reps);
  report.k_used.reserve(mc.reps);
  for (const auto& rep : reps) {
    report.ise.push_back(rep.ise);
    report.k_used.push_back(rep.k);
    ++counts[rep.k];
  }
  report.k_histogram.assign(counts.begin(), counts.end());
  report.mean = mean_of(report.ise);
  report.median = median_of(report.ise);

  report.median_curve.resize(cfg.x_grid.size());
  std::vector<double> column(mc.reps);
  for (std::size_t i = 0; i < cfg.x_grid.size(); ++i) {
    for (std::size_t r = 0; r < mc.reps; ++r) column[r] = reps[r].curve[i];
    report.median_curve[i] = median_of(column);
  }
  return report;
}

OracleRisk oracle_risk(const std::string& target, const std::string& error, std::size_t n,
                       std::size_t reps, std::uint64_t seed, const EstimatorConfig& cfg,
                       unsigned threads, int K_cap) {
  if (n == 0 || reps == 0) throw std::invalid_argument("oracle_risk: n and reps must be positive");
  cfg.validate();
  const TargetDensity f = make_target(target);
  const ErrorDensity g = make_error(error);
  const int K_n = checked_bound(n, g.gamma(), K_cap, cfg.grid);
  const std::vector<double> ks = integer_cutoffs(K_n);
  const std::vector<double> truth = tabulate_pdf(f, cfg.x_grid);
  const auto risk = risk_paths(f, g, n, reps, seed, ks, truth, cfg, threads);
  OracleRisk out;
  const std::size_t best = argmin_mean(risk, out.risk_by_k);
  out.k_star = static_cast<int>(best) + 1;
  out.risk = out.risk_by_k[best];
  return out;
}

double loglog_slope(std::span<const double> n, std::span<const double> values) {
  if (n.size() != values.size() || n.size() < 2) {
    throw std::invalid_argument("loglog_slope: need two or more matching points");
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0) || !(values[i] > 0.0)) {
      throw std::invalid_argument("loglog_slope: values must be positive");
    }
    mx += std::log(n[i]);
    my += std::log(values[i]);
  }
  mx /= static_cast<double>(n.size());
  my /= static_cast<double>(n.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double dx = std::log(n[i]) - mx;
    sxy += dx * (std::log(values[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::invalid_argument("loglog_slope: sample sizes must differ");
  return sxy / sxx;
}

double rate_cutoff(std::size_t n, double s, int gamma, const FrequencyGrid& grid) {
  const double k = std::pow(static_cast<double>(n), 1.0 / (2.0 * s + 2.0 * gamma + 1.0));
  return std::max(grid.nearest_node(k), grid.positive_node(1));
}

RateStudy rate_study(const std::string& target, const std::string& error, double s,
                     std::span<const std::size_t> n_list, std::size_t reps, std::uint64_t seed,
                     const EstimatorConfig& cfg, unsigned threads) {
  if (!(s > 0.0)) throw std::invalid_argument("rate_study: s must be positive");
  if (n_list.size() < 4) throw std::invalid_argument("rate_study: need at least four sample sizes");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) {
      throw std::invalid_argument("rate_study: sample sizes must be strictly increasing");
    }
  }
  const TargetDensity f = make_target(target);
  const ErrorDensity g = make_error(error);

  RateStudy study;
  study.n_list.assign(n_list.begin(), n_list.end());
  study.theoretical_exponent = -2.0 * s / (2.0 * s + 2.0 * g.gamma() + 1.0);
  study.super_smooth_warning = f.super_smooth();
  if (study.super_smooth_warning) {
    std::clog << "warning: target " << target
              << " is super-smooth; the polynomial rate does not describe its risk\n";
  }

  std::vector<double> ns;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const double k = rate_cutoff(n_list[i], s, g.gamma(), cfg.grid);
    MCConfig mc;
    mc.target = target;
    mc.error = error;
    mc.n = n_list[i];
    mc.reps = reps;
    mc.master_seed = derive_seed(seed, i);
    mc.mode = MCMode::fixed(k);
    const RiskReport report = monte_carlo(mc, cfg, threads);
    study.k_used.push_back(k);
    study.mean_ise.push_back(report.mean);
    ns.push_back(static_cast<double>(n_list[i]));
  }
  study.slope = loglog_slope(ns, study.mean_ise);
  return study;
}

}  // namespace mellin_deconv
