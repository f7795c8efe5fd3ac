#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mellin_deconv/estimator.hpp"
#include "mellin_deconv/models.hpp"
#include "oracles.hpp"

using namespace mellin_deconv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Sample draw(const std::string& target, const std::string& error, std::size_t n,
            std::uint64_t seed, std::uint64_t index = 0) {
  Rng rng = make_stream(seed, index);
  return sample_noisy(make_target(target), make_error(error), n, rng);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

TEST_CASE("log-spaced grids") {
  const auto xs = log_spaced(0.01, 10.0, 400);
  CHECK(xs.size() == 400);
  CHECK(xs.front() == 0.01);
  CHECK(xs.back() == 10.0);
  for (std::size_t i = 1; i < xs.size(); ++i) REQUIRE(xs[i] > xs[i - 1]);
  CHECK_THAT(xs[200] / xs[199], WithinRel(std::pow(1000.0, 1.0 / 399.0), 1e-12));
  CHECK_THROWS(log_spaced(0.0, 1.0, 10));
  CHECK_THROWS(log_spaced(2.0, 1.0, 10));
}

TEST_CASE("configuration checks") {
  EstimatorConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  // ln(1e4) = 9.2: a step of 0.05 cannot resolve x^{-it} out there.
  CHECK_THROWS_AS(make_estimator_config(1.0, FrequencyGrid(10.0, 0.05), {1e-4, 1.0, 1e4}),
                  std::invalid_argument);
  CHECK_NOTHROW(make_estimator_config(1.0, FrequencyGrid(10.0, 0.01), {1e-4, 1.0, 1e4}));
  CHECK_THROWS_AS(make_estimator_config(1.0, FrequencyGrid{}, {1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(make_estimator_config(1.0, FrequencyGrid{}, {-1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(make_estimator_config(-1.0, FrequencyGrid{}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("direct estimator examples") {
  const EstimatorConfig cfg = make_estimator_config(1.0, FrequencyGrid{}, {0.5, 1.0, 2.0});
  const Sample ones(std::vector<double>(10, 1.0));
  const CutoffEstimate est = estimate_direct(ones, 2.0, cfg);
  CHECK_THAT(est.values[1], WithinRel(2.0 / std::numbers::pi, 1e-14));
  CHECK(est.k == 2.0);
  CHECK(est.n == 10);
  CHECK(est.error_name == "dirac");
  CHECK_THAT(est.omega_norm_sq, WithinRel(2.0 / std::numbers::pi, 1e-14));

  // The smallest cut-off is a single trapezoid cell.
  const Sample s = draw("gamma5", "dirac", 200, 1);
  for (double alpha : {1.0, 0.5}) {
    EstimatorConfig c = cfg;
    c.alpha = alpha;
    const CutoffEstimate tiny = estimate_direct(s, 0.01, c);
    const MellinValue mv = empirical_mellin(s, alpha, FrequencyGrid(0.01, 0.01));
    for (std::size_t i = 0; i < c.x_grid.size(); ++i) {
      const double first_order =
          0.01 / std::numbers::pi * std::pow(c.x_grid[i], -alpha) * mv.at_positive(0).real();
      CHECK_THAT(tiny.values[i], WithinRel(first_order, 1e-3));
    }
  }
}

TEST_CASE("noisy estimator examples") {
  const EstimatorConfig cfg = make_estimator_config(1.0, FrequencyGrid{}, {0.5, 1.0, 2.0});
  const Sample ones(std::vector<double>(10, 1.0));
  // (2 pi)^{-1} int_{-1}^{1} (1 + it) dt = 1 / pi
  const CutoffEstimate est = estimate_noisy(ones, make_error("uniform01"), 1.0, cfg);
  CHECK_THAT(est.values[1], WithinRel(1.0 / std::numbers::pi, 1e-13));
  CHECK(est.error_name == "uniform01");

  EstimatorConfig other = cfg;
  other.alpha = 0.5;
  CHECK_THROWS_AS(estimate_noisy(ones, make_error("uniform01"), 1.0, other),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_noisy(ones, make_error("dirac"), 1.0, other), std::invalid_argument);
}

TEST_CASE("dirac errors reproduce the direct estimator bit for bit") {
  const EstimatorConfig cfg;
  const ErrorDensity dirac = make_error("dirac");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Sample s = draw("gamma_mixture", "dirac", 300, 77, seed);
    for (double k : {1.0, 3.37, 12.0}) {
      const CutoffEstimate a = estimate_direct(s, k, cfg);
      const CutoffEstimate b = estimate_noisy(s, dirac, k, cfg);
      REQUIRE(a.values == b.values);
      REQUIRE(a.omega_norm_sq == b.omega_norm_sq);
    }
  }
}

TEST_CASE("noisy estimator matches a ten times finer brute-force inversion") {
  const Sample s = draw("gamma5", "uniform01", 2000, 31);
  const EstimatorConfig cfg;
  const ErrorDensity g = make_error("uniform01");
  const CutoffEstimate est = estimate_noisy(s, g, 5.0, cfg);
  const auto fine = oracle::invert(
      [&](double t) { return oracle::empirical_mellin(s.points(), 1.0, t) / g.mellin(t); }, 1.0,
      5.0, 0.001, cfg.x_grid);
  CHECK(oracle::relative_sup(est.values, fine) <= 1e-4);
}

TEST_CASE("weighted ISE") {
  const EstimatorConfig cfg;
  const TargetDensity f = make_target("gamma5");
  const auto truth = tabulate_pdf(f, cfg.x_grid);
  CHECK(weighted_ise(cfg.x_grid, truth, truth, 1.0) == 0.0);

  const std::vector<double> zero(cfg.x_grid.size(), 0.0);
  const double norm = weighted_ise(cfg.x_grid, zero, truth, 1.0);
  const double on_grid = oracle::integrate(
      [&](double x) { return f.pdf(x) * f.pdf(x) * x; }, 0.01, 10.0);
  CHECK_THAT(norm, WithinRel(on_grid, 1e-4));
  CHECK_THAT(norm, WithinRel(315.0 / 512.0, 1e-2));

  // Doubling the x resolution barely moves the risk of a smooth estimate.
  const Sample s = draw("gamma5", "dirac", 1000, 8);
  EstimatorConfig fine = cfg;
  fine.x_grid = log_spaced(0.01, 10.0, 800);
  const double coarse_ise = weighted_ise(estimate_direct(s, 4.0, cfg), f, 1.0);
  const double fine_ise = weighted_ise(estimate_direct(s, 4.0, fine), f, 1.0);
  CHECK_THAT(coarse_ise, WithinRel(fine_ise, 1e-4));
  CHECK_THROWS(weighted_ise(cfg.x_grid, zero, std::vector<double>(3, 0.0), 1.0));
}

TEST_CASE("variance bounds") {
  const FrequencyGrid pi_grid(std::numbers::pi, std::numbers::pi / 1000.0);
  CHECK_THAT(variance_bound(100, std::numbers::pi, make_error("dirac"), pi_grid),
             WithinRel(0.01, 1e-12));
  CHECK_THAT(variance_bound(1000, 3.0, make_error("uniform01"), FrequencyGrid{}),
             WithinRel(24.0 / (2000.0 * std::numbers::pi), 1e-5));
  const Sample s = draw("weibull2", "dirac", 50, 2);
  CHECK_THAT(direct_variance_bound(s, 4.0, 1.0), WithinRel(4.0 / (50.0 * std::numbers::pi), 1e-15));
  double sigma2 = 0.0;
  for (double x : s.points()) sigma2 += 1.0 / x;
  sigma2 /= 50.0;
  CHECK_THAT(direct_variance_bound(s, 4.0, 0.5),
             WithinRel(sigma2 * 4.0 / (50.0 * std::numbers::pi), 1e-13));
}

TEST_CASE("norm identity on a wide evaluation grid") {
  const Sample s = draw("gamma5", "uniform01", 50, 12);
  std::vector<double> us;
  for (double u = -700.0; u <= 700.0; u += 0.05) us.push_back(u);
  std::vector<double> xs;
  for (double u : us) xs.push_back(std::exp(u));
  const EstimatorConfig cfg = make_estimator_config(1.0, FrequencyGrid(2.0, 2.5e-4), xs);
  const CutoffEstimate est = estimate_noisy(s, make_error("uniform01"), 2.0, cfg);
  double sum = 0.0;
  for (std::size_t i = 1; i < us.size(); ++i) {
    const double a = est.values[i - 1] * xs[i - 1];
    const double b = est.values[i] * xs[i];
    sum += 0.5 * (a * a + b * b) * (us[i] - us[i - 1]);
  }
  CHECK_THAT(sum, WithinRel(est.omega_norm_sq, 1e-3));
}

TEST_CASE("omega norm grows with the cut-off") {
  const Sample s = draw("scaled_beta", "beta_1_2", 400, 4);
  const EstimatorConfig cfg;
  double previous = 0.0;
  for (double k = 0.5; k <= 8.0; k += 0.5) {
    const CutoffEstimate est = estimate_noisy(s, make_error("beta_1_2"), k, cfg);
    REQUIRE(est.omega_norm_sq >= previous);
    previous = est.omega_norm_sq;
  }
}

TEST_CASE("empirical transform is unbiased for the noisy transform") {
  const TargetDensity f = make_target("gamma5");
  const ErrorDensity g = make_error("uniform01");
  const std::size_t n = 1000;
  const std::size_t reps = 500;
  const FrequencyGrid grid(2.0, 0.5);
  std::vector<complex> mean(grid.half_size() + 1);
  for (std::size_t r = 0; r < reps; ++r) {
    Rng rng = make_stream(600, r);
    const MellinValue mv = empirical_mellin(sample_noisy(f, g, n, rng), 1.0, grid);
    for (std::size_t j = 0; j <= grid.half_size(); ++j) mean[j] += mv.at_positive(j);
  }
  const double tol = 5.0 / std::sqrt(static_cast<double>(reps * n));
  for (double t : {0.5, 1.0, 2.0}) {
    const complex m = mean[grid.index_of(t)] / static_cast<double>(reps);
    const complex expected = f.mellin(t) * g.mellin(t);
    CAPTURE(t);
    CHECK(std::abs(m.real() - expected.real()) <= tol);
    CHECK(std::abs(m.imag() - expected.imag()) <= tol);
  }
}

TEST_CASE("variance of the noisy estimator stays below its bound") {
  const TargetDensity f = make_target("gamma5");
  const ErrorDensity g = make_error("uniform01");
  const EstimatorConfig cfg;
  const std::size_t n = 500;
  const double k = 3.0;
  const auto f_k = invert_cutoff(target_mellin(f, cfg.grid.truncated(k)), k, cfg.x_grid);
  double mean = 0.0;
  for (std::size_t r = 0; r < 200; ++r) {
    Rng rng = make_stream(700, r);
    const CutoffEstimate est = estimate_noisy(sample_noisy(f, g, n, rng), g, k, cfg);
    mean += weighted_ise(cfg.x_grid, est.values, f_k, 1.0);
  }
  mean /= 200.0;
  CHECK(mean <= variance_bound(n, k, g, cfg.grid));
}

TEST_CASE("bias-variance trade-off in the direct case") {
  const TargetDensity f = make_target("gamma5");
  const EstimatorConfig cfg;
  std::vector<double> low;
  std::vector<double> mid;
  std::vector<double> high;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_stream(800, seed);
    const Sample s = sample_target(f, 5000, rng);
    const MellinValue mv = empirical_mellin(s, 1.0, cfg.grid.truncated(60.0));
    const std::vector<double> ks{1.0, 8.0, 60.0};
    const auto rows = invert_cutoff_path(mv, ks, cfg.x_grid);
    const auto truth = tabulate_pdf(f, cfg.x_grid);
    low.push_back(weighted_ise(cfg.x_grid, rows[0], truth, 1.0));
    mid.push_back(weighted_ise(cfg.x_grid, rows[1], truth, 1.0));
    high.push_back(weighted_ise(cfg.x_grid, rows[2], truth, 1.0));
  }
  CHECK(median(mid) < median(low));
  CHECK(median(mid) < median(high));
}

TEST_CASE("clipping only affects reported values") {
  const Sample s = draw("scaled_beta", "uniform01", 300, 6);
  const CutoffEstimate est = estimate_noisy(s, make_error("uniform01"), 6.0, EstimatorConfig{});
  const auto clipped = est.clipped_values();
  bool any_negative = false;
  for (std::size_t i = 0; i < clipped.size(); ++i) {
    any_negative = any_negative || est.values[i] < 0.0;
    REQUIRE(clipped[i] == std::max(est.values[i], 0.0));
  }
  CHECK(any_negative);
}
