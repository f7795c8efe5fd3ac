#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include "mellin_deconv/experiments.hpp"
#include "scenarios.hpp"

using namespace mellin_deconv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

void require_same(const RiskReport& a, const RiskReport& b) {
  REQUIRE(a.ise == b.ise);
  REQUIRE(a.k_used == b.k_used);
  REQUIRE(a.mean == b.mean);
  REQUIRE(a.median == b.median);
  REQUIRE(a.median_curve == b.median_curve);
  REQUIRE(a.k_histogram == b.k_histogram);
  REQUIRE(a.K_n == b.K_n);
}

}  // namespace

TEST_CASE("configuration checks") {
  MCConfig mc{"gamma5", "dirac", 100, 0, 1, MCMode::fixed(2.0)};
  CHECK_THROWS_AS(mc.validate(), std::invalid_argument);
  mc.reps = 1;
  CHECK_NOTHROW(mc.validate());
  mc.target = "cauchy";
  CHECK_THROWS(monte_carlo(mc, EstimatorConfig{}));
  MCConfig bad_chi{"gamma5", "dirac", 100, 1, 1, MCMode::adaptive(-1.0)};
  CHECK_THROWS_AS(bad_chi.validate(), std::invalid_argument);
}

TEST_CASE("reports are reproducible") {
  const EstimatorConfig cfg;
  SECTION("single replication run twice") {
    const MCConfig mc{"gamma_mixture", "uniform01", 500, 1, 42, MCMode::adaptive(0.8)};
    require_same(monte_carlo(mc, cfg), monte_carlo(mc, cfg));
  }
  SECTION("thread count does not matter") {
    for (const MCMode mode : {MCMode::adaptive(1.2), MCMode::oracle(), MCMode::fixed(3.5)}) {
      const MCConfig mc{"scaled_beta", "dirac", 400, 9, 3, mode};
      require_same(monte_carlo(mc, cfg, 1), monte_carlo(mc, cfg, 4));
    }
  }
}

TEST_CASE("report contents") {
  const EstimatorConfig cfg;
  const MCConfig mc{"gamma5", "uniform01", 1000, 7, 11, MCMode::fixed(3.0)};
  const RiskReport r = monte_carlo(mc, cfg);
  REQUIRE(r.ise.size() == 7);
  CHECK(r.K_n == 10);
  for (double k : r.k_used) CHECK(k == 3.0);
  double sum = 0.0;
  for (double v : r.ise) sum += v;
  CHECK_THAT(r.mean, WithinRel(sum / 7.0, 1e-15));
  std::vector<double> sorted = r.ise;
  std::sort(sorted.begin(), sorted.end());
  CHECK(r.median == sorted[3]);
  CHECK(r.x == cfg.x_grid);
  CHECK(r.truth == tabulate_pdf(make_target("gamma5"), cfg.x_grid));
  CHECK(r.k_histogram == std::vector<std::pair<double, std::size_t>>{{3.0, 7}});
  for (double v : r.median_curve) CHECK(v >= 0.0);

  // Replication r is an ordinary estimate on stream (seed, r).
  Rng rng = make_stream(11, 4);
  const Sample s = sample_noisy(make_target("gamma5"), make_error("uniform01"), 1000, rng);
  const CutoffEstimate est = estimate_noisy(s, make_error("uniform01"), 3.0, cfg);
  CHECK(r.ise[4] == weighted_ise(est, make_target("gamma5"), 1.0));
}

TEST_CASE("oracle cut-off beats the extreme cut-offs") {
  const EstimatorConfig cfg;
  const MCConfig base{"gamma5", "uniform01", 1000, 50, 5, MCMode::oracle()};
  const RiskReport oracle = monte_carlo(base, cfg);
  MCConfig low = base;
  low.mode = MCMode::fixed(1.0);
  MCConfig high = base;
  high.mode = MCMode::fixed(static_cast<double>(oracle.K_n));
  CHECK(oracle.mean <= monte_carlo(low, cfg).mean);
  CHECK(oracle.mean <= monte_carlo(high, cfg).mean);
  REQUIRE(oracle.k_histogram.size() == 1);
}

TEST_CASE("oracle risk") {
  const EstimatorConfig cfg;
  SECTION("one replication picks that sample's best cut-off") {
    const OracleRisk o = oracle_risk("weibull2", "uniform_half_threehalf", 1000, 1, 8, cfg);
    Rng rng = make_stream(8, 0);
    const ErrorDensity g = make_error("uniform_half_threehalf");
    const Sample s = sample_noisy(make_target("weibull2"), g, 1000, rng);
    REQUIRE(o.risk_by_k.size() == 10);
    int best = 0;
    double lowest = INFINITY;
    for (int k = 1; k <= 10; ++k) {
      const double ise = weighted_ise(estimate_noisy(s, g, k, cfg), make_target("weibull2"), 1.0);
      CHECK_THAT(o.risk_by_k[k - 1], WithinRel(ise, 1e-12));
      if (ise < lowest) {
        lowest = ise;
        best = k;
      }
    }
    CHECK(o.k_star == best);
  }
  SECTION("the minimum is the minimum") {
    const OracleRisk o = oracle_risk("gamma_mixture", "beta_1_2", 2000, 10, 3, cfg);
    CHECK(o.risk == o.risk_by_k[o.k_star - 1]);
    for (double r : o.risk_by_k) CHECK(o.risk <= r);
  }
  SECTION("the oracle cut-off grows with the sample size") {
    int grows = 0;
    const int studies = 20;
    for (int i = 0; i < studies; ++i) {
      const std::uint64_t seed = 500 + static_cast<std::uint64_t>(i);
      const int small = oracle_risk("gamma5", "uniform01", 1000, 20, seed, cfg).k_star;
      const int large = oracle_risk("gamma5", "uniform01", 4000, 20, seed + 1000, cfg).k_star;
      if (large >= small) ++grows;
    }
    CHECK(grows >= 16);
  }
}

TEST_CASE("log-log slope") {
  const std::vector<double> n{1000, 2000, 4000, 8000, 16000};
  for (double beta : {0.5, 8.0 / 9.0, 8.0 / 11.0, 2.0}) {
    std::vector<double> ise;
    for (double v : n) ise.push_back(3.7 * std::pow(v, -beta));
    CHECK_THAT(loglog_slope(n, ise), WithinAbs(-beta, 1e-12));
  }
  CHECK_THROWS(loglog_slope(std::vector<double>{1.0}, std::vector<double>{1.0}));
  CHECK_THROWS(loglog_slope(n, std::vector<double>{1.0, 2.0}));
}

TEST_CASE("rate cut-off") {
  const FrequencyGrid grid;
  CHECK(rate_cutoff(1000, 4.0, 0, grid) == grid.nearest_node(std::pow(1000.0, 1.0 / 9.0)));
  CHECK(rate_cutoff(16000, 4.0, 1, grid) == grid.nearest_node(std::pow(16000.0, 1.0 / 11.0)));
  CHECK(rate_cutoff(1, 4.0, 1, grid) == 1.0);
}

TEST_CASE("rate study bookkeeping") {
  const EstimatorConfig cfg;
  const std::vector<std::size_t> sizes{200, 400, 800, 1600};
  const RateStudy r = rate_study("scaled_beta", "uniform01", 4.0, sizes, 5, 1, cfg);
  CHECK(r.n_list == sizes);
  CHECK_THAT(r.theoretical_exponent, WithinRel(-8.0 / 11.0, 1e-15));
  CHECK_FALSE(r.super_smooth_warning);
  const std::vector<double> nd(sizes.begin(), sizes.end());
  CHECK(r.slope == loglog_slope(nd, r.mean_ise));
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    CHECK(r.k_used[i] == rate_cutoff(sizes[i], 4.0, 1, cfg.grid));
  }

  std::ostringstream captured;
  auto* old = std::clog.rdbuf(captured.rdbuf());
  const RateStudy smooth = rate_study("gamma5", "dirac", 4.0, sizes, 2, 1, cfg);
  std::clog.rdbuf(old);
  CHECK(smooth.super_smooth_warning);
  CHECK_FALSE(captured.str().empty());

  CHECK_THROWS_AS(rate_study("scaled_beta", "dirac", 4.0, std::vector<std::size_t>{1, 2, 3}, 2,
                             1, cfg),
                  std::invalid_argument);
  CHECK_THROWS_AS(rate_study("scaled_beta", "dirac", 4.0,
                             std::vector<std::size_t>{100, 200, 200, 400}, 2, 1, cfg),
                  std::invalid_argument);
}

TEST_CASE("Weibull under Beta(1,2) errors reproduces the frozen run") {
  const EstimatorConfig cfg;
  const MCConfig mc{"weibull2", "beta_1_2", 2000, 50, 1, MCMode::adaptive(0.01)};
  const RiskReport r = monte_carlo(mc, cfg);
  CHECK_THAT(r.mean, WithinRel(0.016140598139247019, 1e-10));
  // The weighted median curve stays within a band around the truth.
  double peak = 0.0;
  double gap = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    peak = std::max(peak, r.x[i] * r.truth[i]);
    gap = std::max(gap, r.x[i] * std::abs(r.median_curve[i] - r.truth[i]));
  }
  CAPTURE(gap, peak);
  CHECK(gap <= 0.15 * peak);
}

TEST_CASE("oracle risk falls with the sample size for every reference pair") {
  const EstimatorConfig cfg;
  for (const auto& sc : oracle::reference_scenarios()) {
    double previous = INFINITY;
    for (std::size_t n : {500, 2000, 8000}) {
      const MCConfig mc{sc.target, sc.error, n, 100, 13, MCMode::oracle()};
      const double mean = monte_carlo(mc, cfg).mean;
      CAPTURE(sc.target, sc.error, n, mean, previous);
      CHECK(mean < previous);
      previous = mean;
    }
  }
}
