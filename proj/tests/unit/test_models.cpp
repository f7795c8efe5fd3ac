#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "mellin_deconv/errors.hpp"
#include "mellin_deconv/models.hpp"
#include "model_bounds.hpp"
#include "oracles.hpp"

using namespace mellin_deconv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::function<double(double)> pdf_of(const oracle::LogSupport& m) {
  if (m.target) {
    auto f = std::make_shared<TargetDensity>(make_target(m.name));
    return [f](double x) { return f->pdf(x); };
  }
  auto g = std::make_shared<ErrorDensity>(make_error(m.name));
  return [g](double x) { return g->pdf(x); };
}

complex closed_form(const oracle::LogSupport& m, double t) {
  return m.target ? make_target(m.name).mellin(t) : make_error(m.name).mellin(t);
}

// cdf at each sorted draw by accumulating short Gauss-Legendre pieces.
double ks_statistic(std::vector<double> draws, const std::function<double(double)>& pdf,
                    double lower) {
  using boost::math::quadrature::gauss;
  std::sort(draws.begin(), draws.end());
  const auto n = static_cast<double>(draws.size());
  double cdf = 0.0;
  double prev = lower;
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    if (draws[i] > prev) {
      const double a = prev;
      const double b = draws[i];
      cdf += b - a < 0.05 ? gauss<double, 20>::integrate(pdf, a, b) : oracle::integrate(pdf, a, b);
      prev = b;
    }
    d = std::max({d, cdf - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - cdf});
  }
  return d;
}

}  // namespace

TEST_CASE("every model integrates to one and has unit transform at t = 0") {
  for (const auto& m : oracle::model_supports()) {
    CAPTURE(m.name);
    const complex mass = oracle::mellin_by_quadrature(pdf_of(m), 0.0, m.u_lo, m.u_hi, m.breaks);
    CHECK_THAT(mass.real(), WithinAbs(1.0, 1e-8));
    CHECK_THAT(std::abs(closed_form(m, 0.0) - 1.0), WithinAbs(0.0, 1e-12));
  }
  CHECK(make_error("dirac").mellin(0.0) == complex(1.0, 0.0));
}

TEST_CASE("closed-form transforms match quadrature") {
  for (const auto& m : oracle::model_supports()) {
    for (double t : {0.0, 0.5, 1.0, 2.0, 5.0, -3.0}) {
      CAPTURE(m.name, t);
      const complex q = oracle::mellin_by_quadrature(pdf_of(m), t, m.u_lo, m.u_hi, m.breaks);
      CHECK(std::abs(q - closed_form(m, t)) < 1e-8);
    }
  }
}

TEST_CASE("histogram transform matches quadrature") {
  const TargetDensity h = make_histogram({0.0, 0.7, 1.9, 5.0}, {0.2, 0.5, 0.3});
  const std::vector<double> breaks{std::log(0.7), std::log(1.9)};
  for (double t : {0.0, 1.0, 4.0}) {
    const complex q = oracle::mellin_by_quadrature([&](double x) { return h.pdf(x); }, t, -40.0,
                                                   std::log(5.0), breaks);
    CHECK(std::abs(q - h.mellin(t)) < 1e-9);
  }
  CHECK_THROWS_AS(make_histogram({0.0, 1.0}, {0.5}), std::invalid_argument);
  CHECK_THROWS_AS(make_histogram({0.0, 2.0, 1.0}, {0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("model examples") {
  const TargetDensity g5 = make_target("gamma5");
  CHECK(g5.pdf(0.0) == 0.0);
  CHECK(g5.super_smooth());
  CHECK(make_target("scaled_beta").s_ref() == 4.0);
  CHECK(make_target("weibull2").mellin(0.0) == complex(1.0, 0.0));

  const ErrorDensity u = make_error("uniform01");
  CHECK(u.gamma() == 1);
  const complex at1 = u.mellin(1.0);
  CHECK_THAT(std::abs(at1 - 1.0 / complex(1.0, 1.0)), WithinAbs(0.0, 1e-15));
  CHECK_THAT(std::abs(at1), WithinRel(1.0 / std::sqrt(2.0), 1e-15));

  const ErrorDensity b2 = make_error("beta_1_2");
  CHECK(b2.gamma() == 2);
  for (double t : {0.3, 2.0, 11.0}) {
    const complex expected = 2.0 / (complex(1.0, t) * complex(2.0, t));
    CHECK_THAT(std::abs(b2.mellin(t) - expected), WithinAbs(0.0, 1e-15));
  }
  CHECK(make_error("uniform_half_threehalf").gamma() == 1);
  CHECK(make_error("beta_1_3").gamma() == 3);

  const ErrorDensity d = make_error("dirac");
  CHECK(d.is_dirac());
  CHECK(d.gamma() == 0);
  CHECK_THROWS_AS(d.pdf(1.0), std::logic_error);

  CHECK_THROWS_AS(make_target("cauchy"), std::invalid_argument);
  CHECK_THROWS_AS(make_error("beta_1_0"), std::invalid_argument);
  CHECK_THROWS_AS(make_error("beta_1_x"), std::invalid_argument);
  CHECK_THROWS_AS(make_beta_1_k(0), std::invalid_argument);
}

TEST_CASE("noise functional") {
  const FrequencyGrid grid;
  const ErrorDensity dirac = make_error("dirac");
  for (double k : {1.0, 5.0, 37.5}) {
    CHECK_THAT(noise_functional(dirac, k, grid), WithinRel(2.0 * k, 1e-12));
  }
  // int_{-3}^{3} (1 + t^2) dt = 24; trapezoid error is h^2/12 * 12.
  CHECK_THAT(noise_functional(make_error("uniform01"), 3.0, grid), WithinAbs(24.0, 2e-4));
  // int_{-4}^{4} (1 + t^2)(4 + t^2) / 4 dt = 2 (4*4 + 5*64/3 + 1024/5) / 4
  const double exact = 2.0 * (16.0 + 5.0 * 64.0 / 3.0 + 1024.0 / 5.0) / 4.0;
  CHECK_THAT(noise_functional(make_error("beta_1_2"), 4.0, FrequencyGrid(4.0, 1e-5)),
             WithinAbs(exact, 1e-8));
  double previous = 0.0;
  for (double k = 0.5; k <= 10.0; k += 0.5) {
    const double v = noise_functional(make_error("uniform_half_threehalf"), k, grid);
    REQUIRE(v > previous);
    previous = v;
  }
}

TEST_CASE("C_g surrogate") {
  CHECK_THAT(cg_estimate(make_error("dirac"), 1, 50), WithinRel(2.0, 1e-12));
  CHECK_THAT(cg_estimate(make_error("uniform01"), 1, 50), WithinRel(8.0 / 3.0, 1e-4));
  // max_k Delta(k) / k^5 for Beta(1,2), attained at k = 1: 2 (4 + 5/3 + 1/5) / 4
  CHECK_THAT(cg_estimate(make_error("beta_1_2"), 1, 50), WithinRel(44.0 / 15.0, 1e-4));
  CHECK_THROWS(cg_estimate(make_error("dirac"), 3, 2));
}

TEST_CASE("vanishing error transforms are an assumption violation") {
  const FrequencyGrid grid(3.0, 0.01);
  MellinValue mg = tabulate_mellin([](double t) { return complex(1.0 / (1.0 + t * t), 0.0); },
                                   1.0, grid);
  CHECK_NOTHROW(require_nonvanishing(mg, 3.0));
  mg.values[grid.half_size() + 200] = 0.0;
  CHECK_THROWS_AS(require_nonvanishing(mg, 3.0), AssumptionViolation);
  CHECK_NOTHROW(require_nonvanishing(mg, 1.5));
}

TEST_CASE("error transforms decay like t^-gamma") {
  for (const std::string name : {"uniform01", "uniform_half_threehalf", "beta_1_2", "beta_1_3"}) {
    const ErrorDensity g = make_error(name);
    double lo = INFINITY;
    double hi = 0.0;
    for (double t = 10.0; t <= 100.0; t += 0.25) {
      const double v = std::abs(g.mellin(t)) * std::pow(t, g.gamma());
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CAPTURE(name, lo, hi);
    CHECK(hi / lo <= 4.0);
  }
}

TEST_CASE("samplers follow their densities") {
  const std::size_t n = 100000;
  const double critical = 1.628 / std::sqrt(static_cast<double>(n));
  std::uint64_t index = 0;
  for (const auto& m : oracle::model_supports()) {
    Rng rng = make_stream(4242, index++);
    const Sample s = m.target ? make_target(m.name).sample(rng, n)
                              : make_error(m.name).sample(rng, n);
    const std::vector<double> draws(s.points().begin(), s.points().end());
    const double d = ks_statistic(draws, pdf_of(m), m.u_lo > -40.0 ? std::exp(m.u_lo) : 0.0);
    CAPTURE(m.name, d, critical);
    CHECK(d < critical);
  }
}

TEST_CASE("noisy sampling") {
  const TargetDensity f = make_target("gamma5");
  SECTION("dirac leaves the target draws unchanged") {
    Rng a = make_stream(99, 0);
    Rng b = make_stream(99, 0);
    const Sample x = sample_target(f, 500, a);
    const Sample y = sample_noisy(f, make_error("dirac"), 500, b);
    for (std::size_t j = 0; j < 500; ++j) REQUIRE(x.points()[j] == y.points()[j]);
  }
  SECTION("uniform errors shrink every draw") {
    Rng a = make_stream(99, 1);
    Rng b = make_stream(99, 1);
    const Sample x = sample_target(f, 500, a);
    const Sample y = sample_noisy(f, make_error("uniform01"), 500, b);
    for (std::size_t j = 0; j < 500; ++j) REQUIRE(y.points()[j] <= x.points()[j]);
  }
  SECTION("sample mean of Gamma(5,1)") {
    const std::size_t n = 1000000;
    Rng rng = make_stream(5, 5);
    const Sample x = sample_target(f, n, rng);
    double mean = 0.0;
    for (double v : x.points()) mean += v;
    mean /= static_cast<double>(n);
    CHECK(std::abs(mean - 5.0) < 3.0 * std::sqrt(5.0 / static_cast<double>(n)));
  }
  SECTION("same stream, same sample") {
    Rng a = make_stream(1, 2);
    Rng b = make_stream(1, 2);
    const Sample x = sample_noisy(f, make_error("beta_1_2"), 100, a);
    const Sample y = sample_noisy(f, make_error("beta_1_2"), 100, b);
    for (std::size_t j = 0; j < 100; ++j) REQUIRE(x.points()[j] == y.points()[j]);
  }
}
