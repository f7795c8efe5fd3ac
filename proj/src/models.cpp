#include "mellin_deconv/models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mellin_deconv/errors.hpp"
#include "mellin_deconv/special.hpp"

namespace mellin_deconv {

namespace {

// log of rate^shape x^{shape-1} e^{-rate x} / Gamma(shape)
double log_gamma_pdf(double x, double shape, double rate) {
  return shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x - std::lgamma(shape);
}

double gamma_pdf(double x, double shape, double rate) {
  if (!(x > 0.0)) return 0.0;
  return std::exp(log_gamma_pdf(x, shape, rate));
}

// Gamma(shape + it) rate^{-it} / Gamma(shape)
complex gamma_law_mellin(double shape, double rate, double t) {
  return std::exp(log_gamma({shape, t}) - log_gamma({shape, 0.0}) -
                  complex{0.0, t * std::log(rate)});
}

// c^{1 + it}; zero at c = 0.
complex power_one_plus_it(double c, double t) {
  if (c == 0.0) return {0.0, 0.0};
  return std::polar(c, t * std::log(c));
}

TargetDensity make_gamma5() {
  return TargetDensity(
      "gamma5", [](double x) { return gamma_pdf(x, 5.0, 1.0); },
      [](double t) { return gamma_law_mellin(5.0, 1.0, t); },
      [](Rng& rng) { return gamma_variate(rng, 5.0, 1.0); }, std::nullopt);
}

TargetDensity make_gamma_mixture() {
  return TargetDensity(
      "gamma_mixture",
      [](double x) { return 0.4 * gamma_pdf(x, 2.0, 3.2) + 0.6 * gamma_pdf(x, 16.0, 6.8); },
      [](double t) {
        return 0.4 * gamma_law_mellin(2.0, 3.2, t) + 0.6 * gamma_law_mellin(16.0, 6.8, t);
      },
      [](Rng& rng) {
        return uniform_open(rng) < 0.4 ? gamma_variate(rng, 2.0, 3.2)
                                       : gamma_variate(rng, 16.0, 6.8);
      },
      std::nullopt);
}

TargetDensity make_scaled_beta() {
  // 2 B with B ~ Beta(4, 5). The normalizing constant is 140 = 1 / (2 B(4, 5)).
  return TargetDensity(
      "scaled_beta",
      [](double x) {
        if (!(x > 0.0) || !(x < 2.0)) return 0.0;
        const double y = 0.5 * x;
        return 140.0 * y * y * y * std::pow(1.0 - y, 4);
      },
      [](double t) {
        // 2^{it} B(4 + it, 5) / B(4, 5) = 2^{it} prod_{j=4}^{8} j / (j + it)
        complex value = std::polar(1.0, t * std::log(2.0));
        for (int j = 4; j <= 8; ++j) value *= static_cast<double>(j) / complex(j, t);
        return value;
      },
      [](Rng& rng) { return 2.0 * beta_variate(rng, 4.0, 5.0); }, 4.0, 2.0);
}

TargetDensity make_weibull2() {
  return TargetDensity(
      "weibull2", [](double x) { return x > 0.0 ? 2.0 * x * std::exp(-x * x) : 0.0; },
      [](double t) { return gamma_ratio(1.0, 0.5 * t); },
      [](Rng& rng) { return std::sqrt(-std::log(1.0 - uniform_open(rng))); }, std::nullopt);
}

TargetDensity make_exponential() {
  return TargetDensity(
      "exponential", [](double x) { return x >= 0.0 ? std::exp(-x) : 0.0; },
      [](double t) { return gamma_ratio(1.0, t); },
      [](Rng& rng) { return -std::log(1.0 - uniform_open(rng)); }, std::nullopt);
}

ErrorDensity make_dirac() {
  return ErrorDensity(
      "dirac", std::nullopt, [](double) { return complex{1.0, 0.0}; },
      [](Rng&) { return 1.0; }, 0, 1.0, 1.0);
}

ErrorDensity make_uniform_half_threehalf() {
  return ErrorDensity(
      "uniform_half_threehalf",
      [](double x) { return (x >= 0.5 && x <= 1.5) ? 1.0 : 0.0; },
      [](double t) {
        return (power_one_plus_it(1.5, t) - power_one_plus_it(0.5, t)) / complex(1.0, t);
      },
      [](Rng& rng) { return 0.5 + uniform_open(rng); }, 1, 1.0, 1.5);
}

std::optional<int> parse_beta_index(const std::string& name) {
  static const std::string prefix = "beta_1_";
  if (name.rfind(prefix, 0) != 0) return std::nullopt;
  const char* first = name.data() + prefix.size();
  const char* last = name.data() + name.size();
  int k = 0;
  auto [ptr, ec] = std::from_chars(first, last, k);
  if (ec != std::errc{} || ptr != last || first == last) return std::nullopt;
  return k;
}

// Trapezoid sums of |M[g]|^{-2} over [0, t_j] at every node up to `last`.
std::vector<double> inverse_power_cumulative(const MellinValue& mg, std::size_t last) {
  std::vector<double> out(last + 1, 0.0);
  double previous = 1.0 / std::norm(mg.at_positive(0));
  double sum = 0.0;
  for (std::size_t j = 1; j <= last; ++j) {
    const double current = 1.0 / std::norm(mg.at_positive(j));
    sum += (previous + current) * (0.5 * mg.grid.cell_width(j - 1));
    previous = current;
    out[j] = sum;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

TargetDensity::TargetDensity(std::string name, Pdf pdf, Transform mellin, Draw draw,
                             std::optional<double> s_ref, std::optional<double> support_upper)
    : name_(std::move(name)),
      pdf_(std::move(pdf)),
      mellin_(std::move(mellin)),
      draw_(std::move(draw)),
      s_ref_(s_ref),
      support_upper_(support_upper) {}

Sample TargetDensity::sample(Rng& rng, std::size_t n) const {
  std::vector<double> points(n);
  for (auto& p : points) p = draw_(rng);
  return Sample(std::move(points));
}

ErrorDensity::ErrorDensity(std::string name, std::optional<Pdf> pdf, Transform mellin, Draw draw,
                           int gamma, double tau1, std::optional<double> support_upper)
    : name_(std::move(name)),
      pdf_(std::move(pdf)),
      mellin_(std::move(mellin)),
      draw_(std::move(draw)),
      gamma_(gamma),
      tau1_(tau1),
      support_upper_(support_upper) {}

double ErrorDensity::pdf(double x) const {
  if (!pdf_) throw std::logic_error("the dirac error law has no density");
  return (*pdf_)(x);
}

Sample ErrorDensity::sample(Rng& rng, std::size_t n) const {
  std::vector<double> points(n);
  for (auto& p : points) p = draw_(rng);
  return Sample(std::move(points));
}

// ---------------------------------------------------------------------------

TargetDensity make_target(const std::string& name) {
  if (name == "gamma5") return make_gamma5();
  if (name == "gamma_mixture") return make_gamma_mixture();
  if (name == "scaled_beta") return make_scaled_beta();
  if (name == "weibull2") return make_weibull2();
  if (name == "exponential") return make_exponential();
  throw std::invalid_argument("unknown target density: " + name);
}

const std::vector<std::string>& target_names() {
  static const std::vector<std::string> names = {"gamma5", "gamma_mixture", "scaled_beta",
                                                 "weibull2", "exponential"};
  return names;
}

TargetDensity make_histogram(std::vector<double> edges, std::vector<double> weights) {
  if (edges.size() < 2 || weights.size() + 1 != edges.size()) {
    throw std::invalid_argument("make_histogram: need B + 1 edges for B weights");
  }
  if (!(edges.front() >= 0.0)) throw std::invalid_argument("make_histogram: negative edge");
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    if (!(edges[b + 1] > edges[b])) {
      throw std::invalid_argument("make_histogram: edges must be strictly increasing");
    }
    if (!(weights[b] >= 0.0)) throw std::invalid_argument("make_histogram: negative weight");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("make_histogram: weights must sum to one");
  }
  std::vector<double> heights(weights.size());
  std::vector<double> cumulative(weights.size());
  double running = 0.0;
  for (std::size_t b = 0; b < weights.size(); ++b) {
    heights[b] = weights[b] / (edges[b + 1] - edges[b]);
    running += weights[b];
    cumulative[b] = running;
  }
  const double upper = edges.back();
  return TargetDensity(
      "histogram",
      [edges, heights](double x) {
        if (!(x >= edges.front()) || !(x < edges.back())) return 0.0;
        const auto it = std::upper_bound(edges.begin(), edges.end(), x);
        return heights[static_cast<std::size_t>(it - edges.begin()) - 1];
      },
      [edges, heights](double t) {
        complex sum{0.0, 0.0};
        for (std::size_t b = 0; b < heights.size(); ++b) {
          sum += heights[b] * (power_one_plus_it(edges[b + 1], t) - power_one_plus_it(edges[b], t));
        }
        return sum / complex(1.0, t);
      },
      [edges, cumulative](Rng& rng) {
        const double u = uniform_open(rng) * cumulative.back();
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) --it;
        const auto b = static_cast<std::size_t>(it - cumulative.begin());
        return edges[b] + uniform_open(rng) * (edges[b + 1] - edges[b]);
      },
      0.0, upper);
}

ErrorDensity make_beta_1_k(int k) {
  if (k < 1) throw std::invalid_argument("beta_1_k: k must be a positive integer");
  const double kd = static_cast<double>(k);
  // pow(y, 1) == y exactly, so the uniform case skips the call.
  ErrorDensity::Draw draw;
  if (k == 1) {
    draw = [](Rng& rng) { return 1.0 - (1.0 - uniform_open(rng)); };
  } else {
    draw = [kd](Rng& rng) { return 1.0 - std::pow(1.0 - uniform_open(rng), 1.0 / kd); };
  }
  return ErrorDensity(
      k == 1 ? "uniform01" : "beta_1_" + std::to_string(k),
      [k, kd](double x) {
        if (!(x > 0.0) || !(x < 1.0)) return 0.0;
        return kd * std::pow(1.0 - x, k - 1);
      },
      [k](double t) {
        complex value{1.0, 0.0};
        for (int j = 1; j <= k; ++j) value *= static_cast<double>(j) / complex(j, t);
        return value;
      },
      std::move(draw), k, 1.0, 1.0);
}

ErrorDensity make_error(const std::string& name) {
  if (name == "dirac") return make_dirac();
  if (name == "uniform01") return make_beta_1_k(1);
  if (name == "uniform_half_threehalf") return make_uniform_half_threehalf();
  if (const auto k = parse_beta_index(name)) return make_beta_1_k(*k);
  throw std::invalid_argument("unknown error density: " + name);
}

const std::vector<std::string>& error_names() {
  static const std::vector<std::string> names = {"dirac", "uniform01", "uniform_half_threehalf",
                                                 "beta_1_2"};
  return names;
}

MellinValue error_mellin(const ErrorDensity& g, const FrequencyGrid& grid) {
  return tabulate_mellin([&g](double t) { return g.mellin(t); }, 1.0, grid);
}

MellinValue target_mellin(const TargetDensity& f, const FrequencyGrid& grid) {
  return tabulate_mellin([&f](double t) { return f.mellin(t); }, 1.0, grid);
}

void require_nonvanishing(const MellinValue& mg, double k) {
  const std::size_t last = mg.grid.index_of(k);
  for (std::size_t j = 0; j <= last; ++j) {
    if (!(std::abs(mg.at_positive(j)) >= kMellinFloor)) {
      std::ostringstream msg;
      msg << "error density Mellin transform vanishes at t = " << mg.grid.positive_node(j)
          << " (|M[g]| below " << kMellinFloor << ")";
      throw AssumptionViolation(msg.str());
    }
  }
}

double noise_functional(const ErrorDensity& g, double k, const FrequencyGrid& grid) {
  if (!(k > 0.0)) throw std::invalid_argument("noise_functional: k must be positive");
  const FrequencyGrid sub = grid.truncated(k);
  const MellinValue mg = error_mellin(g, sub);
  require_nonvanishing(mg, sub.k_max());
  return 2.0 * inverse_power_cumulative(mg, sub.half_size()).back();
}

double cg_estimate(const ErrorDensity& g, int k_lo, int k_hi, const FrequencyGrid& grid) {
  if (k_lo < 1 || k_hi < k_lo) throw std::invalid_argument("cg_estimate: empty k range");
  const FrequencyGrid sub = grid.truncated(static_cast<double>(k_hi));
  const MellinValue mg = error_mellin(g, sub);
  require_nonvanishing(mg, sub.k_max());
  const std::vector<double> cumulative = inverse_power_cumulative(mg, sub.half_size());
  double best = 0.0;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double delta = 2.0 * cumulative[sub.index_of(static_cast<double>(k))];
    best = std::max(best, delta / std::pow(static_cast<double>(k), 2 * g.gamma() + 1));
  }
  return best;
}

Sample sample_target(const TargetDensity& f, std::size_t n, Rng& rng) { return f.sample(rng, n); }

Sample sample_error(const ErrorDensity& g, std::size_t n, Rng& rng) { return g.sample(rng, n); }

Sample sample_noisy(const TargetDensity& f, const ErrorDensity& g, std::size_t n, Rng& rng) {
  if (g.is_dirac()) return f.sample(rng, n);
  // All n target draws come first, then all n error draws.
  std::vector<double> y(n);
  for (auto& v : y) v = f.draw(rng);
  for (auto& v : y) v *= g.draw(rng);
  return Sample(std::move(y));
}

}  // namespace mellin_deconv
