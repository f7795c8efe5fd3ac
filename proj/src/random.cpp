#include "mellin_deconv/random.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/random/normal_distribution.hpp>

namespace mellin_deconv {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ ((index + 1) * 0x9e3779b97f4a7c15ULL));
}

double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(Rng& rng) {
  // Boost's ziggurat keeps no state between calls, so each draw is a pure
  // function of the engine state.
  boost::random::normal_distribution<double> normal;
  return normal(rng);
}

double gamma_variate(Rng& rng, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw std::invalid_argument("gamma_variate: shape and rate must be positive");
  }
  if (shape < 1.0) {
    const double boost = std::pow(uniform_open(rng), 1.0 / shape);
    return gamma_variate(rng, shape + 1.0, rate) * boost;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open(rng);
    if (u < 1.0 - 0.0331 * (x * x) * (x * x)) {
      return d * v / rate;
    }
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v / rate;
    }
  }
}

double beta_variate(Rng& rng, double a, double b) {
  const double x = gamma_variate(rng, a, 1.0);
  const double y = gamma_variate(rng, b, 1.0);
  return x / (x + y);
}

}  // namespace mellin_deconv
