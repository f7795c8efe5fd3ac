#include "mellin_deconv/special.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mellin_deconv {

namespace {

// B_{2m} / (2m (2m - 1)) for m = 1..10.
constexpr std::array<double, 10> kStirlingCoefficients = {
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
};

constexpr double kStirlingRadius = 15.0;

}  // namespace

std::complex<double> log_gamma(std::complex<double> z) {
  if (!(z.real() > 0.0)) {
    throw std::domain_error("log_gamma: requires Re z > 0");
  }
  std::complex<double> shift{0.0, 0.0};
  while (std::abs(z) < kStirlingRadius) {
    shift += std::log(z);
    z += 1.0;
  }
  const std::complex<double> inv = 1.0 / z;
  const std::complex<double> inv2 = inv * inv;
  std::complex<double> series{0.0, 0.0};
  std::complex<double> power = inv;
  for (double c : kStirlingCoefficients) {
    series += c * power;
    power *= inv2;
  }
  const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
  return (z - 0.5) * std::log(z) - z + half_log_two_pi + series - shift;
}

std::complex<double> gamma_ratio(double a, double t) {
  return std::exp(log_gamma({a, t}) - log_gamma({a, 0.0}));
}

}  // namespace mellin_deconv
