#pragma once

#include <cstdint>
#include <random>

namespace mellin_deconv {

/// Every stochastic routine draws from an explicit engine of this type.
/// mt19937_64 output is fixed by the standard, and all variates below are
/// built from raw engine output by code compiled into this library, so
/// streams are identical across platforms.
using Rng = std::mt19937_64;

/// Stream seed for replication `index` under `master`:
/// splitmix64(splitmix64(master) ^ (index + 1) * 0x9e3779b97f4a7c15).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

inline Rng make_stream(std::uint64_t master, std::uint64_t index) {
  return Rng{derive_seed(master, index)};
}

/// Uniform on the open interval (0, 1), 53-bit resolution.
double uniform_open(Rng& rng);

/// Ziggurat standard normal (Boost.Random).
double standard_normal(Rng& rng);

/// Gamma(shape, rate) via Marsaglia-Tsang; shapes below one are boosted.
double gamma_variate(Rng& rng, double shape, double rate);

double beta_variate(Rng& rng, double a, double b);

}  // namespace mellin_deconv
