#pragma once

#include <complex>

namespace mellin_deconv {

/// Principal-ish complex log-gamma for Re z > 0.
///
/// Stirling's series after shifting z upward until |z| >= 15. The imaginary
/// part may differ from the principal branch by a multiple of 2*pi, which
/// is irrelevant once exponentiated.
std::complex<double> log_gamma(std::complex<double> z);

/// Gamma(a + i t) / Gamma(a) for real a > 0.
std::complex<double> gamma_ratio(double a, double t);

}  // namespace mellin_deconv
