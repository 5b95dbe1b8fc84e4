#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

// Gamma-family helpers used throughout the library.  Everything here is
// header-only: these are hot inner-loop functions for the Mittag-Leffler
// evaluator and the fractional solver weights.

namespace fbam {

namespace detail {

// Lanczos approximation, g = 7, 9 coefficients (Godfrey's set).
// Good to ~1e-15 relative accuracy in double precision on the positive axis.
inline constexpr double kLanczosG = 7.0;
inline constexpr double kLanczos[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

// sin(pi*x) with argument reduction done in exact arithmetic so that the
// reflection formula stays accurate for large |x|.
inline double sin_pi(double x) {
  double r = std::fmod(x, 2.0);
  if (r < -1.0) r += 2.0;
  if (r > 1.0) r -= 2.0;
  // r in [-1,1]; fold into [-0.5,0.5] where sin(pi*r) is well conditioned
  if (r > 0.5) r = 1.0 - r;
  if (r < -0.5) r = -1.0 - r;
  return std::sin(M_PI * r);
}

inline double cos_pi(double x) { return sin_pi(x + 0.5); }

inline double lanczos_positive(double x) {
  // valid for x >= 0.5
  const double z = x - 1.0;
  double s = kLanczos[0];
  for (int i = 1; i < 9; ++i) s += kLanczos[i] / (z + i);
  const double t = z + kLanczosG + 0.5;
  return std::sqrt(2.0 * M_PI) * std::pow(t, z + 0.5) * std::exp(-t) * s;
}

}  // namespace detail

// Gamma function on the real line.  Poles at non-positive integers return
// +/-inf with the sign of the approach from the right, matching std::tgamma.
inline double gamma_fn(double x) {
  if (std::isnan(x)) return x;
  if (x >= 0.5) return detail::lanczos_positive(x);
  // reflection: Gamma(x) = pi / (sin(pi x) Gamma(1-x))
  const double s = detail::sin_pi(x);
  if (s == 0.0) {
    // pole; sign alternates between consecutive integers
    return std::numeric_limits<double>::infinity();
  }
  return M_PI / (s * detail::lanczos_positive(1.0 - x));
}

// Reciprocal gamma 1/Gamma(x).  Entire function: exactly zero at the poles of
// Gamma, which the asymptotic Mittag-Leffler expansion relies on.
inline double rgamma(double x) {
  if (std::isnan(x)) return x;
  if (x >= 0.5) return 1.0 / detail::lanczos_positive(x);
  const double s = detail::sin_pi(x);
  if (s == 0.0) return 0.0;
  return s * detail::lanczos_positive(1.0 - x) / M_PI;
}

inline double log_gamma(double x) {
  if (x <= 0.0) throw std::domain_error("log_gamma: requires x > 0");
  if (x >= 0.5) {
    const double z = x - 1.0;
    double s = detail::kLanczos[0];
    for (int i = 1; i < 9; ++i) s += detail::kLanczos[i] / (z + i);
    const double t = z + detail::kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * M_PI) + (z + 0.5) * std::log(t) - t + std::log(s);
  }
  return std::log(M_PI / detail::sin_pi(x)) - log_gamma(1.0 - x);
}

}  // namespace fbam
