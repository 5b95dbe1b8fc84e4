#pragma once

#include <stdexcept>

// One- and two-parameter Mittag-Leffler functions E_delta(z) and
// E_{delta,rho}(z) on the real line, for 0 < delta <= 1, together with the
// algebraic enclosure bounds and the fractional-integral shift identity that
// the certificate machinery is validated against.

namespace fbam {

// Thrown when an argument is outside the supported evaluation range (as
// opposed to being structurally invalid, which raises std::invalid_argument).
class accuracy_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// E_{delta,rho}(z).  Requires delta in (0,1], rho > 0, z finite.
// Negative arguments of any magnitude are supported; positive arguments up to
// the point where the result overflows (guaranteed through z = 10).
double ml_two(double delta, double rho, double z);

// E_delta(z) = E_{delta,1}(z); same code path as ml_two.
double ml_one(double delta, double z);

struct MlBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Two-sided algebraic enclosure of E_delta(-c t^delta) for 0 < delta < 1,
// c > 0, t >= 0:
//   1/(1 + c Gamma(1-delta) t^delta) <= E_delta(-c t^delta)
//                                    <= 1/(1 + c t^delta / Gamma(1+delta)).
MlBounds mainardi_enclosure(double delta, double c, double t);

// Absolute residual of the Riemann-Liouville shift identity
//   I^sigma [ t^{gamma-1} E_{beta,gamma}(c t^beta) ](x)
//     = x^{sigma+gamma-1} E_{beta,sigma+gamma}(c x^beta),
// with the left side evaluated by adaptive quadrature.  Used as a
// cross-validation of the Mittag-Leffler evaluator against an independent
// integral formulation.  Requires sigma, gamma, beta in (0,1], x > 0.
double frac_integral_identity_residual(double sigma, double gamma_p,
                                       double beta_p, double c, double x);

}  // namespace fbam
