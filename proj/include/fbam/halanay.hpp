#pragma once

#include "fbam/kernels.hpp"
#include "fbam/model.hpp"
#include "fbam/solver.hpp"

// Numerical validation of the fractional Halanay-type inequality: the scalar
// neutral problem
//   D^gamma[y(t) - c y(t - mu)] = -r y(t) + \int_0^inf h(s) y(t-s) ds,
//   y = phi on (-inf, 0],
// inherits the decay envelope E_gamma(-r t^gamma) when the kernel-condition
// constant M (measured like Omega, with rate r and kernel h) satisfies
// M < 1 - [1 + Gamma(1+gamma)Gamma(1-gamma)] V c, with
// V = 1/(r mu^gamma) + 2^gamma Gamma(1-gamma).  The per-interval claim is
//   (1 - M) |y(t)| / E_gamma(-r t^gamma) <= 3 B y0 sum_{l=0}^{k} (V W c)^l
// for t in [(k-1)mu, k mu], W = (1+Gamma(1+gamma)Gamma(1-gamma))/(1-M),
// B = 1 + r Gamma(1-gamma) (2 mu)^gamma; on the first interval the sharper
// form (3 + c Gamma(1+gamma)Gamma(1-gamma)) y0 also holds.

namespace fbam {

struct HalanayProblem {
  double gamma_p = 0.9;  // Caputo order, in (0, 1)
  double r = 1.0;        // decay rate, positive
  double c = 0.0;        // neutral coefficient, in [0, 1)
  double mu = 1.0;       // neutral delay, positive
  KernelSpec kernel = KernelSpec::exponential(1.0, 1.0);
  History history = History::constant(0.0);  // phi, nonnegative

  void validate() const;
};

struct HalanayConstants {
  double V = 0.0;
  double B = 0.0;
  double gg = 0.0;          // Gamma(1+gamma) Gamma(1-gamma)
  double M = 0.0;           // measured kernel-condition constant
  double M_budget = 0.0;    // 1 - (1+gg) V c
  double W = 0.0;           // (1+gg)/(1-M)
  double series_ratio = 0.0;  // V W c; summability of the claim envelope
  double y0 = 0.0;          // history envelope amplitude
  bool gate = false;        // M < M_budget and (1+gg) V c < 1
};

// Constants and the measured M; the grid controls the M measurement.
HalanayConstants halanay_constants(const HalanayProblem& prob,
                                   const std::vector<double>& omega_grid);

struct HalanayReport {
  HalanayConstants constants;
  Trajectory traj;  // one column
  std::vector<double> lhs;        // (1-M) |y| / E_gamma(-r t^gamma)
  std::vector<double> bound;      // 3 B y0 partial geometric sums, per point
  bool claim_holds = false;       // lhs <= bound at every positive grid time
  bool first_interval_holds = false;  // lhs <= (3 + c gg) y0 on (0, mu]
};

HalanayReport halanay_validate(const HalanayProblem& prob,
                               const SolverConfig& cfg);

}  // namespace fbam
