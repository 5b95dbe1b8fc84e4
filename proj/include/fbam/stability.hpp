#pragma once

#include <string>
#include <vector>

#include "fbam/kernels.hpp"
#include "fbam/model.hpp"
#include "fbam/solver.hpp"

// Decay certificates.  Both variants consume the measured kernel-condition
// constant Omega (from check_condition_k1) and return every intermediate
// quantity so reports and tests can audit the arithmetic.

namespace fbam {

struct CertificateGate {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;  // gate passes when value < threshold
  bool pass = false;
};

struct StabilityCertificate {
  bool certified = false;
  std::string verdict;  // bounded-certified | unbounded-certified | uncertified
  ActivationMode mode = ActivationMode::Bounded;

  // shared quantities
  double delta = 0.0;
  double a = 0.0;       // layer-1 minimum decay rate
  double a_bar = 0.0;   // layer-2 minimum decay rate
  double xi = 0.0;      // min of all self-decay rates
  double a_star = 0.0;  // max of the two per-layer minima
  double c_star = 0.0;  // max neutral coefficient
  double gg = 0.0;      // Gamma(1+delta) * Gamma(1-delta)
  double F = 0.0;       // 1/(xi mu^delta) + 2^delta Gamma(1-delta)
  double F_exact = 0.0; // Gamma(1+delta) * F: the sharp envelope-quotient
                        // bound; F itself is the conservative variant used
                        // in the gates
  double B = 0.0;       // 1 + xi Gamma(1-delta) (2 mu)^delta
  double omega_measured = 0.0;

  // bounded-activation quantities
  double g3 = 0.0;           // [1+gg] F (a* c* / xi)
  double omega_budget = 0.0; // 1 - g3
  double W = 0.0;            // (1+gg)/(1-Omega)
  double W_star = 0.0;       // (3 + c* a* gg / xi)/(1-Omega)
  double series_ratio = 0.0; // F W (a* c* / xi), summability of the envelope

  // unbounded-activation quantities
  double A = 0.0, U = 0.0, B_star = 0.0;
  double theta = 0.0, theta_bar = 0.0, nu = 0.0, nu_bar = 0.0;
  double pi_const = 0.0, kappa = 0.0;
  double h_star_mass = 0.0;
  double omega_budget_unbounded = 0.0;  // 1/(4 pi)
  double c_star_threshold = 0.0;  // min{1, 1/(2 B* (1+U))}
  double eta = 0.0;               // largest power of 1/2 passing the eta gates
  double lambda_ratio = 0.0;      // 2 B* c* (1+U)
  double lambda_sum = 0.0;        // geometric sum of lambda_ratio
  double v0 = 0.0;                // history envelope amplitude
  bool v0_small = false;          // V0 * lambda_sum < eta/4

  std::vector<CertificateGate> gates;
};

// Bounded activations (both layers need a finite bound).  Gates: the
// contraction constant g3 < 1, Omega below its budget 1 - g3, the envelope
// series ratio < 1 and c* < 1.
StabilityCertificate certify_bounded(const BamNetwork& net,
                                     double omega_measured);

// Unbounded activations (Lipschitz only).  Gates: Omega pi < 1/4,
// c* < min{1, 1/(2B*(1+U))}, the geometric ratio 2B*c*(1+U) < 1, eta with
// Omega eta kappa h* < 1/4, the product Omega (pi + eta kappa h*) < 1/2, and
// the local-data gate V0 lambda_sum < eta/4.  The conclusion is local, so
// the verdict includes the V0 gate; v0_small mirrors it for reporting.
StabilityCertificate certify_unbounded(const BamNetwork& net,
                                       const Equilibrium& eq,
                                       double omega_measured);

// Measures V(t)/E_delta(-xi t^delta) along a trajectory, where V sums the
// componentwise distances to the equilibrium per layer and takes the larger
// layer.  pass requires a finite maximum and a non-increasing trend over the
// final quartile.
struct EnvelopeReport {
  double c_fit = 0.0;      // max ratio = smallest valid envelope constant
  double max_ratio = 0.0;
  double final_quartile_slope = 0.0;  // least-squares, per unit time
  bool pass = false;
  std::vector<double> times, ratios;
};

EnvelopeReport check_envelope(const Trajectory& traj, const Equilibrium& eq,
                              double xi, double delta);

// Flat "key = value" report, deterministic ordering, 17 significant digits.
void write_certificate_report(const StabilityCertificate& cert,
                              const std::string& path);

}  // namespace fbam
