#pragma once

#include "fbam/model.hpp"
#include "fbam/solver.hpp"
#include "fbam/stability.hpp"

// Drive/response synchronization.  The response is a copy of the network
// with its own initial data plus linear feedback -beta (response - drive) per
// layer; drive and response are integrated jointly so both see the same time
// grid and memory treatment.

namespace fbam {

struct SyncConfig {
  double beta = 1.0;      // layer-1 feedback gain, >= 0
  double beta_bar = 1.0;  // layer-2 feedback gain, >= 0
  std::vector<History> response_phi, response_phi_bar;  // sizes n1 / n2
};

struct SyncRun {
  Trajectory joint;  // 2*(n1+n2) columns: drive block then response block
  int dim = 0;       // n1 + n2

  double drive(size_t i, int j) const { return joint.state(i, j); }
  double response(size_t i, int j) const { return joint.state(i, dim + j); }
  double error(size_t i, int j) const { return response(i, j) - drive(i, j); }
  double max_abs_error(size_t i) const;

  double initial_error = 0.0;  // max |e| at t = 0
  double final_error = 0.0;    // max |e| at t_end
  double residual = 0.0;       // error-system defect at the final grid point
};

SyncRun synchronize(const BamNetwork& net, const SyncConfig& sc,
                    const SolverConfig& cfg);

// Certificate for the error system: the feedback gains strengthen the
// self-decay rates (a_p + beta, a_bar_q + beta_bar); bounded-activation
// arithmetic applies since activation differences are Lipschitz-bounded.
StabilityCertificate sync_certificate(const BamNetwork& net, double beta,
                                      double beta_bar, double omega_measured);

}  // namespace fbam
