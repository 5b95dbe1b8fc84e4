#include "fbam/sync.hpp"

#include <algorithm>
#include <cmath>

#include "fbam/special.hpp"

namespace fbam {

namespace {

class JointSystem : public NeutralSystem {
 public:
  JointSystem(const BamNetwork& net, const SyncConfig& sc)
      : eval_(net), sc_(sc), m_(net.n1 + net.n2) {
    if ((int)sc.response_phi.size() != net.n1 ||
        (int)sc.response_phi_bar.size() != net.n2)
      throw std::invalid_argument(
          "synchronize: response history sizes must match the layers");
    if (!(sc.beta >= 0.0) || !(sc.beta_bar >= 0.0))
      throw std::invalid_argument("synchronize: gains must be >= 0");
  }

  int dim() const override { return 2 * m_; }

  double neutral_coeff(int i) const override {
    const auto& net = eval_.net();
    return (i % m_) < net.n1 ? net.c : net.c_bar;
  }

  double history(int i, double t) const override {
    const auto& net = eval_.net();
    if (i < m_)
      return i < net.n1 ? net.phi[i](t) : net.phi_bar[i - net.n1](t);
    const int j = i - m_;
    return j < net.n1 ? sc_.response_phi[j](t)
                      : sc_.response_phi_bar[j - net.n1](t);
  }

  double history_extent(int i) const override {
    const auto& net = eval_.net();
    if (i < m_)
      return i < net.n1 ? net.phi[i].extent() : net.phi_bar[i - net.n1].extent();
    const int j = i - m_;
    return j < net.n1 ? sc_.response_phi[j].extent()
                      : sc_.response_phi_bar[j - net.n1].extent();
  }

  void rhs(const StateView& view, long n, const double* x_n,
           double* f_out) const override {
    StateView drive = view, resp = view;
    resp.offset = view.offset + m_;
    eval_.eval(drive, n, x_n, f_out);
    eval_.eval(resp, n, x_n + m_, f_out + m_);
    const int n1 = eval_.net().n1;
    for (int i = 0; i < m_; ++i) {
      const double gain = i < n1 ? sc_.beta : sc_.beta_bar;
      f_out[m_ + i] -= gain * (x_n[m_ + i] - x_n[i]);
    }
  }

 private:
  BamEvaluator eval_;
  const SyncConfig& sc_;
  int m_;
};

}  // namespace

double SyncRun::max_abs_error(size_t i) const {
  double worst = 0.0;
  for (int j = 0; j < dim; ++j) worst = std::max(worst, std::abs(error(i, j)));
  return worst;
}

SyncRun synchronize(const BamNetwork& net, const SyncConfig& sc,
                    const SolverConfig& cfg) {
  net.validate();
  JointSystem sys(net, sc);

  SyncRun run;
  run.dim = net.n1 + net.n2;
  run.joint = integrate(sys, net.delta, net.mu, cfg);
  run.initial_error = run.max_abs_error(0);
  run.final_error = run.max_abs_error(run.joint.rows() - 1);

  // defect of the error system at the last grid point: the L1 form of the
  // Caputo derivative of e - c e(t-mu) against the difference of the two
  // right-hand sides (including the feedback term)
  const size_t idx = run.joint.rows() - 1;
  const int m = run.dim;
  StateView view{run.joint.states.data(), 2 * m, 0, &sys, run.joint.step};
  std::vector<double> f(2 * m), xn(2 * m);
  for (int i = 0; i < 2 * m; ++i) xn[i] = run.joint.state(idx, i);
  sys.rhs(view, (long)idx, xn.data(), f.data());

  const double delta = net.delta;
  const double scale = std::pow(run.joint.step, -delta) * rgamma(2.0 - delta);
  double worst = 0.0;
  for (int i = 0; i < m; ++i) {
    double d = 0.0;
    for (size_t j = 0; j < idx; ++j) {
      const double w = std::pow((double)(j + 1), 1.0 - delta) -
                       std::pow((double)j, 1.0 - delta);
      const double ze_hi = run.joint.z_state(idx - j, m + i) -
                           run.joint.z_state(idx - j, i);
      const double ze_lo = run.joint.z_state(idx - j - 1, m + i) -
                           run.joint.z_state(idx - j - 1, i);
      d += w * (ze_hi - ze_lo);
    }
    worst = std::max(worst, std::abs(scale * d - (f[m + i] - f[i])));
  }
  run.residual = worst;
  return run;
}

StabilityCertificate sync_certificate(const BamNetwork& net, double beta,
                                      double beta_bar, double omega_measured) {
  if (!(beta >= 0.0) || !(beta_bar >= 0.0))
    throw std::invalid_argument("sync_certificate: gains must be >= 0");
  BamNetwork aug = net;
  for (double& v : aug.a) v += beta;
  for (double& v : aug.a_bar) v += beta_bar;
  return certify_bounded(aug, omega_measured);
}

}  // namespace fbam
