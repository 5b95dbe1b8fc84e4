#include "fbam/halanay.hpp"

#include <algorithm>
#include <cmath>

#include "fbam/mittag_leffler.hpp"
#include "fbam/special.hpp"

namespace fbam {

void HalanayProblem::validate() const {
  if (!(gamma_p > 0.0) || !(gamma_p < 1.0))
    throw std::invalid_argument("HalanayProblem: gamma must lie in (0, 1)");
  if (!(r > 0.0)) throw std::invalid_argument("HalanayProblem: r must be positive");
  if (!(c >= 0.0) || c >= 1.0)
    throw std::invalid_argument("HalanayProblem: c must lie in [0, 1)");
  if (!(mu > 0.0)) throw std::invalid_argument("HalanayProblem: mu must be positive");
  kernel.validate();
}

namespace {

// dim-1 neutral system realizing the Halanay dynamics with equality
class HalanaySystem : public NeutralSystem {
 public:
  explicit HalanaySystem(const HalanayProblem& p) : p_(p) {}
  int dim() const override { return 1; }
  double neutral_coeff(int) const override { return p_.c; }
  double history(int, double t) const override { return p_.history(t); }

  void rhs(const StateView& view, long n, const double* x_n,
           double* f_out) const override {
    const double h = view.step;
    double conv = 0.0;
    if (n > 0) {
      double s = 0.5 * (p_.kernel.eval(0.0) * x_n[0] +
                        p_.kernel.eval(n * h) * view(0, 0));
      for (long j = 1; j < n; ++j) s += p_.kernel.eval((n - j) * h) * view(0, j);
      conv = s * h;
    }
    // pre-history part of the distributed term
    const double t0 = n * h;
    const double extent = p_.history.extent();
    if (extent > 0.0) {
      const int M = 256;
      const double ds = extent / M;
      double s = 0.5 * (p_.kernel.eval(t0) * p_.history(0.0) +
                        p_.kernel.eval(t0 + extent) * p_.history(-extent));
      for (int i = 1; i < M; ++i)
        s += p_.kernel.eval(t0 + i * ds) * p_.history(-(double)i * ds);
      conv += s * ds;
      conv += p_.history.pre_value() * tail_mass(p_.kernel, t0 + extent);
    } else {
      conv += p_.history.pre_value() * tail_mass(p_.kernel, t0);
    }
    f_out[0] = -p_.r * x_n[0] + conv;
  }

 private:
  const HalanayProblem& p_;
};

}  // namespace

HalanayConstants halanay_constants(const HalanayProblem& prob,
                                   const std::vector<double>& omega_grid) {
  prob.validate();
  HalanayConstants k;
  const double g = prob.gamma_p;
  k.gg = gamma_fn(1.0 + g) * gamma_fn(1.0 - g);
  k.V = 1.0 / (prob.r * std::pow(prob.mu, g)) +
        std::pow(2.0, g) * gamma_fn(1.0 - g);
  k.B = 1.0 + prob.r * gamma_fn(1.0 - g) * std::pow(2.0 * prob.mu, g);

  KernelEnvelope env({{{1.0}, {prob.kernel}}});
  k.M = check_condition_k1(env, prob.r, g, omega_grid).omega_star;

  k.M_budget = 1.0 - (1.0 + k.gg) * k.V * prob.c;
  k.W = (1.0 + k.gg) / (1.0 - k.M);
  k.series_ratio = k.V * k.W * prob.c;
  k.gate = (1.0 + k.gg) * k.V * prob.c < 1.0 && k.M < k.M_budget;

  // smallest amplitude with |phi(s)| <= y0 E_gamma(-r (s+mu)^gamma) on [-mu,0]
  const int grid = 256;
  double y0 = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double s = -prob.mu + prob.mu * (double)i / grid;
    const double envl = ml_one(g, -prob.r * std::pow(s + prob.mu, g));
    y0 = std::max(y0, std::abs(prob.history(s)) / envl);
  }
  k.y0 = y0;
  return k;
}

HalanayReport halanay_validate(const HalanayProblem& prob,
                               const SolverConfig& cfg) {
  prob.validate();

  HalanayReport rep;
  HalanaySystem sys(prob);
  rep.traj = integrate(sys, prob.gamma_p, prob.mu, cfg);

  // measure M on a grid matching the trajectory horizon
  std::vector<double> omega_grid;
  for (int i = 1; i <= 40; ++i)
    omega_grid.push_back(cfg.t_end * (double)i / 40.0);
  rep.constants = halanay_constants(prob, omega_grid);
  const HalanayConstants& k = rep.constants;

  const size_t n = rep.traj.rows();
  rep.lhs.resize(n);
  rep.bound.resize(n);
  rep.claim_holds = true;
  rep.first_interval_holds = true;
  for (size_t i = 0; i < n; ++i) {
    const double t = rep.traj.times[i];
    const double env =
        i == 0 ? 1.0 : ml_one(prob.gamma_p, -prob.r * std::pow(t, prob.gamma_p));
    rep.lhs[i] = (1.0 - k.M) * std::abs(rep.traj.state(i, 0)) / env;
    // partial geometric sum for the interval [(kk-1) mu, kk mu]
    const int kk = std::max(1, (int)std::ceil(t / prob.mu - 1e-12));
    double sum = 0.0, term = 1.0;
    for (int l = 0; l <= kk; ++l) {
      sum += term;
      term *= k.series_ratio;
    }
    rep.bound[i] = 3.0 * k.B * k.y0 * sum;
    if (i > 0) {
      if (rep.lhs[i] > rep.bound[i]) rep.claim_holds = false;
      if (t <= prob.mu + 1e-12 &&
          rep.lhs[i] > (3.0 + prob.c * k.gg) * k.y0)
        rep.first_interval_holds = false;
    }
  }
  return rep;
}

}  // namespace fbam
