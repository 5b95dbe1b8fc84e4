#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fbam/mittag_leffler.hpp"
#include "fbam/model.hpp"
#include "fbam/solver.hpp"

using namespace fbam;

namespace {

// D^delta [x - c x(t-mu)] = -lambda x, constant history.
class ScalarDecay : public NeutralSystem {
 public:
  ScalarDecay(double lambda, double c, double x0)
      : lambda_(lambda), c_(c), x0_(x0) {}
  int dim() const override { return 1; }
  double neutral_coeff(int) const override { return c_; }
  double history(int, double) const override { return x0_; }
  void rhs(const StateView&, long, const double* x_n,
           double* f) const override {
    f[0] = -lambda_ * x_n[0];
  }

 private:
  double lambda_, c_, x0_;
};

double sup_error_vs_ml(const Trajectory& traj, double delta, double lambda,
                       double x0) {
  double worst = 0.0;
  for (size_t i = 0; i < traj.rows(); ++i) {
    const double exact =
        x0 * ml_one(delta, -lambda * std::pow(traj.times[i], delta));
    worst = std::max(worst, std::abs(traj.state(i, 0) - exact));
  }
  return worst;
}

BamNetwork example_net() {
  BamNetwork net;
  net.n1 = net.n2 = 2;
  net.delta = 0.9;
  net.mu = 1.0;
  net.c = net.c_bar = 1e-4;
  net.a = {5.0, 7.0};
  net.a_bar = {6.0, 8.0};
  net.I = {1.0, 0.75};
  net.J = {0.5, 1.0};
  net.d = Tensor3(2, 2, 2);
  double dv[2][2][2] = {{{1.3, 0.5}, {0.75, 1.0}}, {{1.0, 0.25}, {0.5, 0.4}}};
  for (int q = 0; q < 2; ++q)
    for (int p = 0; p < 2; ++p)
      for (int s = 0; s < 2; ++s) net.d.at(q, p, s) = dv[q][p][s];
  net.d_bar = Tensor3(2, 2, 2);
  double db[2][2][2] = {{{0.6, 1.0}, {1.0, 1.4}}, {{0.5, 0.25}, {0.75, 1.25}}};
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q)
      for (int r = 0; r < 2; ++r) net.d_bar.at(p, q, r) = db[p][q][r];
  net.k = net.h = KernelFamily::uniform(KernelSpec::exponential(1.0, 5.0));
  net.k_bar = net.h_bar =
      KernelFamily::uniform(KernelSpec::exponential(1.0, 6.0));
  net.g = net.g_bar = Activation::make_tanh();
  net.phi = {History::constant(-0.5), History::constant(-1.0)};
  net.phi_bar = {History::constant(-0.75), History::constant(-1.5)};
  return net;
}

}  // namespace

TEST_CASE("scalar fractional decay matches the analytic solution") {
  ScalarDecay sys(1.0, 0.0, 1.0);
  SolverConfig cfg;
  cfg.step = 0.01;
  cfg.t_end = 5.0;
  Trajectory traj = integrate(sys, 0.9, 1.0, cfg);
  CHECK(sup_error_vs_ml(traj, 0.9, 1.0, 1.0) < 1e-3);
}

TEST_CASE("halving the step shrinks the error by at least 1.8x") {
  SolverConfig c1, c2;
  c1.step = 0.02;
  c2.step = 0.01;
  c1.t_end = c2.t_end = 5.0;
  ScalarDecay sys(1.0, 0.0, 1.0);
  double e1 = sup_error_vs_ml(integrate(sys, 0.9, 1.0, c1), 0.9, 1.0, 1.0);
  double e2 = sup_error_vs_ml(integrate(sys, 0.9, 1.0, c2), 0.9, 1.0, 1.0);
  CHECK(e1 / e2 >= 1.8);
}

TEST_CASE("delta = 1 reduces to the classical exponential") {
  ScalarDecay sys(1.0, 0.0, 1.0);
  SolverConfig cfg;
  cfg.step = 0.01;
  cfg.t_end = 10.0;
  Trajectory traj = integrate(sys, 1.0, 1.0, cfg);
  double worst = 0.0;
  for (size_t i = 0; i < traj.rows(); ++i)
    worst = std::max(worst,
                     std::abs(traj.state(i, 0) - std::exp(-traj.times[i])));
  CHECK(worst < 1e-4);
}

TEST_CASE("neutral combination is recovered exactly") {
  ScalarDecay sys(2.0, 0.3, 1.0);
  SolverConfig cfg;
  cfg.step = 0.05;
  cfg.t_end = 4.0;
  Trajectory traj = integrate(sys, 0.8, 1.0, cfg);
  const long lag = std::lround(1.0 / cfg.step);
  for (size_t i = 0; i < traj.rows(); ++i) {
    const double x_lag =
        (long)i >= lag ? traj.state(i - lag, 0) : 1.0;  // history is 1
    CHECK(traj.state(i, 0) == traj.z_state(i, 0) + 0.3 * x_lag);
  }
}

TEST_CASE("vanishing neutral coefficient is continuous") {
  SolverConfig cfg;
  cfg.step = 0.05;
  cfg.t_end = 3.0;
  ScalarDecay a(1.0, 0.0, 1.0), b(1.0, 1e-16, 1.0);
  Trajectory ta = integrate(a, 0.9, 1.0, cfg);
  Trajectory tb = integrate(b, 0.9, 1.0, cfg);
  for (size_t i = 0; i < ta.rows(); ++i)
    CHECK(std::abs(ta.state(i, 0) - tb.state(i, 0)) < 1e-12);
}

TEST_CASE("step must divide the neutral delay") {
  SolverConfig cfg;
  cfg.step = 0.03;
  cfg.t_end = 1.0;
  CHECK_THROWS_AS(cfg.validate(1.0), std::invalid_argument);
  cfg.step = 0.02;
  CHECK_NOTHROW(cfg.validate(1.0));
  cfg.t_end = -1.0;
  CHECK_THROWS_AS(cfg.validate(1.0), std::invalid_argument);
}

TEST_CASE("equilibrium-started network stays put") {
  BamNetwork net = example_net();
  Equilibrium eq = find_equilibrium(net);
  for (int p = 0; p < 2; ++p) net.phi[p] = History::constant(eq.x_star[p]);
  for (int q = 0; q < 2; ++q) net.phi_bar[q] = History::constant(eq.y_star[q]);
  net.convention = DelayConvention::InfiniteMemory;
  SolverConfig cfg;
  cfg.step = 0.02;
  cfg.t_end = 4.0;
  Trajectory traj = simulate(net, cfg);
  double drift = 0.0;
  for (size_t i = 0; i < traj.rows(); ++i) {
    for (int p = 0; p < 2; ++p)
      drift = std::max(drift, std::abs(traj.state(i, p) - eq.x_star[p]));
    for (int q = 0; q < 2; ++q)
      drift = std::max(drift, std::abs(traj.state(i, 2 + q) - eq.y_star[q]));
  }
  CHECK(drift < 1e-9);
}

TEST_CASE("discrete fractional-derivative residual shrinks with the step") {
  BamNetwork net = example_net();
  SolverConfig coarse, fine;
  coarse.step = 0.05;
  fine.step = 0.0125;
  coarse.t_end = fine.t_end = 2.0;
  Trajectory tc = simulate(net, coarse);
  Trajectory tf = simulate(net, fine);
  // residual at t = 1.0
  double rc = caputo_residual(tc, net, (size_t)std::lround(1.0 / coarse.step));
  double rf = caputo_residual(tf, net, (size_t)std::lround(1.0 / fine.step));
  CHECK(rf < rc);
  CHECK(rf < 0.05);
}

TEST_CASE("windowed memory stays close to full memory") {
  BamNetwork net = example_net();
  SolverConfig full, windowed;
  full.step = windowed.step = 0.02;
  full.t_end = windowed.t_end = 6.0;
  windowed.memory = SolverConfig::Memory::Windowed;
  windowed.window = 4.0;
  Trajectory tf = simulate(net, full);
  Trajectory tw = simulate(net, windowed);
  double diff = 0.0;
  for (size_t i = 0; i < tf.rows(); ++i)
    for (int j = 0; j < 4; ++j)
      diff = std::max(diff, std::abs(tf.state(i, j) - tw.state(i, j)));
  CHECK(diff < 1e-8);
}

TEST_CASE("trajectory CSV layout") {
  ScalarDecay sys(1.0, 0.0, 1.0);
  SolverConfig cfg;
  cfg.step = 0.5;
  cfg.t_end = 1.0;
  Trajectory traj = integrate(sys, 0.9, 1.0, cfg);
  const char* path = "solver_csv_test.csv";
  write_trajectory_csv(traj, {"x_1"}, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x_1");
  std::getline(in, line);
  CHECK(line.substr(0, 2) == "0,");
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == (int)traj.rows());
  in.close();
  std::remove(path);
}

TEST_CASE("blow-up raises a numeric error") {
  // strongly anti-damped scalar problem
  class Explode : public NeutralSystem {
   public:
    int dim() const override { return 1; }
    double neutral_coeff(int) const override { return 0.0; }
    double history(int, double) const override { return 1.0; }
    void rhs(const StateView&, long, const double* x,
             double* f) const override {
      f[0] = 50.0 * x[0] * x[0] + 10.0;
    }
  } sys;
  SolverConfig cfg;
  cfg.step = 0.1;
  cfg.t_end = 50.0;
  CHECK_THROWS_AS(integrate(sys, 0.9, 1.0, cfg), numeric_blowup_error);
}
