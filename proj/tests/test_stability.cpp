#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "fbam/kernels.hpp"
#include "fbam/model.hpp"
#include "fbam/solver.hpp"
#include "fbam/stability.hpp"

using namespace fbam;

namespace {

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

double measured_omega(const BamNetwork& net, ActivationMode mode) {
  AggregateKernel agg = aggregate_kernel(net, mode);
  std::vector<double> grid;
  for (int i = 1; i <= 40; ++i) grid.push_back(i * 0.25);
  return check_condition_k1(agg.K, 5.0, net.delta, grid).omega_star;
}

}  // namespace

TEST_CASE("bounded certificate reproduces the reference constants") {
  BamNetwork net = example_net();
  StabilityCertificate cert = certify_bounded(net, measured_omega(net, ActivationMode::Bounded));
  CHECK(cert.xi == 5.0);
  CHECK(cert.a_star == 6.0);  // max over the two per-layer minima
  CHECK(cert.c_star == 1e-4);
  // frozen 40-digit evaluations of the certificate arithmetic
  CHECK(cert.F == doctest::Approx(17.952833096194670).epsilon(1e-12));
  CHECK(cert.gg == doctest::Approx(9.1497666461674677).epsilon(1e-12));
  CHECK(cert.g3 == doctest::Approx(0.021866047987676171).epsilon(1e-12));
  CHECK(cert.omega_budget ==
        doctest::Approx(1.0 - 0.021866047987676171).epsilon(1e-12));
  CHECK(cert.certified);
  CHECK(cert.verdict == "bounded-certified");
}

TEST_CASE("no coupling means no contraction pressure") {
  BamNetwork net = example_net();
  net.c = net.c_bar = 0.0;
  StabilityCertificate cert = certify_bounded(net, 0.1);
  CHECK(cert.g3 == 0.0);
  CHECK(cert.omega_budget == 1.0);
  CHECK(cert.certified);
}

TEST_CASE("large neutral coefficient breaks the contraction gate") {
  BamNetwork net = example_net();
  net.c = net.c_bar = 0.5;
  StabilityCertificate cert = certify_bounded(net, measured_omega(net, ActivationMode::Bounded));
  CHECK(cert.g3 == doctest::Approx(109.33023993838085).epsilon(1e-10));
  CHECK_FALSE(cert.certified);
  CHECK(cert.verdict == "uncertified");
}

TEST_CASE("xi and a_star respect layer structure, not ordering") {
  BamNetwork net = example_net();
  std::swap(net.a[0], net.a[1]);  // permuting within a layer changes nothing
  StabilityCertificate cert = certify_bounded(net, 0.1);
  CHECK(cert.xi == 5.0);
  CHECK(cert.a_star == 6.0);
}

TEST_CASE("unbounded certificate reproduces the reference constants") {
  BamNetwork net = example_net();
  net.g = net.g_bar = Activation::make_asinh();
  Equilibrium eq = find_equilibrium(net);
  const double omega = measured_omega(net, ActivationMode::Unbounded);
  StabilityCertificate cert = certify_unbounded(net, eq, omega);
  CHECK(cert.B == doctest::Approx(89.764165480973351).epsilon(1e-12));
  CHECK(cert.U == doctest::Approx(25.619346609268909).epsilon(1e-12));
  CHECK(cert.c_star_threshold ==
        doctest::Approx(0.00020925199895474275).epsilon(1e-12));
  CHECK(cert.theta == doctest::Approx(0.22609787282029837).epsilon(1e-9));
  CHECK(cert.theta_bar == doctest::Approx(0.34578919552110008).epsilon(1e-9));
  CHECK(cert.pi_const == doctest::Approx(0.34578919552110008).epsilon(1e-9));
  CHECK(cert.c_star < cert.c_star_threshold);
  CHECK(omega * cert.pi_const < 0.25);
}

TEST_CASE("gate table is consistent with the verdict") {
  BamNetwork net = example_net();
  StabilityCertificate cert = certify_bounded(net, measured_omega(net, ActivationMode::Bounded));
  bool all = true;
  for (const auto& g : cert.gates) {
    CHECK(g.pass == (g.value < g.threshold));
    all = all && g.pass;
  }
  CHECK(all == cert.certified);
}

TEST_CASE("bounded mode requires activation bounds") {
  BamNetwork net = example_net();
  net.g = Activation::make_asinh();
  CHECK_THROWS_AS(certify_bounded(net, 0.1), std::invalid_argument);
}

TEST_CASE("envelope check on a scalar analytic decay") {
  // x(t) = x* + (x0 - x*) E_delta(-a t^delta) solves the decoupled problem
  BamNetwork net;
  net.n1 = net.n2 = 1;
  net.delta = 0.9;
  net.a = {2.0};
  net.a_bar = {2.0};
  net.I = {1.0};
  net.J = {1.0};
  net.d = Tensor3(1, 1, 1, 0.0);
  net.d_bar = Tensor3(1, 1, 1, 0.0);
  net.phi = {History::constant(2.0)};
  net.phi_bar = {History::constant(0.0)};
  SolverConfig cfg;
  cfg.step = 0.01;
  cfg.t_end = 6.0;
  Trajectory traj = simulate(net, cfg);
  Equilibrium eq = find_equilibrium(net);
  EnvelopeReport rep = check_envelope(traj, eq, 2.0, 0.9);
  CHECK(rep.pass);
  // |x0 - x*| + |y0 - y*| = 1.5 + 0.5: the layer-wise V(0)
  CHECK(rep.max_ratio == doctest::Approx(1.5).epsilon(0.02));
}

TEST_CASE("certificate report is flat, ordered, and ends with the verdict") {
  BamNetwork net = example_net();
  StabilityCertificate cert = certify_bounded(net, 0.3);
  const char* path = "stability_report_test.txt";
  write_certificate_report(cert, path);
  std::ifstream in(path);
  std::string line, last, prev;
  bool saw_g3 = false;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      CHECK(line.find(" = ") != std::string::npos);
      prev = last;
      last = line;
    }
    if (line.rfind("g3 = ", 0) == 0) saw_g3 = true;
  }
  CHECK(saw_g3);
  CHECK(prev.rfind("certified = ", 0) == 0);
  CHECK(last.rfind("verdict = ", 0) == 0);
  in.close();
  std::remove(path);
}
