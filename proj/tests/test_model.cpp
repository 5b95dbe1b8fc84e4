#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fbam/model.hpp"

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

}  // namespace

TEST_CASE("history: constants, samples, shift") {
  History c = History::constant(2.0);
  CHECK(c(0.0) == 2.0);
  CHECK(c(-100.0) == 2.0);
  CHECK(c.sup_abs() == 2.0);
  CHECK(c.extent() == 0.0);

  History s = History::sampled({-1.0, -0.5, 0.0}, {1.0, 3.0, 2.0}, 0.5);
  CHECK(s(0.0) == 2.0);
  CHECK(s(-0.75) == doctest::Approx(2.0).epsilon(1e-15));  // interpolation
  CHECK(s(-5.0) == 0.5);  // pre-sample constant
  CHECK(s.sup_abs() == 3.0);
  CHECK(s.extent() == 1.0);

  History sh = s.shifted(-2.0);
  CHECK(sh(0.0) == 0.0);
  CHECK(sh(-5.0) == -1.5);
}

TEST_CASE("decoupled linear network has the explicit equilibrium") {
  BamNetwork net;
  net.n1 = net.n2 = 1;
  net.delta = 0.5;
  net.a = {2.0};
  net.a_bar = {4.0};
  net.I = {3.0};
  net.J = {2.0};
  net.d = Tensor3(1, 1, 1, 0.0);
  net.d_bar = Tensor3(1, 1, 1, 0.0);
  net.phi = {History::constant(0.0)};
  net.phi_bar = {History::constant(0.0)};
  Equilibrium eq = find_equilibrium(net);
  CHECK(eq.x_star[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(eq.y_star[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(eq.residual < 1e-11);
}

TEST_CASE("example network equilibrium matches the reference fixed point") {
  Equilibrium eq = find_equilibrium(example_net());
  // reference values from a 40-digit offline solve of the fixed-point system
  CHECK(eq.x_star[0] == doctest::Approx(0.20022824761570009).epsilon(1e-10));
  CHECK(eq.x_star[1] == doctest::Approx(0.10729735353569708).epsilon(1e-10));
  CHECK(eq.y_star[0] == doctest::Approx(0.08360168064010922).epsilon(1e-10));
  CHECK(eq.y_star[1] == doctest::Approx(0.12534282524173200).epsilon(1e-10));
}

TEST_CASE("asinh variant equilibrium matches the reference fixed point") {
  BamNetwork net = example_net();
  net.g = net.g_bar = Activation::make_asinh();
  Equilibrium eq = find_equilibrium(net);
  CHECK(eq.x_star[0] == doctest::Approx(0.20022906565265992).epsilon(1e-10));
  CHECK(eq.x_star[1] == doctest::Approx(0.10729795601627449).epsilon(1e-10));
  CHECK(eq.y_star[0] == doctest::Approx(0.083604449424005529).epsilon(1e-10));
  CHECK(eq.y_star[1] == doctest::Approx(0.12534619236604722).epsilon(1e-10));
}

TEST_CASE("origin shift maps the equilibrium to zero") {
  BamNetwork net = example_net();
  Equilibrium eq = find_equilibrium(net);
  BamNetwork shifted = shift_to_origin(net, eq);
  Equilibrium eq0 = find_equilibrium(shifted);
  for (double v : eq0.x_star) CHECK(std::abs(v) < 1e-10);
  for (double v : eq0.y_star) CHECK(std::abs(v) < 1e-10);
  // histories moved with the coordinates
  CHECK(shifted.phi[0](0.0) ==
        doctest::Approx(-0.5 - eq.x_star[0]).epsilon(1e-12));
  CHECK(shifted.phi_bar[1](0.0) ==
        doctest::Approx(-1.5 - eq.y_star[1]).epsilon(1e-12));
}

TEST_CASE("network validation reports the offending field") {
  BamNetwork net = example_net();
  net.a[1] = -7.0;
  CHECK_THROWS_WITH_AS(net.validate(),
                       doctest::Contains("a must be positive"),
                       std::invalid_argument);
  net = example_net();
  net.c = 1.0;
  CHECK_THROWS_AS(net.validate(), std::invalid_argument);
  net = example_net();
  net.mu = 0.0;
  CHECK_THROWS_AS(net.validate(), std::invalid_argument);
  net = example_net();
  net.delta = 1.5;
  CHECK_THROWS_AS(net.validate(), std::invalid_argument);
}
