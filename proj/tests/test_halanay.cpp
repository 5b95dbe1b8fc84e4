#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fbam/halanay.hpp"

using namespace fbam;

namespace {

HalanayProblem acceptance_problem() {
  HalanayProblem p;
  p.gamma_p = 0.9;
  p.r = 5.0;
  p.c = 1e-4;
  p.mu = 1.0;
  p.kernel = KernelSpec::exponential(1.0, 5.0);
  p.history = History::constant(1.0);
  return p;
}

std::vector<double> grid40(double t_end) {
  std::vector<double> g;
  for (int i = 1; i <= 40; ++i) g.push_back(i * t_end / 40.0);
  return g;
}

}  // namespace

TEST_CASE("closed-form constants at gamma = 1/2") {
  HalanayProblem p;
  p.gamma_p = 0.5;
  p.r = 1.0;
  p.c = 0.01;
  p.mu = 1.0;
  p.kernel = KernelSpec::exponential(1.0, 1.0);
  p.history = History::constant(1.0);
  HalanayConstants k = halanay_constants(p, grid40(10.0));
  // 1/(r mu^g) + 2^g Gamma(1-g) = 1 + sqrt(2 pi)
  CHECK(k.V == doctest::Approx(1.0 + std::sqrt(2.0 * M_PI)).epsilon(1e-13));
  // 1 + r Gamma(1-g) (2 mu)^g = same expression here
  CHECK(k.B == doctest::Approx(1.0 + std::sqrt(2.0 * M_PI)).epsilon(1e-13));
  // Gamma(3/2) Gamma(1/2) = pi/2
  CHECK(k.gg == doctest::Approx(M_PI / 2.0).epsilon(1e-13));
  CHECK(k.M > 0.0);
  CHECK(k.M_budget == doctest::Approx(1.0 - (1.0 + k.gg) * k.V * p.c).epsilon(1e-12));
  CHECK(k.W == doctest::Approx((1.0 + k.gg) / (1.0 - k.M)).epsilon(1e-12));
  CHECK(k.series_ratio == doctest::Approx(k.V * k.W * p.c).epsilon(1e-12));
}

TEST_CASE("per-interval claim holds on the acceptance problem") {
  SolverConfig cfg;
  cfg.step = 0.02;
  cfg.t_end = 10.0;
  HalanayReport rep = halanay_validate(acceptance_problem(), cfg);
  CHECK(rep.constants.gate);
  CHECK(rep.claim_holds);
  CHECK(rep.first_interval_holds);
  CHECK(rep.lhs.size() == rep.traj.rows());
  CHECK(rep.bound.size() == rep.traj.rows());
}

TEST_CASE("first interval reproduces the sharper constant") {
  SolverConfig cfg;
  cfg.step = 0.02;
  cfg.t_end = 10.0;
  HalanayProblem p = acceptance_problem();
  HalanayReport rep = halanay_validate(p, cfg);
  const auto& k = rep.constants;
  const double sharper = (3.0 + p.c * k.gg) * k.y0;
  for (size_t i = 1; i < rep.traj.rows(); ++i) {
    if (rep.traj.times[i] > p.mu) break;
    CHECK(rep.lhs[i] <= sharper);
  }
}

TEST_CASE("k = 1 partial sum matches the first-interval envelope") {
  SolverConfig cfg;
  cfg.step = 0.02;
  cfg.t_end = 10.0;
  HalanayReport rep = halanay_validate(acceptance_problem(), cfg);
  const auto& k = rep.constants;
  // on (0, mu] the claim bound is the l = 0..1 geometric partial sum
  const double partial = 3.0 * k.B * k.y0 * (1.0 + k.series_ratio);
  for (size_t i = 1; i < rep.traj.rows(); ++i) {
    if (rep.traj.times[i] > 1.0 + 1e-12) break;
    CHECK(rep.bound[i] == doctest::Approx(partial).epsilon(1e-12));
  }
}

TEST_CASE("gate fails when the neutral coefficient is too large") {
  HalanayProblem p = acceptance_problem();
  p.c = 0.5;  // (1+gg) V c well above 1
  HalanayConstants k = halanay_constants(p, grid40(10.0));
  CHECK_FALSE(k.gate);
}

TEST_CASE("validation rejects out-of-domain parameters") {
  HalanayProblem p = acceptance_problem();
  p.gamma_p = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = acceptance_problem();
  p.r = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = acceptance_problem();
  p.c = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = acceptance_problem();
  p.mu = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
