#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fbam/special.hpp"

using namespace fbam;
using fbam::detail::cos_pi;
using fbam::detail::sin_pi;

TEST_CASE("gamma matches closed forms") {
  CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gamma_fn(2.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gamma_fn(5.0) == doctest::Approx(24.0).epsilon(1e-14));
  CHECK(gamma_fn(0.5) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-14));
  CHECK(gamma_fn(-0.5) == doctest::Approx(-2.0 * std::sqrt(M_PI)).epsilon(1e-14));
  // Gamma(1/3), Gamma(0.1): reference values to 16 digits
  CHECK(gamma_fn(1.0 / 3.0) == doctest::Approx(2.678938534707747633).epsilon(1e-14));
  CHECK(gamma_fn(0.1) == doctest::Approx(9.513507698668731836).epsilon(1e-14));
}

TEST_CASE("gamma agrees with std::tgamma across the real line") {
  for (double x = -9.75; x <= 30.0; x += 0.25) {
    if (x <= 0.0 && std::floor(x) == x) continue;  // poles
    CHECK(gamma_fn(x) == doctest::Approx(std::tgamma(x)).epsilon(2e-13));
  }
}

TEST_CASE("gamma poles and reciprocal zeros") {
  CHECK(std::isinf(gamma_fn(0.0)));
  CHECK(std::isinf(gamma_fn(-3.0)));
  CHECK(rgamma(0.0) == 0.0);
  CHECK(rgamma(-1.0) == 0.0);
  CHECK(rgamma(-7.0) == 0.0);
  CHECK(rgamma(3.0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("sin_pi exact at integers and half-integers") {
  CHECK(sin_pi(4.0) == 0.0);
  CHECK(sin_pi(-11.0) == 0.0);
  CHECK(sin_pi(0.5) == 1.0);
  CHECK(sin_pi(1.5) == -1.0);
  CHECK(sin_pi(1e6 + 0.5) == 1.0);
  CHECK(cos_pi(0.5) == 0.0);
  CHECK(sin_pi(0.25) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
}

TEST_CASE("log_gamma consistent with gamma") {
  for (double x : {0.3, 1.7, 8.0, 40.0, 143.5})
    CHECK(log_gamma(x) == doctest::Approx(std::lgamma(x)).epsilon(1e-13));
}
