#include "oracles.hpp"
#include "slab/errors.hpp"
#include "slab/specfun.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace slab;
using specfun::cplx;

TEST_SUITE("specfun") {

TEST_CASE("exp_int closed-form values") {
  CHECK(std::abs(specfun::E(2, 0.0) - 0.5) < 1e-15);
  CHECK(std::abs(specfun::E(1, 0.0) - 1.0) < 1e-15);
  CHECK(std::abs(specfun::E(0, 1.0) - oracle::E0_at_1) < 1e-14);
  CHECK(std::abs(specfun::E(1, 1.0) - oracle::E1_at_1) < 1e-14);
}

TEST_CASE("theta series") {
  CHECK(std::abs(specfun::theta(0.0)) == 0.0);
  const cplx s(1e-3, 2e-3);
  const cplx lead = s - s * s / 4.0;
  CHECK(std::abs(specfun::theta(s) - lead) < 1e-8);
  // theta(1) = E(1) + ln 1 + gamma
  const cplx ref = specfun::exp_int_oracle(0, 1.0) + specfun::euler_gamma;
  CHECK(std::abs(specfun::theta(1.0) - ref) < 1e-11);
}

TEST_CASE("branch of ln(-iz)") {
  const double k = 0.37;
  const cplx v = specfun::log_minus_iz(k).value;
  CHECK(std::abs(v - cplx(std::log(k), -std::numbers::pi / 2)) < 1e-15);
  const cplx w = specfun::log_minus_iz(cplx(0.0, 0.25)).value;
  CHECK(w.imag() == 0.0);
  CHECK(std::abs(w.real() - std::log(0.25)) < 1e-15);
  CHECK_THROWS_AS(specfun::log_minus_iz(cplx(0.0, -1.0)), DomainError);
  CHECK_THROWS_AS(specfun::log_minus_iz(0.0), DomainError);
}

TEST_CASE("cut of E is rejected") {
  CHECK_THROWS_AS(specfun::exp_int(0, -2.0), DomainError);
  CHECK_THROWS_AS(specfun::exp_int(0, 0.0), DomainError);
}

TEST_CASE("upward recurrence") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> re(0.01, 20.0), im(-20.0, 20.0);
  for (int n = 0; n < 50; ++n) {
    const cplx s(re(gen), im(gen));
    const auto e = specfun::exp_int_orders(7, s);
    for (int j = 0; j < 7; ++j) {
      const cplx r = e[j + 1] * double(j + 1) - std::exp(-s) + s * e[j];
      CHECK(std::abs(r) <= 1e-10 * (1.0 + std::abs(e[j])));
    }
  }
}

TEST_CASE("oracle agreement") {
  for (double r : {1e-3, 0.05, 0.9, 3.0, 7.5, 50.0})
    for (double arg : {-1.3, -0.4, 0.0, 0.8, 1.45})
      for (int j : {0, 1, 3}) {
        const cplx s = std::polar(r, arg);
        CHECK(std::abs(specfun::E(j, s) - specfun::exp_int_oracle(j, s)) <= 1e-9);
      }
}

TEST_CASE("series and quadrature overlap") {
  for (double r : {0.5, 1.0, 1.5, 2.0})
    for (double arg : {-1.2, 0.0, 1.2}) {
      const cplx s = std::polar(r, arg);
      const cplx series = -std::log(s) - specfun::euler_gamma + specfun::theta_series(s);
      CHECK(std::abs(series - specfun::exp_int_oracle(0, s)) <= 1e-9);
    }
}

TEST_CASE("decay law |E(s)| <= C/|s| on the closed right half plane") {
  double c = 0.0;
  for (double r = 1.0; r <= 200.0; r *= 1.5)
    for (double arg = -std::numbers::pi / 2; arg <= std::numbers::pi / 2 + 1e-12; arg += std::numbers::pi / 16)
      c = std::max(c, r * std::abs(specfun::E(0, std::polar(r, arg))));
  MESSAGE("calibrated C = " << c);
  CHECK(c < 1.5);
}

TEST_CASE("oracle reports failure with the achieved estimate") {
  try {
    (void)specfun::exp_int_oracle(0, cplx(1e-6, 0.0), 1e-300);
    CHECK(false);
  } catch (const NumericalError& e) {
    CHECK(e.achieved() > 0.0);
  }
}

TEST_CASE("exprel near zero") {
  for (double w : {1e-12, 1e-6, 0.3, 0.7, -0.4}) {
    const cplx x(w, 0.5 * w);
    const cplx direct = std::abs(x) > 1e-3 ? (std::exp(x) - 1.0) / x : 1.0 + x / 2.0;
    CHECK(std::abs(specfun::exprel(x) - direct) < 1e-12);
  }
}

}
