#include "oracles.hpp"
#include "slab/spectra.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

using namespace slab;

namespace {

Problem step(double kappa, int cells) {
  return make_problem(Profile::step(kappa), CollisionKernel::isotropic(), cells);
}

std::vector<double> betas(const Problem& pb) {
  std::vector<double> b;
  for (const auto& e : discrete_spectrum_isotropic(pb, 1e-6, eigenvalue_ceiling(pb)).eigenvalues)
    b.push_back(e.z.imag());
  std::sort(b.begin(), b.end());
  return b;
}

Problem unit_at_critical(int n, int cells) {
  const Problem unit = step(1.0, cells);
  return step(grid_critical_kappa(unit, n), cells);
}

}  // namespace

TEST_SUITE("spectra") {

TEST_CASE("zero profile has empty spectrum") {
  const Problem pb = make_problem(Profile(), CollisionKernel::isotropic(), 16);
  CHECK(discrete_spectrum_isotropic(pb, 1e-6, 1.0).eigenvalues.empty());
  CHECK(winding_number(pb, Contour{}) == 0);
  CHECK(classify_singularity(pb, 1e-6).kind == Singularity::none);
}

TEST_CASE("kappa = 1 eigenvalue against the frozen values") {
  const auto b128 = betas(step(1.0, 128));
  const auto b256 = betas(step(1.0, 256));
  REQUIRE(b128.size() == 1);
  REQUIRE(b256.size() == 1);
  CHECK(std::abs(b128[0] - oracle::beta_kappa1_128) < 1e-9);
  CHECK(std::abs(b256[0] - oracle::beta_kappa1_256) < 1e-9);
}

TEST_CASE("eigenvalue counts grow with kappa") {
  CHECK(int(betas(step(2.0, 128)).size()) == oracle::count_kappa2);
  CHECK(int(betas(step(3.0, 128)).size()) == oracle::count_kappa3);
}

TEST_CASE("argument principle agrees with the isotropic search") {
  const Problem pb = step(2.0, 48);
  const auto iso = betas(pb);
  REQUIRE(iso.size() == 2);
  Contour c;
  c.re_lo = -0.5;
  c.re_hi = 0.5;
  c.im_lo = 0.5 * iso.front();
  c.im_hi = 1.01 * 2.0;
  CHECK(winding_number(pb, c) == 2);
  auto gen = discrete_spectrum_general(pb, c).eigenvalues;
  REQUIRE(gen.size() == 2);
  std::sort(gen.begin(), gen.end(), [](const auto& a, const auto& b) { return a.z.imag() < b.z.imag(); });
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(gen[i].z - cplx(0.0, iso[i])) < 1e-8);
    CHECK(gen[i].residual < 1e-8);
  }
}

TEST_CASE("S S^{-1} = I") {
  const Problem pb = step(1.0, 32);
  for (cplx z : {cplx(0.3, 0.5), cplx(-1.2, 0.05), cplx(0.0, 2.0)}) {
    const Eigen::MatrixXcd s = char_fn(z, pb).value.entries;
    const Eigen::MatrixXcd si = char_fn_inv(z, pb).value.entries;
    CHECK((s * si - Eigen::MatrixXcd::Identity(pb.dim(), pb.dim())).norm() < 1e-10);
  }
}

TEST_CASE("S(0) does not depend on delta") {
  const Problem pb = step(1.0, 64);
  const double bound = admissible_delta(pb.profile, pb.kernel);
  CHECK(bound == doctest::Approx(0.125));
  const SZero a = s_zero(pb, 0.9 * bound), b = s_zero(pb, 0.1 * bound);
  CHECK((a.value - b.value).norm() <= 1e-8 * a.value.norm());
  try {
    (void)s_zero(pb, 2.0 * bound);
    CHECK(false);
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("delta") != std::string::npos);
  }
}

TEST_CASE("S(i eps) -> S(0) at rate 1/|ln eps|") {
  const Problem pb = step(1.0, 64);
  const Eigen::MatrixXcd s0 = s_zero(pb, 0.1).value;
  std::vector<double> scaled;
  double prev = INFINITY;
  for (double e : {1e-6, 1e-9, 1e-12}) {
    const double d = (char_fn(cplx(0.0, e), pb).value.entries - s0).norm();
    CHECK(d < prev);
    prev = d;
    scaled.push_back(d * std::abs(std::log(e)));
  }
  CHECK(scaled.back() == doctest::Approx(scaled.front()).epsilon(0.1));
}

TEST_CASE("classification") {
  const double tol = 1e-6;
  CHECK(classify_singularity(step(1.0, 128), tol).kind == Singularity::none);
  const Classification c1 = classify_singularity(unit_at_critical(1, 128), tol);
  CHECK(c1.kind == Singularity::first_order);
  CHECK(c1.N.dim == 1);
  CHECK(c1.simple.has_value());
  const Classification c2 = classify_singularity(unit_at_critical(2, 128), tol);
  CHECK(c2.kind == Singularity::logarithmic);
  CHECK(c2.log.has_value());
}

TEST_CASE("grid-critical amplitude approaches the extrapolated one") {
  for (int n : {1, 2}) {
    const double k128 = grid_critical_kappa(step(1.0, 128), n);
    const double k256 = grid_critical_kappa(step(1.0, 256), n);
    const double ref = oracle::critical_kappa[n - 1];
    CHECK(std::abs(k256 - ref) < std::abs(k128 - ref) + 1e-12);
    CHECK(std::abs(k256 - ref) < 1e-2);
  }
}

TEST_CASE("eta flow limits match the compressed B") {
  const Problem pb = step(1.0, 64);
  std::vector<double> eps;
  for (double e = 1e-2; e >= 1e-14; e /= 10.0) eps.push_back(e);
  const auto pts = bc_set(eta_flow(pb, eps));
  const Eigen::VectorXd exact = bc_compressed(pb);
  REQUIRE(!pts.empty());
  for (const auto& p : pts) {
    double best = INFINITY;
    for (double v : exact) best = std::min(best, std::abs(v - p.k));
    CHECK(best < 1e-2);
  }
}

TEST_CASE("splitting profile away from criticality") {
  const Problem pb = step(1.0, 32);
  const auto prof = ac_splitting_profile(pb, {-2.0, -0.5, 0.5, 2.0}, 0.5);
  CHECK(prof.max_ker_dim == 0);
  for (const auto& s : prof.svals) CHECK(s.minCoeff() > 1e-6);
}

TEST_CASE("loglog fit recovers a power") {
  std::vector<double> x, y;
  for (double r = 1e-4; r < 1.0; r *= 3.0) {
    x.push_back(r);
    y.push_back(3.0 * std::pow(r, 1.7));
  }
  const LogFit f = loglog_fit(x, y);
  CHECK(f.slope == doctest::Approx(1.7).epsilon(1e-12));
  CHECK(f.stderr_slope < 1e-10);
}

}
