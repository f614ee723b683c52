#include "slab/transport_sim.hpp"

#include <doctest.h>

#include <cmath>

using namespace slab;

namespace {

double mass(const RealField& u) {
  const PhaseGrid& g = *u.grid;
  return g.h * (u.values.colwise().sum().transpose().array() * g.w.array()).sum();
}

std::vector<double> power_series(double a, double p, std::vector<double>* t) {
  std::vector<double> y;
  *t = log_times(1.0, 100.0, 40);
  for (double s : *t) y.push_back(a * std::pow(s, p));
  return y;
}

}  // namespace

TEST_SUITE("transport_sim") {

TEST_CASE("graded mu rule") {
  const auto g = make_phase_grid(4.0, 16, 96, MuRule::graded);
  REQUIRE(g->nmu() == 96);
  double w = 0.0, m1 = 0.0, m2 = 0.0;
  for (int a = 0; a < g->nmu(); ++a) {
    w += g->w[a];
    m1 += g->w[a] * std::abs(g->mu[a]);
    m2 += g->w[a] * g->mu[a] * g->mu[a];
    CHECK(g->mu[a] == doctest::Approx(-g->mu[g->nmu() - 1 - a]).epsilon(1e-15));
    if (a > 0) CHECK(g->mu[a] > g->mu[a - 1]);
  }
  CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m1 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m2 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(g->mu.cwiseAbs().minCoeff() < std::ldexp(1.0, -11));
  CHECK_THROWS_AS(make_phase_grid(4.0, 16, 20, MuRule::graded), ConfigError);
}

TEST_CASE("random datum is deterministic and supported where asked") {
  const auto g = make_phase_grid(4.0, 256, 16);
  const RealField a = random_field(g, -1.0, 1.0, 7), b = random_field(g, -1.0, 1.0, 7);
  const RealField c = random_field(g, -1.0, 1.0, 8);
  CHECK((a.values - b.values).norm() == 0.0);
  CHECK((a.values - c.values).norm() > 0.0);
  for (int j = 0; j < g->nx(); ++j)
    if (std::abs(g->x[j]) > 1.0) CHECK(a.values.row(j).norm() == 0.0);
}

TEST_CASE("mass grows like e^{ct} where c is constant") {
  // Isotropic collisions add c times the mass; interior advection conserves it.
  const auto g = make_phase_grid(32.0, 256, 16);
  const Profile p = Profile::step(0.5, 30.0);
  const Stepper st(g, p, CollisionKernel::isotropic(), g->h);
  RealField u = random_field(g, -1.0, 1.0, 3);
  const double m0 = mass(u);
  REQUIRE(std::abs(m0) > 1e-3);
  st.advance(u, 10.0);
  CHECK(mass(u) == doctest::Approx(m0 * std::exp(0.5 * 10.0)).epsilon(1e-12));
}

TEST_CASE("doubling X at fixed h changes nothing") {
  const Profile p = Profile::step(1.0);
  const std::vector<double> times = log_times(0.5, 10.0, 8);
  std::vector<Trajectory> tr;
  for (double X : {16.0, 32.0}) {
    const auto g = make_phase_grid(X, int(std::lround(X / 0.125)), 16);
    const Stepper st(g, p, CollisionKernel::isotropic(), g->h);
    tr.push_back(evolve(random_field(g, -1.0, 1.0, 5), st, p, times));
  }
  for (std::size_t i = 0; i < times.size(); ++i)
    CHECK(tr[1].norm[i] == doctest::Approx(tr[0].norm[i]).epsilon(1e-12));
}

TEST_CASE("horizon and CFL are enforced") {
  const Profile p = Profile::step(1.0);
  const auto g = make_phase_grid(4.0, 64, 8);
  const Stepper ok(g, p, CollisionKernel::isotropic(), g->h);
  CHECK_THROWS_AS(evolve(random_field(g, -1.0, 1.0, 1), ok, p, {10.0}), ConfigError);
  const Stepper big(g, p, CollisionKernel::isotropic(), 2.0 * g->h);
  CHECK_THROWS_AS(evolve(random_field(g, -1.0, 1.0, 1), big, p, {1.0}), ConfigError);
  CHECK_NOTHROW(evolve(random_field(g, -1.0, 1.0, 1), big, p, {1.0}, 2.0));
}

TEST_CASE("(x, mu) -> (-x, -mu) symmetry") {
  const Profile p = Profile::step(1.5);
  const auto g = make_phase_grid(12.0, 512, 16);
  const Stepper st(g, p, CollisionKernel::isotropic(), g->h);
  const RealField u = random_field(g, -1.0, 0.5, 9);
  const RealField v{u.values.reverse(), g};
  const std::vector<double> times = log_times(0.5, 8.0, 6);
  const Trajectory a = evolve(u, st, p, times), b = evolve(v, st, p, times);
  for (std::size_t i = 0; i < times.size(); ++i)
    CHECK(b.norm[i] == doctest::Approx(a.norm[i]).epsilon(1e-12));
}

TEST_CASE("reconstructed mode grows at its eigenvalue and deflation removes it") {
  const Problem pb = make_problem(Profile::step(1.0), CollisionKernel::isotropic(), 64);
  const auto spec = discrete_spectrum_isotropic(pb, 1e-6, eigenvalue_ceiling(pb));
  REQUIRE(spec.eigenvalues.size() == 1);
  const auto g = make_phase_grid(22.0, 4096, 32);
  const Stepper st(g, pb.profile, pb.kernel, g->h);
  const Mode m = eigenmode_reconstruct(pb, spec.eigenvalues[0], st);
  CHECK(m.growth == doctest::Approx(spec.eigenvalues[0].z.imag()));
  CHECK(m.residual < 1e-2);

  // Riesz consistency on [0, 5 / beta].
  ComplexField u = m.right;
  const double n0 = norm(u);
  const double horizon = 5.0 / m.growth;
  const int chunks = 10;
  for (int k = 1; k <= chunks; ++k) {
    st.advance(u, horizon / chunks);
    const double t = k * std::lround(horizon / chunks / st.dt()) * st.dt();
    CHECK(norm(u) / n0 == doctest::Approx(std::exp(m.growth * t)).epsilon(0.01));
  }

  const std::vector<Mode> modes{m};
  CHECK(norm(deflate(m.right, modes)) <= 1e-10 * norm(m.right));
  const ComplexField r = deflate(random_field(g, -1.0, 1.0, 2), modes);
  CHECK(std::abs(inner(r, m.left)) <= 1e-10 * norm(r) * norm(m.left));
}

TEST_CASE("growth law fits on synthetic series") {
  std::vector<double> t;
  const std::vector<double> pw = power_series(2.0, 0.95, &t);
  const GrowthVerdict a = growth_fit(t, pw);
  CHECK(a.kind == GrowthKind::power);
  CHECK(a.power_p >= 0.9);
  CHECK(a.power_p <= 1.0);

  std::vector<double> lg;
  for (double s : t) lg.push_back(2.0 + 3.0 * std::log(s));
  CHECK(growth_fit(t, lg).kind == GrowthKind::logarithmic);

  const std::vector<double> flat(t.size(), 4.0);
  CHECK(growth_fit(t, flat).kind == GrowthKind::bounded);

  const std::vector<double> ts = log_times(1.0, 20.0, 20);
  const std::vector<double> ys(ts.size(), 1.0);
  CHECK_THROWS_AS(growth_fit(ts, ys), DomainError);
}

}
