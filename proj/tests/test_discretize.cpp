#include "oracles.hpp"
#include "slab/discretize.hpp"
#include "slab/errors.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace slab;

namespace {

Profile two_level() { return Profile({{-1.0, 0.0, 0.5}, {0.0, 1.5, 2.0}}); }

double rel(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return (a - b).norm() / b.norm(); }

CollisionKernel two_term() {
  return CollisionKernel::polynomial({{1.0, normalized_legendre(0)}, {0.7, normalized_legendre(2)}});
}

// <Y1 h, h> and -int |int_{-a}^x f|^2 for f = sqrt(c) h on the grid.
std::pair<double, double> quadratic_form(const GridSpec& g, const Eigen::VectorXd& h) {
  const double lhs = h.dot(assemble_Y1(g).entries * h);
  double F = 0.0, rhs = 0.0;
  for (int p = 0; p < g.n_cells(); ++p) {
    const double w = g.cells[p].width();
    const double f = g.sqrt_c[p] * h[p] / std::sqrt(w);
    const double F1 = F + f * w;
    rhs -= w * (F * F + F * F1 + F1 * F1) / 3.0;
    F = F1;
  }
  return {lhs, rhs};
}

}  // namespace

TEST_SUITE("discretize") {

TEST_CASE("exact cell moments") {
  CHECK(std::abs(cell_log_moment({0, 1}, {0, 1}) - oracle::log_moment_unit) < 1e-14);
  CHECK(std::abs(cell_abs_moment({0, 1}, {0, 1}) - oracle::abs_moment_same) < 1e-15);
  CHECK(std::abs(cell_abs_moment({0, 1}, {1, 2}) - oracle::abs_moment_adjacent) < 1e-15);
  CHECK(std::abs(cell_abs_moment({0, 1}, {2, 3}) - oracle::abs_moment_gap) < 1e-15);
  CHECK(std::abs(cell_log_moment({0, 1}, {2, 3}) - cell_log_moment({2, 3}, {0, 1})) < 1e-15);
}

TEST_CASE("Y and Y1 are real symmetric") {
  const GridSpec g = make_grid(two_level(), 40);
  const Eigen::MatrixXd y = assemble_Y(g).entries, y1 = assemble_Y1(g).entries;
  CHECK((y - y.transpose()).norm() < 1e-14 * y.norm());
  CHECK((y1 - y1.transpose()).norm() < 1e-14 * y1.norm());
}

TEST_CASE("three assembly paths agree") {
  const GridSpec g = make_grid(two_level(), 24);
  const CollisionKernel iso = CollisionKernel::isotropic();
  const CollisionKernel as_poly = CollisionKernel::polynomial({{1.0, normalized_legendre(0)}});
  for (cplx z : {cplx(0.6, 0.8), cplx(2.0, 0.1), cplx(-1.5, 0.5), cplx(0.0, 0.05), cplx(0.0, 3.0)}) {
    const Eigen::MatrixXcd a = assemble_Q_isotropic(z, g).entries;
    const Eigen::MatrixXcd b = assemble_Q_direct(z, g, iso).entries;
    const Eigen::MatrixXcd c = assemble_Q_expansion(z, g, as_poly).entries;
    CHECK(rel(b, a) < 1e-6);
    CHECK(rel(c, a) < 1e-6);
  }
  const CollisionKernel k2 = two_term();
  const cplx z(0.3, 0.4);
  CHECK(rel(assemble_Q_expansion(z, g, k2).entries, assemble_Q_direct(z, g, k2).entries) < 1e-6);
}

TEST_CASE("G_0 is the outer product of k_i P_i(0)") {
  const CollisionKernel k = two_term();
  const Eigen::VectorXd w = k.ell_weights();
  CHECK((k.expansion_matrices()[0] - w * w.transpose()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("kernel validation") {
  CHECK_THROWS_AS(CollisionKernel::polynomial({{1.0, Polynomial{Eigen::Vector2d(1.0, 1.0)}}}), ConfigError);
  // P_1 alone: K1 = 0 is proportional to 1 but P_1(0) = 0.
  CHECK_THROWS_AS(CollisionKernel::polynomial({{1.0, normalized_legendre(1)}}), ConfigError);
  // (P_0 +- P_1)/sqrt 2 are orthonormal but K1 picks up a P_1 component.
  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(2);
  p0[0] = normalized_legendre(0).coeffs[0];
  const Eigen::VectorXd p1 = normalized_legendre(1).coeffs;
  const Polynomial u{(p0 + p1) / std::sqrt(2.0)};
  const Polynomial v{(p0 - p1) / std::sqrt(2.0)};
  try {
    (void)CollisionKernel::polynomial({{1.0, u}, {0.5, v}});
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("constant function") != std::string::npos);
  }
}

TEST_CASE("dissipativity: Re Q(z) <= 0") {
  const GridSpec g = make_grid(two_level(), 32);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> re(-3.0, 3.0), lim(-3.0, 1.0);
  for (const CollisionKernel& k : {CollisionKernel::isotropic(), two_term()})
    for (int n = 0; n < 10; ++n) {
      const cplx z(re(gen), std::pow(10.0, lim(gen)));
      const Eigen::MatrixXcd q = assemble_Q(z, g, k).entries;
      const Eigen::MatrixXcd herm = 0.5 * (q + q.adjoint());
      CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(herm).eigenvalues().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("sign law of Im Q on the real axis") {
  const GridSpec g = make_grid(Profile::step(1.0), 32);
  for (double k : {-2.0, -0.5, 0.5, 2.0}) {
    const Eigen::MatrixXcd q = assemble_Q(k, g, CollisionKernel::isotropic()).entries;
    const Eigen::MatrixXcd im = (q - q.adjoint()) / cplx(0.0, 2.0);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(im).eigenvalues();
    const double sign = k < 0.0 ? 1.0 : -1.0;
    const Eigen::VectorXd s = sign * ev;
    CHECK(s.maxCoeff() > 1e-3);
    CHECK(s.minCoeff() >= -1e-12 * s.maxCoeff());
  }
}

TEST_CASE("Q(i eps) eigenvalues are monotone in eps") {
  const GridSpec g = make_grid(two_level(), 32);
  Eigen::VectorXd prev;
  for (double e = 1e-6; e <= 1.0 + 1e-12; e *= 10.0) {
    const Eigen::MatrixXd q = assemble_Q(cplx(0.0, e), g, CollisionKernel::isotropic()).entries.real();
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q).eigenvalues();
    if (prev.size()) CHECK((ev - prev).minCoeff() >= -1e-12);
    prev = ev;
  }
}

TEST_CASE("Q - (Y + 1/2 ln(-iz) <., sqrt c> sqrt c + iz Y1) = O(|z|^2)") {
  const GridSpec g = make_grid(two_level(), 24);
  const Eigen::MatrixXd y = assemble_Y(g).entries, y1 = assemble_Y1(g).entries;
  const Eigen::VectorXd s = sqrt_c_vector(g);
  std::vector<double> r, d;
  for (double rad : {1e-1, 3e-2, 1e-2, 3e-3}) {
    const cplx z = std::polar(rad, 1.0);
    const Eigen::MatrixXcd q1 = y.cast<cplx>() + 0.5 * std::log(cplx(0.0, -1.0) * z) * (s * s.transpose()).cast<cplx>() +
                                cplx(0.0, 1.0) * z * y1.cast<cplx>();
    r.push_back(std::log(rad));
    d.push_back(std::log((assemble_Q(z, g, CollisionKernel::isotropic()).entries - q1).norm()));
  }
  const double slope = (d.back() - d.front()) / (r.back() - r.front());
  CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("quadratic form of Y1 on sqrt(c)-orthogonal h") {
  const GridSpec g = make_grid(two_level(), 48);
  const Eigen::VectorXd s = sqrt_c_vector(g);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  for (int n = 0; n < 5; ++n) {
    Eigen::VectorXd h(g.n_cells());
    for (auto& v : h) v = nd(gen);
    h -= s * (s.dot(h) / s.squaredNorm());
    const auto [lhs, rhs] = quadratic_form(g, h);
    CHECK(std::abs(lhs - rhs) <= 1e-8 * std::abs(rhs));
    CHECK(lhs < 0.0);
  }
}

TEST_CASE("Theta = Q - Q~ and the isotropic B equals Y") {
  const GridSpec g = make_grid(two_level(), 16);
  const CollisionKernel k = CollisionKernel::isotropic();
  const cplx z(0.2, 0.7);
  const Eigen::MatrixXcd lhs = assemble_Theta(z, g, k).entries;
  const Eigen::MatrixXcd rhs = assemble_Q(z, g, k).entries - assemble_Qtilde(z, g, k).entries;
  CHECK((lhs - rhs).norm() < 1e-13 * rhs.norm());
  CHECK((assemble_B(g, k).entries - assemble_Y(g).entries).norm() < 1e-13);
}

TEST_CASE("projection of a constant") {
  const GridSpec g = make_grid(two_level(), 10);
  const Eigen::VectorXd p = project_onto_cells(g, [](double) { return 2.0; });
  for (int i = 0; i < g.n_cells(); ++i) CHECK(p[i] == doctest::Approx(2.0 * std::sqrt(g.cells[i].width())));
}

}
