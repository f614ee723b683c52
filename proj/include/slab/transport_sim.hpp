#pragma once

#include "slab/profile.hpp"
#include "slab/spectra.hpp"

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

namespace slab {

// Uniform cells on [-X, X] (values at midpoints) times symmetric mu nodes.
struct PhaseGrid {
  double X = 0.0;
  double h = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd mu;
  Eigen::VectorXd w;
  int nx() const { return int(x.size()); }
  int nmu() const { return int(mu.size()); }
};

// gauss: Gauss-Legendre on [-1, 1]. graded: composite Gauss on dyadic panels
// accumulating at mu = 0, which resolves slow particles down to |mu| ~ 2^(-nmu/8).
enum class MuRule { gauss, graded };
inline constexpr int kGradedPanelPoints = 4;

std::shared_ptr<const PhaseGrid> make_phase_grid(double X, int nx, int nmu,
                                                 MuRule rule = MuRule::gauss);

// Phase-space density u(x_j, mu_a) stored as an nx-by-nmu matrix.
template <typename Scalar>
struct Field {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix values;
  std::shared_ptr<const PhaseGrid> grid;

  static Field zero(std::shared_ptr<const PhaseGrid> g) {
    return Field{Matrix::Zero(g->nx(), g->nmu()), std::move(g)};
  }
};

using RealField = Field<double>;
using ComplexField = Field<std::complex<double>>;

// <u, v> = h sum_j sum_a w_a u conj(v)
template <typename A, typename B>
std::complex<double> inner(const Field<A>& u, const Field<B>& v) {
  const auto& g = *u.grid;
  std::complex<double> s = 0.0;
  for (int a = 0; a < g.nmu(); ++a)
    s += g.w[a] * (u.values.col(a).template cast<std::complex<double>>().array() *
                   v.values.col(a).template cast<std::complex<double>>().conjugate().array())
                      .sum();
  return g.h * s;
}

template <typename S>
double norm(const Field<S>& u) {
  const auto& g = *u.grid;
  double s = 0.0;
  for (int a = 0; a < g.nmu(); ++a) s += g.w[a] * u.values.col(a).squaredNorm();
  return std::sqrt(g.h * s);
}

// (J u)(x, mu) = u(x, -mu); the mu nodes are symmetric.
template <typename S>
Field<S> reflect(const Field<S>& u) {
  return Field<S>{u.values.rowwise().reverse(), u.grid};
}

// Strang splitting for du/dt = -mu du/dx + c K u: half collision, exact-shift
// advection with cubic Lagrange interpolation, half collision.
class Stepper {
public:
  Stepper(std::shared_ptr<const PhaseGrid> grid, const Profile& profile,
          const CollisionKernel& kernel, double dt);

  double dt() const { return dt_; }
  const PhaseGrid& grid() const { return *grid_; }
  const std::shared_ptr<const PhaseGrid>& grid_ptr() const { return grid_; }

  template <typename S>
  void step(Field<S>& u) const {
    collide(u.values);
    advect(u.values);
    collide(u.values);
  }

  // Advances by round(t / dt) steps.
  template <typename S>
  void advance(Field<S>& u, double t) const {
    const long n = std::lround(t / dt_);
    for (long i = 0; i < n; ++i) step(u);
  }

private:
  template <typename M>
  void collide(M& u) const {
    using S = typename M::Scalar;
    const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> coef =
        (u * wp_.cast<S>()).cwiseProduct(gain_.cast<S>());
    u.noalias() += coef * p_.transpose().cast<S>();
  }

  template <typename M>
  void advect(M& u) const {
    using S = typename M::Scalar;
    const int nx = grid_->nx();
    Eigen::Matrix<S, Eigen::Dynamic, 1> col(nx);
    for (int a = 0; a < grid_->nmu(); ++a) {
      const Shift& sh = shifts_[a];
      col.setZero();
      // new(j) = sum_k w_k old(j - m + k), k = -1..2 relative to floor position.
      for (int k = 0; k < 4; ++k) {
        const int off = sh.base + k;  // source index = j + off
        const int lo = std::max(0, -off);
        const int hi = std::min(nx, nx - off);
        if (hi > lo) col.segment(lo, hi - lo) += sh.w[k] * u.col(a).segment(lo + off, hi - lo);
      }
      u.col(a) = col;
    }
  }

  struct Shift {
    int base = 0;
    double w[4] = {0, 0, 0, 0};
  };

  std::shared_ptr<const PhaseGrid> grid_;
  double dt_;
  Eigen::MatrixXd p_;     // nmu x N, P_i(mu_a)
  Eigen::MatrixXd wp_;    // nmu x N, w_a P_i(mu_a)
  Eigen::MatrixXd gain_;  // nx x N, exp(dt/2 c_j k_i^2) - 1
  std::vector<Shift> shifts_;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<double> norm;
};

// Evolves u0 up to T and records the norm at the sample times (ascending).
// Throws ConfigError when X is too small for the horizon or dt exceeds the CFL bound.
template <typename S>
Trajectory evolve(Field<S> u, const Stepper& stepper, const Profile& profile,
                  const std::vector<double>& times, double cfl = 1.0);

// Sampled psi = -i (L_0 - z)^{-1} sqrt V phi for a Galerkin coefficient vector phi
// (cell-major, basis-minor) on `grid`, with collision terms `kernel`.
ComplexField reconstruct(cplx z, const Eigen::VectorXcd& phi, const GridSpec& grid,
                         const CollisionKernel& kernel,
                         std::shared_ptr<const PhaseGrid> pg);

struct Mode {
  cplx z;                  // eigenvalue of T = L^* in the upper half plane
  cplx lambda;             // e^{itL} psi = e^{i lambda t} psi, lambda = conj(z)
  double growth = 0.0;     // Im z
  ComplexField right;      // eigenvector of L
  ComplexField left;       // eigenvector of L^* for conj(lambda)
  double residual = 0.0;   // relative defect after one unit of simulated time
};

Mode eigenmode_reconstruct(const Problem& pb, const Eigenvalue& ev, const Stepper& stepper);

// Thrown when <psi_j, chi_j> vanishes (non-simple eigenvalue).
class DegenerateMode : public NumericalError {
public:
  using NumericalError::NumericalError;
};

// Removes the span of the right modes along the left modes (biorthogonal).
template <typename S>
ComplexField deflate(const Field<S>& u, const std::vector<Mode>& modes);

// ||Z_t u0|| at the sample times, re-deflating every `interval` of simulated time.
Trajectory deflate_and_measure(const ComplexField& u0, const std::vector<Mode>& modes,
                               const Stepper& stepper, const Profile& profile,
                               const std::vector<double>& times, double interval = 1.0);

// J-reflected field of the near-kernel vector of I + Q(i eps0), cut to |x| <= radius
// and weighted by |mu|^weight_power; unit norm. Excites the threshold resonance.
ComplexField resonant_field(const Problem& pb, std::shared_ptr<const PhaseGrid> g, double eps0,
                            double weight_power, double radius);

// Fixed-seed random datum supported on [lo, hi], smooth in x, polynomial in mu.
RealField random_field(std::shared_ptr<const PhaseGrid> g, double lo, double hi,
                       std::uint64_t seed);

// Gaussian bump exp(-(x - x0)^2 / (2 s^2)) (1 + mu) for convergence studies.
RealField gaussian_field(std::shared_ptr<const PhaseGrid> g, double x0, double s);

// Log-spaced sample times on [t0, t1].
std::vector<double> log_times(double t0, double t1, int n);

// ---------------------------------------------------------------------------
// Growth laws

enum class GrowthKind { bounded, logarithmic, power, unresolved };
std::string to_string(GrowthKind g);

struct GrowthVerdict {
  GrowthKind kind = GrowthKind::unresolved;
  double ratio = 0.0;           // runner-up residual / winner residual
  double relative_growth = 0.0; // fitted growth over the tail
  double residual_const = 0.0;
  double residual_log = 0.0;
  double residual_power = 0.0;
  double log_a = 0.0, log_b = 0.0;
  double power_a = 0.0, power_p = 0.0;
  double p_lo = 0.0, p_hi = 0.0;  // two-standard-error interval
};

GrowthVerdict growth_fit(const std::vector<double>& t, const std::vector<double>& y,
                         double ratio_threshold = 3.0, double growth_threshold = 0.1);

}  // namespace slab
