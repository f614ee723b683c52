#include "slab/transport_sim.hpp"

#include "slab/errors.hpp"
#include "slab/quadrature.hpp"
#include "slab/specfun.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <random>
#include <type_traits>

namespace slab {

std::shared_ptr<const PhaseGrid> make_phase_grid(double X, int nx, int nmu, MuRule rule) {
  if (!(X > 0.0)) throw ConfigError("grid.X", "must be positive");
  if (nx < 8) throw ConfigError("grid.nx", "at least 8 cells required");
  if (nmu < 2 || nmu % 2 != 0) throw ConfigError("grid.mu_nodes", "must be even and >= 2");
  auto g = std::make_shared<PhaseGrid>();
  g->X = X;
  g->h = 2.0 * X / nx;
  g->x = Eigen::VectorXd::LinSpaced(nx, -X + 0.5 * g->h, X - 0.5 * g->h);
  if (rule == MuRule::gauss) {
    const quad::Rule& r = quad::gauss_legendre(nmu);
    g->mu = r.nodes;
    g->w = r.weights;
    return g;
  }
  if (nmu % (2 * kGradedPanelPoints) != 0)
    throw ConfigError("grid.mu_nodes", "graded rule needs a multiple of " +
                                           std::to_string(2 * kGradedPanelPoints));
  // Panels [0, 2^-(P-1)], ..., [1/2, 1] on each side of mu = 0.
  const int panels = nmu / (2 * kGradedPanelPoints);
  const quad::Rule& r = quad::gauss_legendre(kGradedPanelPoints);
  std::vector<double> half_mu, half_w;
  for (int k = panels - 1; k >= 0; --k) {
    const double hi = std::ldexp(1.0, -k);
    const double lo = k == panels - 1 ? 0.0 : 0.5 * hi;
    for (int i = 0; i < kGradedPanelPoints; ++i) {
      half_mu.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * r.nodes[i]);
      half_w.push_back(0.5 * (hi - lo) * r.weights[i]);
    }
  }
  const int m = int(half_mu.size());
  g->mu.resize(2 * m);
  g->w.resize(2 * m);
  for (int i = 0; i < m; ++i) {
    g->mu[m + i] = half_mu[i];
    g->w[m + i] = half_w[i];
    g->mu[m - 1 - i] = -half_mu[i];
    g->w[m - 1 - i] = half_w[i];
  }
  return g;
}

namespace {

// Length of [a, b] covered by each profile segment, weighted by its value.
double cell_average(const Profile& p, double a, double b) {
  double s = 0.0;
  for (const auto& seg : p.segments()) {
    const double lo = std::max(a, seg.x0), hi = std::min(b, seg.x1);
    if (hi > lo) s += seg.value * (hi - lo);
  }
  return s / (b - a);
}

double support_radius(const Profile& p) {
  if (p.is_zero()) return 0.0;
  return std::max(std::abs(p.support_lo()), std::abs(p.support_hi()));
}

}  // namespace

Stepper::Stepper(std::shared_ptr<const PhaseGrid> grid, const Profile& profile,
                 const CollisionKernel& kernel, double dt)
    : grid_(std::move(grid)), dt_(dt) {
  if (!(dt > 0.0)) throw ConfigError("grid.dt", "must be positive");
  const PhaseGrid& g = *grid_;
  const int nb = kernel.size();
  p_.resize(g.nmu(), nb);
  for (int a = 0; a < g.nmu(); ++a)
    for (int i = 0; i < nb; ++i) p_(a, i) = kernel.terms()[i].poly(g.mu[a]);
  wp_ = g.w.asDiagonal() * p_;
  gain_.resize(g.nx(), nb);
  for (int j = 0; j < g.nx(); ++j) {
    const double c = cell_average(profile, g.x[j] - 0.5 * g.h, g.x[j] + 0.5 * g.h);
    for (int i = 0; i < nb; ++i) {
      const double k = kernel.terms()[i].k;
      gain_(j, i) = std::expm1(0.5 * dt * c * k * k);
    }
  }
  shifts_.resize(g.nmu());
  for (int a = 0; a < g.nmu(); ++a) {
    const double s = g.mu[a] * dt / g.h;
    const double fl = std::floor(-s);
    const double th = -s - fl;
    Shift& sh = shifts_[a];
    sh.base = int(fl) - 1;
    sh.w[0] = -th * (th - 1.0) * (th - 2.0) / 6.0;
    sh.w[1] = (th + 1.0) * (th - 1.0) * (th - 2.0) / 2.0;
    sh.w[2] = -(th + 1.0) * th * (th - 2.0) / 2.0;
    sh.w[3] = (th + 1.0) * th * (th - 1.0) / 6.0;
  }
}

template <typename S>
Trajectory evolve(Field<S> u, const Stepper& stepper, const Profile& profile,
                  const std::vector<double>& times, double cfl) {
  const PhaseGrid& g = stepper.grid();
  if (stepper.dt() > cfl * g.h * (1.0 + 1e-12))
    throw ConfigError("grid.dt", "violates dt <= CFL h");
  const double horizon = times.empty() ? 0.0 : times.back();
  double r0 = support_radius(profile);
  const double umax = u.values.cwiseAbs().maxCoeff();
  for (int j = 0; j < g.nx(); ++j)
    if (u.values.row(j).cwiseAbs().maxCoeff() > 1e-14 * umax)
      r0 = std::max(r0, std::abs(g.x[j]) + 0.5 * g.h);
  if (r0 + horizon > g.X)
    throw ConfigError("grid.X", "domain too small for the horizon: need X >= " +
                                    std::to_string(r0 + horizon));
  Trajectory tr;
  long done = 0;
  for (double t : times) {
    const long target = std::lround(t / stepper.dt());
    for (; done < target; ++done) stepper.step(u);
    tr.t.push_back(done * stepper.dt());
    tr.norm.push_back(norm(u));
  }
  return tr;
}

template Trajectory evolve<double>(RealField, const Stepper&, const Profile&,
                                   const std::vector<double>&, double);
template Trajectory evolve<cplx>(ComplexField, const Stepper&, const Profile&,
                                 const std::vector<double>&, double);

ComplexField reconstruct(cplx z, const Eigen::VectorXcd& phi, const GridSpec& grid,
                         const CollisionKernel& kernel,
                         std::shared_ptr<const PhaseGrid> pg) {
  const PhaseGrid& g = *pg;
  const int nb = kernel.size();
  const int nc = grid.n_cells();
  if (phi.size() != nc * nb) throw ConfigError("phi", "size does not match the grid");
  ComplexField out = ComplexField::zero(pg);
  Eigen::VectorXcd dens(nc);
  for (int a = 0; a < g.nmu(); ++a) {
    const double mu = g.mu[a];
    // g(s, mu) on Galerkin cell p.
    for (int p = 0; p < nc; ++p) {
      cplx v = 0.0;
      for (int i = 0; i < nb; ++i)
        v += kernel.terms()[i].k * kernel.terms()[i].poly(mu) * phi[p * nb + i];
      dens[p] = grid.sqrt_c[p] * v / std::sqrt(grid.cells[p].width());
    }
    const double am = std::abs(mu);
    const cplx kap = cplx(0.0, 1.0) * z / am;
    // Integral of e^{kap |s - xref|} g(s) over [lo, hi], which lies on the
    // upstream side of xref.
    auto piece = [&](double lo, double hi, double xref) {
      cplx s = 0.0;
      for (int p = 0; p < nc; ++p) {
        const double a0 = std::max(lo, grid.cells[p].x0);
        const double b0 = std::min(hi, grid.cells[p].x1);
        if (b0 <= a0 || dens[p] == 0.0) continue;
        const double len = b0 - a0;
        const double near = mu > 0 ? a0 - xref : xref - b0;
        s += dens[p] * std::exp(kap * near) * len * specfun::exprel(kap * len);
      }
      return s / am;
    };
    const double inf = std::numeric_limits<double>::infinity();
    const int nx = g.nx();
    if (mu > 0) {
      cplx psi = piece(g.x[nx - 1], inf, g.x[nx - 1]);
      out.values(nx - 1, a) = psi;
      for (int j = nx - 2; j >= 0; --j) {
        psi = std::exp(kap * g.h) * psi + piece(g.x[j], g.x[j + 1], g.x[j]);
        out.values(j, a) = psi;
      }
    } else {
      cplx psi = piece(-inf, g.x[0], g.x[0]);
      out.values(0, a) = psi;
      for (int j = 1; j < nx; ++j) {
        psi = std::exp(kap * g.h) * psi + piece(g.x[j - 1], g.x[j], g.x[j]);
        out.values(j, a) = psi;
      }
    }
  }
  return out;
}

namespace {

void normalize(ComplexField& f) {
  const double n = norm(f);
  if (n == 0.0) throw NumericalError("eigenmode_reconstruct: zero field");
  Eigen::Index r, c;
  f.values.cwiseAbs().maxCoeff(&r, &c);
  const cplx ph = f.values(r, c) / std::abs(f.values(r, c));
  f.values /= (n * ph);
}

}  // namespace

Mode eigenmode_reconstruct(const Problem& pb, const Eigenvalue& ev, const Stepper& stepper) {
  if (!(ev.z.imag() > 0.0)) throw DomainError("eigenmode_reconstruct: requires Im z > 0");
  const auto& pg = stepper.grid_ptr();
  Mode m;
  m.z = ev.z;
  m.lambda = std::conj(ev.z);
  m.growth = ev.z.imag();
  m.left = reconstruct(ev.z, ev.right, pb.grid, pb.kernel, pg);
  m.right = reflect(reconstruct(-std::conj(ev.z), ev.left, pb.grid, pb.kernel.reflected(), pg));
  normalize(m.left);
  normalize(m.right);
  ComplexField u = m.right;
  const long n = std::max(1L, std::lround(1.0 / stepper.dt()));
  for (long i = 0; i < n; ++i) stepper.step(u);
  const cplx f = std::exp(cplx(0.0, 1.0) * m.lambda * (n * stepper.dt()));
  u.values -= f * m.right.values;
  m.residual = norm(u) / std::abs(f);
  return m;
}

template <typename S>
ComplexField deflate(const Field<S>& u, const std::vector<Mode>& modes) {
  ComplexField out{u.values.template cast<cplx>(), u.grid};
  const int m = int(modes.size());
  if (m == 0) return out;
  Eigen::MatrixXcd gram(m, m);
  Eigen::VectorXcd rhs(m);
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) gram(j, k) = inner(modes[k].right, modes[j].left);
    if (std::abs(gram(j, j)) < 1e-8 * norm(modes[j].right) * norm(modes[j].left))
      throw DegenerateMode("deflate: <psi, chi> vanishes; eigenvalue is not simple",
                           std::abs(gram(j, j)));
    rhs[j] = inner(out, modes[j].left);
  }
  const Eigen::VectorXcd a = gram.partialPivLu().solve(rhs);
  for (int k = 0; k < m; ++k) out.values -= a[k] * modes[k].right.values;
  return out;
}

template ComplexField deflate<double>(const RealField&, const std::vector<Mode>&);
template ComplexField deflate<cplx>(const ComplexField&, const std::vector<Mode>&);

namespace {

bool nearly_real(const ComplexField& f) {
  return f.values.imag().norm() <= 1e-12 * f.values.norm();
}

template <typename S>
Trajectory measure_deflated(Field<S> u, const std::vector<Mode>& modes, const Stepper& stepper,
                            const std::vector<double>& times, double interval) {
  auto project = [&modes](Field<S>& v) {
    const ComplexField d = deflate(v, modes);
    if constexpr (std::is_same_v<S, double>)
      v.values = d.values.real();
    else
      v.values = d.values;
  };
  project(u);
  const long every = std::max(1L, std::lround(interval / stepper.dt()));
  Trajectory tr;
  long done = 0;
  for (double t : times) {
    const long target = std::lround(t / stepper.dt());
    for (; done < target; ++done) {
      stepper.step(u);
      if ((done + 1) % every == 0) project(u);
    }
    tr.t.push_back(done * stepper.dt());
    tr.norm.push_back(norm(deflate(u, modes)));
  }
  return tr;
}

}  // namespace

Trajectory deflate_and_measure(const ComplexField& u0, const std::vector<Mode>& modes,
                               const Stepper& stepper, const Profile& profile,
                               const std::vector<double>& times, double interval) {
  const PhaseGrid& g = stepper.grid();
  const double horizon = times.empty() ? 0.0 : times.back();
  if (support_radius(profile) + horizon > g.X)
    throw ConfigError("grid.X", "domain too small for the horizon: need X >= " +
                                    std::to_string(support_radius(profile) + horizon));
  // Real data with real modes stay real under the real evolution.
  bool real = nearly_real(u0);
  for (const Mode& m : modes) real = real && nearly_real(m.right) && nearly_real(m.left);
  if (real) return measure_deflated(RealField{u0.values.real(), u0.grid}, modes, stepper, times, interval);
  return measure_deflated(u0, modes, stepper, times, interval);
}

ComplexField resonant_field(const Problem& pb, std::shared_ptr<const PhaseGrid> g, double eps0,
                            double weight_power, double radius) {
  if (!(eps0 > 0.0)) throw ConfigError("initial.eps0", "must be positive");
  if (!(radius > 0.0)) throw ConfigError("initial.radius", "must be positive");
  const Eigen::Index n = pb.dim();
  const NearKernel nk =
      near_kernel(Eigen::MatrixXcd::Identity(n, n) + pb.Q(cplx(0.0, eps0)).entries);
  ComplexField u = reflect(reconstruct(cplx(0.0, eps0), nk.right, pb.grid, pb.kernel, g));
  for (int j = 0; j < g->nx(); ++j)
    if (std::abs(g->x[j]) > radius) u.values.row(j).setZero();
  for (int a = 0; a < g->nmu(); ++a) u.values.col(a) *= std::pow(std::abs(g->mu[a]), weight_power);
  normalize(u);
  return u;
}

RealField random_field(std::shared_ptr<const PhaseGrid> g, double lo, double hi,
                       std::uint64_t seed) {
  if (!(hi > lo)) throw ConfigError("initial.support", "requires lo < hi");
  std::mt19937_64 gen(seed);
  // Portable uniform on [-1, 1] from the top 53 bits.
  auto uniform = [&gen] { return 2.0 * double(gen() >> 11) * 0x1.0p-53 - 1.0; };
  double r[4][3];
  for (auto& row : r)
    for (double& v : row) v = uniform();
  RealField f = RealField::zero(g);
  for (int j = 0; j < g->nx(); ++j) {
    const double xi = (g->x[j] - lo) / (hi - lo);
    if (xi <= 0.0 || xi >= 1.0) continue;
    const double env = std::pow(std::sin(std::numbers::pi * xi), 2);
    for (int a = 0; a < g->nmu(); ++a) {
      double v = 0.0;
      for (int k = 0; k < 4; ++k)
        for (int m = 0; m < 3; ++m)
          v += r[k][m] * std::cos(k * std::numbers::pi * xi) * std::pow(g->mu[a], m);
      f.values(j, a) = env * v;
    }
  }
  return f;
}

RealField gaussian_field(std::shared_ptr<const PhaseGrid> g, double x0, double s) {
  RealField f = RealField::zero(g);
  for (int j = 0; j < g->nx(); ++j) {
    const double e = std::exp(-0.5 * std::pow((g->x[j] - x0) / s, 2));
    for (int a = 0; a < g->nmu(); ++a) f.values(j, a) = e * (1.0 + g->mu[a]);
  }
  return f;
}

std::vector<double> log_times(double t0, double t1, int n) {
  if (!(t0 > 0.0) || !(t1 > t0) || n < 2) throw ConfigError("times", "requires 0 < t0 < t1, n >= 2");
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = t0 * std::pow(t1 / t0, double(i) / (n - 1));
  return t;
}

}  // namespace slab
