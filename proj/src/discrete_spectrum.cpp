#include "slab/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace slab {

namespace {

constexpr double pi = std::numbers::pi;

// Eigenvalues (ascending) of the Hermitian part of I + Q(i eps).
Eigen::VectorXd shifted_eigs(const Problem& pb, double eps) {
  const Eigen::MatrixXcd q = pb.Q(cplx(0.0, eps)).entries;
  const Eigen::MatrixXcd h = Eigen::MatrixXcd::Identity(q.rows(), q.cols()) +
                             0.5 * (q + q.adjoint());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(h, Eigen::EigenvaluesOnly).eigenvalues();
}

int count_negative(const Eigen::VectorXd& v) { return int((v.array() < 0.0).count()); }

Eigenvalue polish_record(const Problem& pb, cplx z) {
  const Eigen::Index n = pb.dim();
  const NearKernel nk =
      near_kernel(Eigen::MatrixXcd::Identity(n, n) + pb.Q(z).entries);
  return Eigenvalue{z, nk.smallest_sv, nk.right, nk.left};
}

// Eigenvalue of I + Q(z) closest to `target`.
cplx nearest_eig(const Problem& pb, cplx z, cplx target) {
  const Eigen::Index n = pb.dim();
  const Eigen::VectorXcd ev =
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(Eigen::MatrixXcd::Identity(n, n) + pb.Q(z).entries,
                                                  false)
          .eigenvalues();
  Eigen::Index best = 0;
  (ev.array() - target).abs().minCoeff(&best);
  return ev[best];
}

double wrap(double d) {
  while (d > pi) d -= 2 * pi;
  while (d <= -pi) d += 2 * pi;
  return d;
}

struct Rect {
  double x0, x1, y0, y1;
};

}  // namespace

double eigenvalue_ceiling(const Problem& pb) {
  double cmax = 0.0;
  for (const auto& s : pb.profile.segments()) cmax = std::max(cmax, s.value);
  return 1.01 * cmax * pb.kernel.norm();
}

SpectrumResult discrete_spectrum_isotropic(const Problem& pb, double eps_lo, double eps_hi,
                                           double tol) {
  if (!pb.isotropic()) throw DomainError("discrete_spectrum_isotropic: isotropic kernel required");
  if (!(eps_lo > 0.0) || !(eps_hi > eps_lo))
    throw ConfigError("eps_range", "requires 0 < lo < hi");
  SpectrumResult out;
  if (pb.profile.is_zero()) return out;

  const Eigen::VectorXd lo = shifted_eigs(pb, eps_lo);
  const Eigen::VectorXd hi = shifted_eigs(pb, eps_hi);
  const int m_lo = count_negative(lo);
  const int m_hi = count_negative(hi);
  if (m_hi > 0) {
    std::ostringstream os;
    os << m_hi << " eigenvalue curve(s) still negative at eps = " << eps_hi
       << "; widen the range upward";
    out.notices.push_back(os.str());
  }
  if (m_lo == 0) {
    std::ostringstream os;
    os << "no crossing in [" << eps_lo << ", " << eps_hi
       << "]; a weak-coupling eigenvalue below eps = " << eps_lo << " is not excluded";
    out.notices.push_back(os.str());
  }
  // Curve j (ascending) crosses zero exactly once; larger j cross at smaller eps.
  for (int j = m_hi; j < m_lo; ++j) {
    auto f = [&](double t) { return shifted_eigs(pb, std::exp(t))[j]; };
    boost::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(
        f, std::log(eps_lo), std::log(eps_hi), lo[j], hi[j],
        [tol](double a, double b) { return std::abs(a - b) <= tol; }, iters);
    const double beta = std::exp(0.5 * (root.first + root.second));
    out.eigenvalues.push_back(polish_record(pb, cplx(0.0, beta)));
  }
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(),
            [](const Eigenvalue& a, const Eigenvalue& b) { return a.z.imag() > b.z.imag(); });
  return out;
}

LogDet log_det(const Eigen::MatrixXcd& a) {
  LogDet r;
  if (a.rows() == 0) return r;
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  double phase = lu.permutationP().determinant() < 0 ? pi : 0.0;
  const auto& m = lu.matrixLU();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const cplx u = m(i, i);
    r.log_abs += std::log(std::abs(u));
    phase = wrap(phase + std::arg(u));
  }
  r.phase = phase;
  return r;
}

namespace {

class DetPhase {
public:
  explicit DetPhase(const Problem& pb) : pb_(pb) {}
  double operator()(cplx z) {
    ++evaluations;
    const Eigen::Index n = pb_.dim();
    return log_det(Eigen::MatrixXcd::Identity(n, n) + pb_.Q(z).entries).phase;
  }
  cplx log_derivative(cplx z, double h) {
    const Eigen::Index n = pb_.dim();
    const auto id = Eigen::MatrixXcd::Identity(n, n);
    const LogDet p = log_det(id + pb_.Q(z + h).entries);
    const LogDet m = log_det(id + pb_.Q(z - h).entries);
    return cplx(p.log_abs - m.log_abs, wrap(p.phase - m.phase)) / (2.0 * h);
  }
  int evaluations = 0;

private:
  const Problem& pb_;
};

// Phase increment of det along the straight segment a -> b.
double edge_increment(DetPhase& phase, cplx a, cplx b, int& budget) {
  const int start = 16;
  std::function<double(cplx, double, cplx, double, int)> refine =
      [&](cplx za, double pa, cplx zb, double pb, int depth) -> double {
    const double d = wrap(pb - pa);
    if (std::abs(d) < 0.5 * pi) return d;
    if (budget-- <= 0 || depth > 40)
      throw NumericalError("winding_number: sample budget exhausted near a zero of det");
    const cplx zm = 0.5 * (za + zb);
    const double pm = phase(zm);
    return refine(za, pa, zm, pm, depth + 1) + refine(zm, pm, zb, pb, depth + 1);
  };
  double total = 0.0;
  cplx za = a;
  double pa = phase(za);
  for (int i = 1; i <= start; ++i) {
    const cplx zb = a + (b - a) * (double(i) / start);
    const double pb = phase(zb);
    total += refine(za, pa, zb, pb, 0);
    za = zb;
    pa = pb;
  }
  return total;
}

int winding(DetPhase& phase, const Rect& r, int budget) {
  const cplx c0(r.x0, r.y0), c1(r.x1, r.y0), c2(r.x1, r.y1), c3(r.x0, r.y1);
  const double total = edge_increment(phase, c0, c1, budget) + edge_increment(phase, c1, c2, budget) +
                       edge_increment(phase, c2, c3, budget) + edge_increment(phase, c3, c0, budget);
  const double w = total / (2 * pi);
  if (std::abs(w - std::round(w)) > 0.1)
    throw NumericalError("winding_number: non-integer winding", w);
  return int(std::lround(w));
}

}  // namespace

int winding_number(const Problem& pb, const Contour& c, int max_samples) {
  if (!(c.im_lo > 0.0) || !(c.im_hi > c.im_lo) || !(c.re_hi > c.re_lo))
    throw ConfigError("contour", "rectangle must lie in the open upper half plane");
  if (pb.profile.is_zero()) return 0;
  DetPhase phase(pb);
  return winding(phase, {c.re_lo, c.re_hi, c.im_lo, c.im_hi}, max_samples);
}

SpectrumResult discrete_spectrum_general(const Problem& pb, const Contour& c, double size_tol,
                                         double newton_tol) {
  SpectrumResult out;
  if (winding_number(pb, c) == 0) return out;
  DetPhase phase(pb);
  // Off-centre split so symmetric problems never place a zero on a cut line.
  constexpr double split = 0.5 + 0.0731;
  std::vector<std::pair<Rect, int>> work{{{c.re_lo, c.re_hi, c.im_lo, c.im_hi}, -1}};
  std::vector<std::pair<Rect, int>> leaves;
  while (!work.empty()) {
    auto [r, n] = work.back();
    work.pop_back();
    if (n < 0) n = winding(phase, r, 4096);
    if (n == 0) continue;
    const double w = r.x1 - r.x0, h = r.y1 - r.y0;
    if (std::max(w, h) <= size_tol * std::max(1.0, std::abs(cplx(r.x1, r.y1)))) {
      leaves.push_back({r, n});
      continue;
    }
    std::vector<Rect> parts;
    if (w >= h) {
      const double xm = r.x0 + split * w;
      parts = {{r.x0, xm, r.y0, r.y1}, {xm, r.x1, r.y0, r.y1}};
    } else {
      const double ym = r.y0 + split * h;
      parts = {{r.x0, r.x1, r.y0, ym}, {r.x0, r.x1, ym, r.y1}};
    }
    int sum = 0;
    std::vector<int> counts;
    for (const Rect& p : parts) {
      counts.push_back(winding(phase, p, 4096));
      sum += counts.back();
    }
    if (sum != n) throw NumericalError("discrete_spectrum_general: inconsistent winding split");
    for (std::size_t i = 0; i < parts.size(); ++i)
      if (counts[i] > 0) work.push_back({parts[i], counts[i]});
  }

  for (const auto& [r, n] : leaves) {
    cplx z(0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1));
    const double scale = std::max(1.0, std::abs(z));
    // Newton on ln det until close, then on the small eigenvalue of I + Q(z),
    // which stays smooth where the finite-difference log derivative loses accuracy.
    bool close = false;
    for (int it = 0; it < 60 && z.imag() > 0.0; ++it) {
      const cplx step = double(n) / phase.log_derivative(z, 1e-6 * std::max(std::abs(z), 1e-3));
      z -= step;
      if (std::abs(step) <= 1e-5 * scale) {
        close = true;
        break;
      }
    }
    bool converged = close && n > 1;
    if (close && n == 1) {
      const double h = 1e-7 * scale;
      for (int it = 0; it < 30 && z.imag() > 0.0; ++it) {
        const cplx mu = nearest_eig(pb, z, 0.0);
        const cplx d = (nearest_eig(pb, z + h, mu) - nearest_eig(pb, z - h, mu)) / (2.0 * h);
        const cplx step = mu / d;
        z -= step;
        if (std::abs(step) <= newton_tol * scale) {
          converged = true;
          break;
        }
      }
    }
    if (z.imag() <= 0.0) converged = false;
    if (!converged) {
      std::ostringstream os;
      os << "Newton did not converge from (" << 0.5 * (r.x0 + r.x1) << ", "
         << 0.5 * (r.y0 + r.y1) << "); rectangle centre reported";
      out.notices.push_back(os.str());
      z = cplx(0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1));
    }
    if (n > 1) out.notices.push_back("zero of multiplicity " + std::to_string(n) + " (cluster)");
    out.eigenvalues.push_back(polish_record(pb, z));
  }
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(),
            [](const Eigenvalue& a, const Eigenvalue& b) { return a.z.imag() > b.z.imag(); });
  return out;
}

}  // namespace slab
