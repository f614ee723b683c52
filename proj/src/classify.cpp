#include "slab/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include <cmath>

namespace slab {

namespace {

// Orthonormal basis of the orthogonal complement of span(a) (a has orthonormal columns).
Eigen::MatrixXd complement(const Eigen::MatrixXd& a, Eigen::Index n) {
  if (a.cols() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return q.rightCols(n - a.cols());
}

LogCoefficients log_coefficients(const Problem& pb) {
  const Eigen::MatrixXd y = assemble_Y(pb.grid).entries;
  const Eigen::VectorXd s = sqrt_c_vector(pb.grid);
  const Eigen::Index n = y.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  LogCoefficients best;
  for (double xi : {1.0, 0.5, 2.0}) {
    const Eigen::MatrixXd qt = y + 0.5 * std::log(xi) * s * s.transpose();
    const Eigen::VectorXd ev =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(qt, Eigen::EigenvaluesOnly).eigenvalues();
    const double dist = (ev.array() + 1.0).abs().minCoeff();
    if (xi != 1.0 && dist <= best.distance) continue;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(id + qt);
    const Eigen::MatrixXd r = lu.solve(id);
    best.xi = xi;
    best.distance = dist;
    best.G = ((id - qt) * r).cast<cplx>();
    best.e_tilde = (r * s).cast<cplx>();
    best.rho = best.e_tilde.dot(s.cast<cplx>());
    if (dist >= 0.01) break;
  }
  return best;
}

SimpleCoefficients simple_coefficients(const Problem& pb, const NSubspace& ns, double tol) {
  const Eigen::MatrixXd y0 = assemble_Y(pb.grid).entries;
  const Eigen::MatrixXd y1 = assemble_Y1(pb.grid).entries;
  const Eigen::VectorXd s = sqrt_c_vector(pb.grid);
  const Eigen::Index n = y0.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd& nb = ns.basis;
  const Eigen::MatrixXd ob = complement(nb, n);

  SimpleCoefficients sc;
  const Eigen::MatrixXd m0 = nb.transpose() * y1 * nb;
  sc.pole = nb * m0.partialPivLu().solve(nb.transpose());

  // (I + Y) restricted to N^perp; shift Y by a multiple of <., sqrt c> sqrt c if singular.
  auto restricted_min = [&](const Eigen::MatrixXd& y) {
    const Eigen::MatrixXd r = ob.transpose() * (id + y) * ob;
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (r + r.transpose()),
                                                          Eigen::EigenvaluesOnly)
        .eigenvalues()
        .cwiseAbs()
        .minCoeff();
  };
  Eigen::MatrixXd y = y0;
  sc.shift_delta = 1.0;
  if (ob.cols() > 0 && restricted_min(y0) <= tol) {
    sc.shift_delta = 0.5;
    y = y0 + 0.5 * std::log(sc.shift_delta) * s * s.transpose();
  }
  const Eigen::MatrixXd y1w = sc.shift_delta * y1;
  sc.M = nb.transpose() * y1w * nb;
  const Eigen::MatrixXd pole_w = nb * sc.M.partialPivLu().solve(nb.transpose());

  const Eigen::MatrixXd r = ob.transpose() * (id + y) * ob;
  sc.Lambda = ob * r.partialPivLu().solve(ob.transpose());
  sc.vartheta = s.dot(sc.Lambda * s);
  const Eigen::MatrixXd left = id - pole_w * y1w;
  const Eigen::MatrixXd right = (id - nb * nb.transpose()) * (id - y1w * pole_w);
  const Eigen::VectorXd ls = sc.Lambda * s;
  const Eigen::VectorXd lts = sc.Lambda.transpose() * s;
  sc.log_term = left * ls * lts.transpose();
  if (std::abs(sc.vartheta) > tol * std::max(1.0, s.squaredNorm())) {
    // Eliminating the rank-one log term leaves the -1/vartheta correction.
    sc.B0 = -id + 2.0 * left * (sc.Lambda - ls * lts.transpose() / sc.vartheta) * right;
  } else {
    sc.B0 = -id + 2.0 * left * sc.Lambda * right;
  }
  return sc;
}

}  // namespace

std::string to_string(Singularity s) {
  switch (s) {
    case Singularity::none: return "none";
    case Singularity::logarithmic: return "logarithmic";
    case Singularity::first_order: return "first_order";
    case Singularity::unresolved: return "unresolved";
  }
  return "unresolved";
}

NSubspace n_subspace(const Problem& pb, double tol) {
  if (!pb.isotropic()) throw DomainError("n_subspace: isotropic kernel required");
  NSubspace ns;
  const Eigen::Index n = pb.dim();
  if (pb.profile.is_zero() || n == 0) {
    ns.basis.resize(n, 0);
    ns.kernel_basis.resize(n, 0);
    return ns;
  }
  const Eigen::MatrixXd y = assemble_Y(pb.grid).entries;
  const Eigen::VectorXd s = sqrt_c_vector(pb.grid);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      Eigen::MatrixXd::Identity(n, n) + 0.5 * (y + y.transpose()));
  std::vector<Eigen::Index> ker;
  int wide = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = es.eigenvalues()[i];
    if (std::abs(mu) <= 10.0 * tol) {
      ns.near_eigs.push_back(mu);
      ++wide;
    }
    if (std::abs(mu) <= tol) ker.push_back(i);
  }
  ns.kernel_basis.resize(n, Eigen::Index(ker.size()));
  for (std::size_t j = 0; j < ker.size(); ++j) ns.kernel_basis.col(j) = es.eigenvectors().col(ker[j]);

  // N = kernel vectors orthogonal to sqrt c.
  auto n_from = [&](const Eigen::MatrixXd& k) -> Eigen::MatrixXd {
    if (k.cols() == 0) return Eigen::MatrixXd(n, 0);
    const Eigen::VectorXd w = k.transpose() * s;
    if (w.norm() <= std::sqrt(tol) * s.norm()) return k;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(k.cols(), k.cols());
    return k * q.rightCols(k.cols() - 1);
  };
  ns.basis = n_from(ns.kernel_basis);
  ns.dim = int(ns.basis.cols());
  if (wide != int(ker.size())) {
    Eigen::MatrixXd kw(n, wide);
    int j = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(es.eigenvalues()[i]) <= 10.0 * tol) kw.col(j++) = es.eigenvectors().col(i);
    ns.alt_dim = int(n_from(kw).cols());
    ns.ambiguous = ns.alt_dim != ns.dim;
  } else {
    ns.alt_dim = ns.dim;
  }
  return ns;
}

Classification classify_singularity(const Problem& pb, double tol) {
  if (!pb.isotropic()) throw DomainError("classify_singularity: isotropic kernel required");
  Classification out;
  out.tol = tol;
  out.N = n_subspace(pb, tol);
  if (pb.profile.is_zero()) return out;
  const Eigen::VectorXd k = bc_compressed(pb);
  out.margin = (k.array() + 1.0).abs().minCoeff();
  out.in_E = out.margin <= tol;
  if (!out.in_E) {
    out.kind = out.margin <= 10.0 * tol ? Singularity::unresolved : Singularity::none;
    return out;
  }
  if (out.N.dim == 0) {
    out.kind = Singularity::logarithmic;
    out.log = log_coefficients(pb);
  } else {
    out.kind = Singularity::first_order;
    out.simple = simple_coefficients(pb, out.N, tol);
  }
  if (out.N.ambiguous) out.kind = Singularity::unresolved;
  return out;
}

}  // namespace slab
