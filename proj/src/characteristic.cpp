#include "slab/spectra.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <limits>

namespace slab {

Problem make_problem(const Profile& profile, const CollisionKernel& kernel, int n_cells) {
  return Problem{profile, kernel, make_grid(profile, n_cells)};
}

NearKernel near_kernel(const Eigen::MatrixXcd& a) {
  NearKernel nk;
  if (a.rows() == 0) return nk;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const Eigen::Index last = s.size() - 1;
  nk.largest_sv = s[0];
  nk.smallest_sv = s[last];
  nk.right = svd.matrixV().col(last);
  nk.left = svd.matrixU().col(last);
  nk.singular = nk.smallest_sv < kernel_threshold * nk.largest_sv;
  return nk;
}

namespace {

// Solves a X = rhs after checking a is numerically regular; cond is reported.
Eigen::MatrixXcd checked_solve(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& rhs,
                               double& cond, const char* what) {
  const NearKernel nk = near_kernel(a);
  cond = nk.smallest_sv > 0.0 ? nk.largest_sv / nk.smallest_sv
                              : std::numeric_limits<double>::infinity();
  if (nk.singular) throw SingularSolve(what, nk.smallest_sv, nk.right);
  return a.partialPivLu().solve(rhs);
}

}  // namespace

CharValue char_fn(const ComplexOperator& q) {
  const Eigen::Index n = q.dim();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  CharValue out;
  out.value.grid = q.grid;
  out.value.basis_size = q.basis_size;
  out.value.label = OperatorLabel::S;
  out.value.entries = checked_solve(id - q.entries, id + q.entries, out.condition,
                                    "char_fn: I - Q(z) is singular");
  return out;
}

CharValue char_fn(cplx z, const Problem& pb) { return char_fn(pb.Q(z)); }

CharValue char_fn_inv(const ComplexOperator& q) {
  const Eigen::Index n = q.dim();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  CharValue out;
  out.value.grid = q.grid;
  out.value.basis_size = q.basis_size;
  out.value.label = OperatorLabel::Sinv;
  out.value.entries = -id + 2.0 * checked_solve(id + q.entries, id, out.condition,
                                                "char_fn_inv: I + Q(z) is singular");
  return out;
}

CharValue char_fn_inv(cplx z, const Problem& pb) { return char_fn_inv(pb.Q(z)); }

double admissible_delta(const Profile& profile, const CollisionKernel& kernel, double c_n) {
  const double a = profile.diameter();
  const double k = kernel.norm();
  const double c1 = profile.l1_norm();
  if (a <= 0.0 || c1 <= 0.0) return std::numeric_limits<double>::infinity();
  return std::min(1.0 / (2.0 * a), c_n / (a * k * k * c1 * c1));
}

SZero s_zero(const Problem& pb, double delta, double c_n) {
  SZero out;
  out.delta = delta;
  out.delta_bound = admissible_delta(pb.profile, pb.kernel, c_n);
  if (!(delta > 0.0) || delta > out.delta_bound)
    throw DomainError("s_zero: delta = " + std::to_string(delta) +
                      " outside (0, min{1/(2a), C_N/(a |K|^2 |c|_1^2)}] = (0, " +
                      std::to_string(out.delta_bound) + "]");
  const int n = pb.dim();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  if (pb.profile.is_zero()) {
    out.value = id;
    return out;
  }
  const Eigen::MatrixXcd a = id - assemble_Qtilde(cplx(0.0, delta), pb.grid, pb.kernel).entries;
  const Eigen::VectorXcd ell = ell_vector(pb.grid, pb.kernel).cast<cplx>();
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  out.a_ell = lu.solve(ell);
  out.a_star_ell = a.adjoint().partialPivLu().solve(ell);
  out.vartheta = ell.dot(out.a_ell);
  if (std::abs(out.vartheta) == 0.0) throw NumericalError("s_zero: vartheta vanishes");
  out.value = -id + 2.0 * lu.solve(id) - (2.0 / out.vartheta) * out.a_ell * out.a_star_ell.adjoint();
  return out;
}

}  // namespace slab
