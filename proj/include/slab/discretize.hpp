#pragma once

#include "slab/profile.hpp"

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <functional>

namespace slab {

using cplx = std::complex<double>;

enum class OperatorLabel { Q, Qtilde, Y, Y1, Theta, S, Sinv };

// A discretized operator on E with the grid it lives on. `basis_size` is the
// number N of collision polynomials; entries are (n_cells * N)^2.
template <typename Scalar>
struct OperatorMatrix {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix entries;
  GridSpec grid;
  int basis_size = 1;
  OperatorLabel label = OperatorLabel::Q;

  Eigen::Index dim() const { return entries.rows(); }
};

using ComplexOperator = OperatorMatrix<cplx>;
using RealOperator = OperatorMatrix<double>;

// int_p int_q ln|x - y| dx dy, exact.
double cell_log_moment(const Cell& p, const Cell& q);
// int_p int_q |x - y| dx dy, exact.
double cell_abs_moment(const Cell& p, const Cell& q);

// Isotropic Q(z), z off the cut {-it, t > 0}: kernel -1/2 sqrt c E(-iz|x-y|) sqrt c.
// Split as Y + 1/2 ln(-iz) <., sqrt c> sqrt c - (entire remainder).
ComplexOperator assemble_Q_isotropic(cplx z, const GridSpec& grid);

struct DirectOptions {
  int nodes_per_panel = 8;   // doubled until the entrywise change is below tol
  double tol = 1e-8;
  int max_doublings = 4;
};

// Q(z) = i sqrt V (L_0 - z)^{-1} sqrt V by quadrature of the resolvent kernel
// over the angular variable, Im z >= 0, z != 0. The x-integrals over cell
// pairs are done in closed form for each angle; the angular integral runs
// over t = 1/mu on a ray in the complex t plane where the integrand decays.
ComplexOperator assemble_Q_direct(cplx z, const GridSpec& grid, const CollisionKernel& kernel,
                                  const DirectOptions& opt = {});

// Q(z) = sum_j T_j(z) (x) G_j with T_j built from E_j(-iz|x-y|), z in the cut plane.
// The first call for a given kernel checks the result against assemble_Q_direct
// on a small grid and throws NumericalError on disagreement above 1e-6.
ComplexOperator assemble_Q_expansion(cplx z, const GridSpec& grid, const CollisionKernel& kernel);

// Isotropic kernels use the closed-form path, polynomial kernels the expansion path.
ComplexOperator assemble_Q(cplx z, const GridSpec& grid, const CollisionKernel& kernel);

// The z-independent part B of Q~(z) = ln(-iz) <., ell> ell + B. Real; equal to Y
// for the isotropic kernel.
RealOperator assemble_B(const GridSpec& grid, const CollisionKernel& kernel);
ComplexOperator assemble_Qtilde(cplx z, const GridSpec& grid, const CollisionKernel& kernel);
// Theta(z) = Q(z) - Q~(z).
ComplexOperator assemble_Theta(cplx z, const GridSpec& grid, const CollisionKernel& kernel);

// Kernels 1/2 sqrt c (gamma + ln|x-y|) sqrt c and 1/2 sqrt c |x-y| sqrt c.
RealOperator assemble_Y(const GridSpec& grid);
RealOperator assemble_Y1(const GridSpec& grid);

// Projection coefficients of a function f(x) onto the cell basis (cell averages
// times sqrt(width)); used to move smooth test functions onto a grid.
Eigen::VectorXd project_onto_cells(const GridSpec& grid, const std::function<double(double)>& f);

}  // namespace slab
