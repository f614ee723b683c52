#pragma once

#include "slab/discretize.hpp"
#include "slab/errors.hpp"

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

namespace slab {

// A physical problem on one grid level.
struct Problem {
  Profile profile;
  CollisionKernel kernel = CollisionKernel::isotropic();
  GridSpec grid;

  bool isotropic() const { return kernel.mode() == CollisionKernel::Mode::isotropic; }
  int dim() const { return grid.n_cells() * kernel.size(); }
  ComplexOperator Q(cplx z) const { return assemble_Q(z, grid, kernel); }
};

Problem make_problem(const Profile& profile, const CollisionKernel& kernel, int n_cells);

// ---------------------------------------------------------------------------
// Characteristic function

// Thrown when I -+ Q(z) is numerically singular; carries the near-kernel vector.
class SingularSolve : public NumericalError {
public:
  SingularSolve(const std::string& what, double smallest_sv, Eigen::VectorXcd v)
      : NumericalError(what, smallest_sv), vector_(std::move(v)) {}
  const Eigen::VectorXcd& near_kernel() const noexcept { return vector_; }

private:
  Eigen::VectorXcd vector_;
};

// Smallest singular triple of a square matrix. `singular` applies the
// relative threshold 1e-8 * largest singular value.
struct NearKernel {
  double smallest_sv = 0.0;
  double largest_sv = 0.0;
  Eigen::VectorXcd right;  // A right ~ 0
  Eigen::VectorXcd left;   // left^* A ~ 0
  bool singular = false;
};
NearKernel near_kernel(const Eigen::MatrixXcd& a);

inline constexpr double kernel_threshold = 1e-8;

struct CharValue {
  ComplexOperator value;
  double condition = 0.0;  // 2-norm condition number of the matrix that was solved
};

// S = (I - Q)^{-1} (I + Q).
CharValue char_fn(const ComplexOperator& q);
CharValue char_fn(cplx z, const Problem& pb);
// S^{-1} = -I + 2 (I + Q)^{-1}.
CharValue char_fn_inv(const ComplexOperator& q);
CharValue char_fn_inv(cplx z, const Problem& pb);

// Largest admissible delta for the S(0) construction:
// min{1/(2a), c_n / (a |K|^2 |c|_1^2)}, a = diameter of supp c.
double admissible_delta(const Profile& profile, const CollisionKernel& kernel, double c_n = 1.0);

struct SZero {
  Eigen::MatrixXcd value;      // S(0)
  double delta = 0.0;
  double delta_bound = 0.0;
  cplx vartheta = 0.0;         // <(I - Q~(i delta))^{-1} ell, ell>
  Eigen::VectorXcd a_ell;      // (I - Q~(i delta))^{-1} ell
  Eigen::VectorXcd a_star_ell; // (I - Q~(i delta)^*)^{-1} ell
};
// Throws DomainError when delta exceeds the admissible bound.
SZero s_zero(const Problem& pb, double delta, double c_n = 1.0);

// ---------------------------------------------------------------------------
// Discrete spectrum

struct Eigenvalue {
  cplx z;
  double residual = 0.0;       // smallest singular value of I + Q(z)
  Eigen::VectorXcd right;      // (I + Q(z)) right ~ 0
  Eigen::VectorXcd left;       // left^* (I + Q(z)) ~ 0
};

struct SpectrumResult {
  std::vector<Eigenvalue> eigenvalues;
  std::vector<std::string> notices;
};

// Zeros i beta of det(I + Q(i eps)) for eps in [eps_lo, eps_hi] by bisection on
// the (monotone) eigenvalue curves of the real symmetric I + Q(i eps).
SpectrumResult discrete_spectrum_isotropic(const Problem& pb, double eps_lo, double eps_hi,
                                           double tol = 1e-12);
// Default search window: [eps_lo, 1.01 max c |K|].
double eigenvalue_ceiling(const Problem& pb);

struct Contour {
  double re_lo = -1.0;
  double re_hi = 1.0;
  double im_lo = 1e-3;
  double im_hi = 1.0;
};

struct LogDet {
  double log_abs = 0.0;
  double phase = 0.0;  // in (-pi, pi]
};
LogDet log_det(const Eigen::MatrixXcd& a);

// Winding number of det(I + Q) along the rectangle boundary; adjacent samples
// are refined until the phase increment is below pi/2.
int winding_number(const Problem& pb, const Contour& c, int max_samples = 4096);

// Argument principle + bisection of the rectangle + Newton polishing.
SpectrumResult discrete_spectrum_general(const Problem& pb, const Contour& c,
                                         double size_tol = 1e-3, double newton_tol = 1e-12);

// ---------------------------------------------------------------------------
// B_c, eta flow and the kappa scan

struct EtaFlow {
  std::vector<double> eps;
  Eigen::MatrixXd eta;            // eta(i, n): n-th branch at eps[i], matched by overlap
  std::vector<std::string> flags; // ambiguous matches
};
// Eigenvalues of Q~(i eps) tracked across the eps list (isotropic).
EtaFlow eta_flow(const Problem& pb, const std::vector<double>& eps);

struct BcPoint {
  double k = 0.0;
  double error = 0.0;
};
// Limits of the branches that stay bounded, fitted as eta ~ k + b / ln eps
// over the last three eps values; the branch escaping to -infinity is dropped.
std::vector<BcPoint> bc_set(const EtaFlow& flow);

// Exact eps -> 0 limits on the grid: eigenvalues of B compressed to the
// orthogonal complement of ell (ascending).
Eigen::VectorXd bc_compressed(const Problem& pb);

struct CriticalKappa {
  double kappa = 0.0;
  double error = 0.0;
  std::vector<double> per_level;  // -1/k_n on each grid level
};
struct KappaScan {
  std::vector<int> levels;
  std::vector<CriticalKappa> critical;
};
// kappa with kappa * shape in the singular set, from negative B_c points,
// Richardson-extrapolated over the grid levels (ascending cell counts).
KappaScan kappa_scan(const Profile& shape, const std::vector<int>& levels, double kappa_lo,
                     double kappa_hi);

// n-th critical amplitude (1-based, ascending) on the problem's own grid.
double grid_critical_kappa(const Problem& unit, int n);

// ---------------------------------------------------------------------------
// Classification of the singularity at 0 (isotropic)

enum class Singularity { none, logarithmic, first_order, unresolved };
std::string to_string(Singularity s);

struct NSubspace {
  Eigen::MatrixXd basis;          // orthonormal columns spanning N
  Eigen::MatrixXd kernel_basis;   // orthonormal columns spanning ker(I + Y) within tol
  std::vector<double> near_eigs;  // eigenvalues of I + Y within 10 tol
  int dim = 0;
  bool ambiguous = false;
  int alt_dim = 0;                // candidate dimension when the cluster straddles tol
};
NSubspace n_subspace(const Problem& pb, double tol);

struct LogCoefficients {
  double xi = 1.0;
  Eigen::MatrixXcd G;
  Eigen::VectorXcd e_tilde;
  cplx rho = 0.0;                 // <e~, sqrt c>
  double distance = 0.0;          // dist(-1, sigma(Q~(i xi)))
};

struct SimpleCoefficients {
  Eigen::MatrixXd M;              // P_N Y1 on N, in the basis of N
  Eigen::MatrixXd pole;           // M^{-1} P_N as an operator on E
  Eigen::MatrixXd Lambda;         // ((I + Y) on N^perp)^{-1}, zero on N
  double vartheta = 0.0;
  Eigen::MatrixXd B0;
  Eigen::MatrixXd log_term;       // coefficient of -ln(iz) when vartheta = 0
  double shift_delta = 1.0;       // Y replaced by Y + 1/2 ln(delta) <., sqrt c> sqrt c when != 1
};

struct Classification {
  Singularity kind = Singularity::none;
  bool in_E = false;
  double margin = 0.0;            // min_n |1 + k_n| over compressed B_c points
  double tol = 0.0;
  NSubspace N;
  std::optional<LogCoefficients> log;
  std::optional<SimpleCoefficients> simple;
};
Classification classify_singularity(const Problem& pb, double tol);

// ---------------------------------------------------------------------------
// Asymptotics at z = 0

enum class Formula { este0, Slog, Ssimple_pole, Ssimple_vartheta0, power_order };
std::string to_string(Formula f);
Formula formula_from_string(const std::string& s);

struct RayFit {
  double arg = 0.0;
  std::vector<double> radius;
  std::vector<double> residual;   // raw residual norms
  double exponent = 0.0;          // fitted on residual / predicted log factor
  double exponent_stderr = 0.0;
  bool floor_reached = false;
  double floor = 0.0;
};

struct AsymptoticsReport {
  Formula formula = Formula::este0;
  double predicted = 1.0;         // expected exponent
  std::vector<RayFit> rays;
  double pole_relative_error = 0.0;  // Ssimple_pole only, at the smallest radius on arg pi/2
};

AsymptoticsReport asymptotics_fit(const Problem& pb, Formula f, const std::vector<double>& args,
                                  const std::vector<double>& radii, double tol = 1e-6,
                                  double delta = 0.0);

// Least-squares slope of log y against log x with its standard error.
struct LogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};
LogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Splitting diagnostic

struct SingularValueProfile {
  std::vector<double> k;
  std::vector<Eigen::VectorXd> svals;   // singular values of S(k), descending
  std::vector<int> x1_dim;              // eigenvalues of S^* S below beta^2
  std::vector<int> ker_dim;             // singular values below 1e-8 * largest
  std::vector<int> delta_rank;          // eigenvalues of S^* S below 1 - 1e-6
  int max_ker_dim = 0;
  int max_x1_dim = 0;
};
SingularValueProfile ac_splitting_profile(const Problem& pb, const std::vector<double>& k,
                                          double beta);

}  // namespace slab
