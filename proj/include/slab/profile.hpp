#pragma once

#include <Eigen/Core>

#include <vector>

namespace slab {

// Piecewise-constant cross-section c(x) >= 0 with compact support.
struct Segment {
  double x0 = 0.0;
  double x1 = 0.0;
  double value = 0.0;
};

class Profile {
public:
  Profile() = default;
  // Segments must be ordered, disjoint, with x0 < x1 and value >= 0.
  explicit Profile(std::vector<Segment> segments);

  // kappa * indicator[-half_width, half_width]
  static Profile step(double kappa, double half_width = 1.0);

  const std::vector<Segment>& segments() const noexcept { return segments_; }
  Profile scaled(double kappa) const;

  bool is_zero() const noexcept { return zero_; }
  double value_at(double x) const;
  double support_lo() const noexcept { return lo_; }
  double support_hi() const noexcept { return hi_; }
  // Half the diameter of supp c.
  double radius() const noexcept { return 0.5 * (hi_ - lo_); }
  // Full diameter of supp c (the `a` of the admissible-delta bound).
  double diameter() const noexcept { return hi_ - lo_; }
  // |c|_1
  double l1_norm() const noexcept;

private:
  std::vector<Segment> segments_;
  double lo_ = 0.0;
  double hi_ = 0.0;
  bool zero_ = true;
};

// Polynomial with ascending monomial coefficients.
struct Polynomial {
  Eigen::VectorXd coeffs;

  double operator()(double x) const;
  int degree() const { return int(coeffs.size()) - 1; }
  Polynomial operator*(const Polynomial& o) const;
  // int_{-1}^{1} p(mu) q(mu) dmu
  static double inner(const Polynomial& p, const Polynomial& q);
};

// sqrt((2n+1)/2) P_n, orthonormal on [-1, 1].
Polynomial normalized_legendre(int n);

struct KernelTerm {
  double k = 1.0;  // K = sum k_i^2 <., P_i> P_i
  Polynomial poly;
};

class CollisionKernel {
public:
  enum class Mode { isotropic, polynomial };

  // K = 1/2 <., 1> 1, i.e. one term k = 1, P = 1/sqrt(2).
  static CollisionKernel isotropic();
  // Validates orthonormality (1e-12), K 1 proportional to 1, and G_0 != 0.
  static CollisionKernel polynomial(std::vector<KernelTerm> terms);

  Mode mode() const noexcept { return mode_; }
  const std::vector<KernelTerm>& terms() const noexcept { return terms_; }
  int size() const noexcept { return int(terms_.size()); }
  int max_degree() const;
  // Operator norm of K on L^2(-1, 1): max k_i^2.
  double norm() const;

  // Gram matrix <P_i, P_j>.
  Eigen::MatrixXd gram() const;
  // Vector (k_i P_i(0)), the angular factor of ell = sqrt(c) * script-P.
  Eigen::VectorXd ell_weights() const;
  // a[j](m, n): coefficient of u^j in k_m k_n P_m(u) P_n(u); j = 0..2*max_degree.
  std::vector<Eigen::MatrixXd> product_coefficients() const;
  // G_j = (-1)^j a[j], so that Q(z) = sum_j T_j(z) (x) G_j with
  // T_j kernel -sqrt c(x) sign(x-y)^j E_j(-iz|x-y|) sqrt c(y), and G_0 = {k_m k_n P_m(0) P_n(0)}.
  std::vector<Eigen::MatrixXd> expansion_matrices() const;
  // J K J^*, i.e. terms with P_i(-mu).
  CollisionKernel reflected() const;

private:
  Mode mode_ = Mode::isotropic;
  std::vector<KernelTerm> terms_;
};

struct Cell {
  double x0 = 0.0;
  double x1 = 0.0;
  double mid() const { return 0.5 * (x0 + x1); }
  double width() const { return x1 - x0; }
};

// Piecewise-constant Galerkin mesh on supp c. Functions in E are represented
// by coefficients in the orthonormal basis 1_cell / sqrt(width), ordered
// cell-major and collision-basis-index minor: index = cell * N + i.
struct GridSpec {
  std::vector<Cell> cells;
  Eigen::VectorXd sqrt_c;  // sqrt of c on each cell

  int n_cells() const { return int(cells.size()); }
  Eigen::VectorXd nodes() const;
  Eigen::VectorXd weights() const;
};

// Cells of (nearly) equal width tiling the positive-value segments of c;
// every such segment receives at least one cell.
GridSpec make_grid(const Profile& profile, int n_cells);

// Coordinates of sqrt(c) in the cell basis.
Eigen::VectorXd sqrt_c_vector(const GridSpec& grid);
// Coordinates of ell = sqrt(c) (k_i P_i(0))_i in E.
Eigen::VectorXd ell_vector(const GridSpec& grid, const CollisionKernel& kernel);

// Cell pairs sharing geometry (left width, right width, gap) share every
// translation-invariant pair integral. `cls(p, q)` indexes `classes`;
// `right(p, q)` is true when cell q lies to the right of (or equals) cell p.
struct PairClass {
  double left_width = 0.0;
  double right_width = 0.0;
  double gap = 0.0;
  bool same = false;
};

struct PairTable {
  std::vector<PairClass> classes;
  Eigen::MatrixXi cls;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> right;
};

PairTable make_pair_table(const GridSpec& grid);

}  // namespace slab
