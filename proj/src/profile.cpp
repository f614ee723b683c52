#include "slab/profile.hpp"

#include "slab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace slab {

Profile::Profile(std::vector<Segment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw ConfigError("profile.segments", "at least one segment required");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    const std::string field = "profile.segments[" + std::to_string(i) + "]";
    if (!(s.x0 < s.x1)) throw ConfigError(field, "x0 < x1 required");
    if (!(s.value >= 0.0) || !std::isfinite(s.value))
      throw ConfigError(field, "value must be finite and nonnegative");
    if (i > 0 && s.x0 < segments_[i - 1].x1)
      throw ConfigError(field, "segments must be ordered and disjoint");
  }
  zero_ = std::none_of(segments_.begin(), segments_.end(),
                       [](const Segment& s) { return s.value > 0.0; });
  bool first = true;
  for (const auto& s : segments_) {
    if (!zero_ && s.value == 0.0) continue;
    if (first) lo_ = s.x0, first = false;
    hi_ = s.x1;
  }
}

Profile Profile::step(double kappa, double half_width) {
  return Profile({{-half_width, half_width, kappa}});
}

Profile Profile::scaled(double kappa) const {
  auto segs = segments_;
  for (auto& s : segs) s.value *= kappa;
  return Profile(std::move(segs));
}

double Profile::value_at(double x) const {
  for (const auto& s : segments_)
    if (x >= s.x0 && x < s.x1) return s.value;
  return 0.0;
}

double Profile::l1_norm() const noexcept {
  double sum = 0.0;
  for (const auto& s : segments_) sum += s.value * (s.x1 - s.x0);
  return sum;
}

double Polynomial::operator()(double x) const {
  double r = 0.0;
  for (int i = int(coeffs.size()) - 1; i >= 0; --i) r = r * x + coeffs[i];
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  Polynomial r;
  r.coeffs = Eigen::VectorXd::Zero(coeffs.size() + o.coeffs.size() - 1);
  for (int i = 0; i < coeffs.size(); ++i)
    for (int j = 0; j < o.coeffs.size(); ++j) r.coeffs[i + j] += coeffs[i] * o.coeffs[j];
  return r;
}

double Polynomial::inner(const Polynomial& p, const Polynomial& q) {
  const Polynomial pq = p * q;
  double s = 0.0;
  for (int i = 0; i < pq.coeffs.size(); i += 2) s += 2.0 * pq.coeffs[i] / (i + 1);
  return s;
}

Polynomial normalized_legendre(int n) {
  // Bonnet recursion on coefficient vectors.
  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(n + 1), p1 = Eigen::VectorXd::Zero(n + 1);
  p0[0] = 1.0;
  if (n >= 1) p1[1] = 1.0;
  Eigen::VectorXd pn = n == 0 ? p0 : p1;
  for (int k = 2; k <= n; ++k) {
    Eigen::VectorXd p2 = Eigen::VectorXd::Zero(n + 1);
    for (int i = 0; i < n; ++i) p2[i + 1] += (2.0 * k - 1.0) * p1[i] / k;
    p2 -= (k - 1.0) / k * p0;
    p0 = p1;
    p1 = p2;
    pn = p2;
  }
  return Polynomial{pn * std::sqrt((2.0 * n + 1.0) / 2.0)};
}

CollisionKernel CollisionKernel::isotropic() {
  CollisionKernel k;
  k.mode_ = Mode::isotropic;
  Polynomial p;
  p.coeffs = Eigen::VectorXd::Constant(1, 1.0 / std::sqrt(2.0));
  k.terms_.push_back({1.0, p});
  return k;
}

CollisionKernel CollisionKernel::polynomial(std::vector<KernelTerm> terms) {
  if (terms.empty()) throw ConfigError("collision.terms", "at least one term required");
  CollisionKernel k;
  k.mode_ = Mode::polynomial;
  k.terms_ = std::move(terms);
  for (std::size_t i = 0; i < k.terms_.size(); ++i) {
    if (!(k.terms_[i].k > 0.0))
      throw ConfigError("collision.terms[" + std::to_string(i) + "].k", "must be positive");
    if (k.terms_[i].poly.coeffs.size() == 0)
      throw ConfigError("collision.terms[" + std::to_string(i) + "].coeffs", "empty polynomial");
  }
  const Eigen::MatrixXd g = k.gram();
  const double gram_err = (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
  if (gram_err > 1e-12)
    throw ConfigError("collision.terms", "polynomials are not orthonormal in L2(-1,1) (Gram error " +
                                             std::to_string(gram_err) + ")");
  // K 1 = sum k_i^2 <1, P_i> P_i must be a constant polynomial.
  Eigen::VectorXd k1 = Eigen::VectorXd::Zero(k.max_degree() + 1);
  Polynomial one{Eigen::VectorXd::Constant(1, 1.0)};
  for (const auto& t : k.terms_) {
    const double c = t.k * t.k * Polynomial::inner(one, t.poly);
    k1.head(t.poly.coeffs.size()) += c * t.poly.coeffs;
  }
  if (k1.size() > 1 && k1.tail(k1.size() - 1).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("collision.terms",
                      "the constant function must be an eigenfunction of K (K1 is not proportional to 1)");
  if (k.ell_weights().cwiseAbs().maxCoeff() == 0.0)
    throw ConfigError("collision.terms", "all P_i vanish at 0, so G_0 = 0");
  return k;
}

int CollisionKernel::max_degree() const {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, t.poly.degree());
  return d;
}

double CollisionKernel::norm() const {
  double n = 0.0;
  for (const auto& t : terms_) n = std::max(n, t.k * t.k);
  return n;
}

Eigen::MatrixXd CollisionKernel::gram() const {
  const int n = size();
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = Polynomial::inner(terms_[i].poly, terms_[j].poly);
  return g;
}

Eigen::VectorXd CollisionKernel::ell_weights() const {
  Eigen::VectorXd w(size());
  for (int i = 0; i < size(); ++i) w[i] = terms_[i].k * terms_[i].poly(0.0);
  return w;
}

std::vector<Eigen::MatrixXd> CollisionKernel::product_coefficients() const {
  const int n = size();
  const int jmax = 2 * max_degree();
  std::vector<Eigen::MatrixXd> a(jmax + 1, Eigen::MatrixXd::Zero(n, n));
  for (int m = 0; m < n; ++m)
    for (int q = 0; q < n; ++q) {
      const Polynomial pr = terms_[m].poly * terms_[q].poly;
      for (int j = 0; j < pr.coeffs.size(); ++j)
        a[j](m, q) = terms_[m].k * terms_[q].k * pr.coeffs[j];
    }
  return a;
}

std::vector<Eigen::MatrixXd> CollisionKernel::expansion_matrices() const {
  auto g = product_coefficients();
  for (std::size_t j = 1; j < g.size(); j += 2) g[j] = -g[j];
  return g;
}

CollisionKernel CollisionKernel::reflected() const {
  CollisionKernel r = *this;
  for (auto& t : r.terms_)
    for (int i = 1; i < t.poly.coeffs.size(); i += 2) t.poly.coeffs[i] = -t.poly.coeffs[i];
  return r;
}

Eigen::VectorXd GridSpec::nodes() const {
  Eigen::VectorXd x(n_cells());
  for (int i = 0; i < n_cells(); ++i) x[i] = cells[i].mid();
  return x;
}

Eigen::VectorXd GridSpec::weights() const {
  Eigen::VectorXd w(n_cells());
  for (int i = 0; i < n_cells(); ++i) w[i] = cells[i].width();
  return w;
}

GridSpec make_grid(const Profile& profile, int n_cells) {
  if (n_cells < 1) throw ConfigError("grid.cells", "must be positive");
  if (profile.segments().empty()) return {};
  std::vector<Segment> segs;
  for (const auto& s : profile.segments())
    if (profile.is_zero() || s.value > 0.0) segs.push_back(s);
  double total = 0.0;
  for (const auto& s : segs) total += s.x1 - s.x0;
  if (int(segs.size()) > n_cells)
    throw ConfigError("grid.cells", "fewer cells than support segments");

  std::vector<int> counts(segs.size());
  int assigned = 0;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    counts[i] = std::max(1, int(std::lround(n_cells * (segs[i].x1 - segs[i].x0) / total)));
    assigned += counts[i];
  }
  // Adjust the largest segment so the total matches exactly.
  auto big = std::max_element(counts.begin(), counts.end()) - counts.begin();
  counts[big] += n_cells - assigned;
  if (counts[big] < 1) throw ConfigError("grid.cells", "too few cells for this profile");

  GridSpec g;
  std::vector<double> sc;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const double h = (segs[i].x1 - segs[i].x0) / counts[i];
    for (int c = 0; c < counts[i]; ++c) {
      const double a = segs[i].x0 + c * h;
      const double b = c + 1 == counts[i] ? segs[i].x1 : segs[i].x0 + (c + 1) * h;
      g.cells.push_back({a, b});
      sc.push_back(std::sqrt(segs[i].value));
    }
  }
  g.sqrt_c = Eigen::Map<Eigen::VectorXd>(sc.data(), Eigen::Index(sc.size()));
  return g;
}

Eigen::VectorXd sqrt_c_vector(const GridSpec& grid) {
  return grid.sqrt_c.cwiseProduct(grid.weights().cwiseSqrt());
}

Eigen::VectorXd ell_vector(const GridSpec& grid, const CollisionKernel& kernel) {
  const int n = kernel.size();
  const Eigen::VectorXd s = sqrt_c_vector(grid);
  const Eigen::VectorXd w = kernel.ell_weights();
  Eigen::VectorXd ell(grid.n_cells() * n);
  for (int p = 0; p < grid.n_cells(); ++p) ell.segment(p * n, n) = s[p] * w;
  return ell;
}

PairTable make_pair_table(const GridSpec& grid) {
  const int n = grid.n_cells();
  PairTable t;
  t.cls.resize(n, n);
  t.right.resize(n, n);
  if (n == 0) return t;
  const double scale = grid.cells.back().x1 - grid.cells.front().x0;
  auto q = [&](double v) { return (long long)std::llround(v / scale * 1e11); };
  std::map<std::tuple<long long, long long, long long, bool>, int> index;
  auto lookup = [&](const PairClass& c) {
    auto key = std::make_tuple(q(c.left_width), q(c.right_width), q(c.gap), c.same);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    const int id = int(t.classes.size());
    t.classes.push_back(c);
    index.emplace(key, id);
    return id;
  };
  for (int p = 0; p < n; ++p)
    for (int r = 0; r < n; ++r) {
      const Cell& a = grid.cells[p];
      const Cell& b = grid.cells[r];
      PairClass c;
      if (p == r) {
        c = {a.width(), a.width(), 0.0, true};
        t.right(p, r) = true;
      } else if (r > p) {
        c = {a.width(), b.width(), std::max(0.0, b.x0 - a.x1), false};
        t.right(p, r) = true;
      } else {
        c = {b.width(), a.width(), std::max(0.0, a.x0 - b.x1), false};
        t.right(p, r) = false;
      }
      t.cls(p, r) = lookup(c);
    }
  return t;
}

}  // namespace slab
