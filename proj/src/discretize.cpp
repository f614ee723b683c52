#include "slab/discretize.hpp"

#include "slab/errors.hpp"
#include "slab/quadrature.hpp"
#include "slab/specfun.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace slab {

namespace {

using specfun::euler_gamma;

// Second difference F(y1-x0) - F(y1-x1) - F(y0-x0) + F(y0-x1), which equals
// int_p int_q g(y - x) dx dy whenever F'' = g.
template <typename F>
auto second_difference(const Cell& p, const Cell& q, F&& f) {
  return f(q.x1 - p.x0) - f(q.x1 - p.x1) - f(q.x0 - p.x0) + f(q.x0 - p.x1);
}

void require_cells(const GridSpec& grid) {
  if (grid.n_cells() == 0) throw ConfigError("profile", "empty profile: no cells");
}

// Canonical cells of a pair class: left cell at [0, hl], right cell after the gap.
std::pair<Cell, Cell> class_cells(const PairClass& c) {
  if (c.same) return {{0.0, c.left_width}, {0.0, c.left_width}};
  return {{0.0, c.left_width}, {c.left_width + c.gap, c.left_width + c.gap + c.right_width}};
}

double pair_scale(const GridSpec& grid, int p, int q) {
  return grid.sqrt_c[p] * grid.sqrt_c[q] /
         std::sqrt(grid.cells[p].width() * grid.cells[q].width());
}

// Nodes and weights for int over left x right of g(y - x), reduced to one
// dimension with the trapezoidal overlap weight; g may be logarithmically
// singular at 0 and oscillate with frequency up to `freq`. For the same-cell
// class the rule integrates int_0^h (h - s) g(s) ds, i.e. the half with y > x.
std::vector<std::pair<double, double>> radial_rule(const PairClass& c, double freq) {
  const auto& rule = quad::gauss_legendre(10);
  std::vector<std::pair<double, double>> out;
  auto panel = [&](double a, double b, auto&& weight) {
    const int m = std::max(1, int(std::ceil(freq * (b - a))));
    const double step = (b - a) / m;
    for (int k = 0; k < m; ++k) {
      const double lo = a + k * step;
      const double mid = lo + 0.5 * step, half = 0.5 * step;
      for (int i = 0; i < rule.nodes.size(); ++i) {
        const double d = mid + half * rule.nodes[i];
        out.emplace_back(d, weight(d) * rule.weights[i] * half);
      }
    }
  };
  auto graded = [&](double len, auto&& weight) {
    double hi = len;
    for (int k = 0; k < 48; ++k) {
      panel(0.5 * hi, hi, weight);
      hi *= 0.5;
    }
    panel(0.0, hi, weight);
  };
  if (c.same) {
    const double h = c.left_width;
    graded(h, [h](double s) { return h - s; });
    return out;
  }
  const double hmin = std::min(c.left_width, c.right_width);
  const double hmax = std::max(c.left_width, c.right_width);
  const double d0 = c.gap, d1 = c.gap + hmin, d2 = c.gap + hmax, d3 = c.gap + hmin + hmax;
  auto rise = [d0](double d) { return d - d0; };
  auto flat = [hmin](double) { return hmin; };
  auto fall = [d3](double d) { return d3 - d; };
  if (d0 == 0.0) graded(d1, rise);
  else panel(d0, d1, rise);
  if (d2 > d1) panel(d1, d2, flat);
  panel(d2, d3, fall);
  return out;
}

// Integral of theta(-iz(y - x)) over a pair class by fixed Gauss rules.
cplx theta_pair_gauss(const PairClass& c, cplx a) {
  if (c.same) {
    const double h = c.left_width;
    auto f = [&](double s) { return (h - s) * specfun::theta(a * s); };
    return 2.0 * quad::gauss_fixed(f, 0.0, h, 10);
  }
  const auto& r = quad::gauss_legendre(4);
  const auto [left, right] = class_cells(c);
  cplx sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double x = left.mid() + 0.5 * left.width() * r.nodes[i];
    for (int j = 0; j < 4; ++j) {
      const double y = right.mid() + 0.5 * right.width() * r.nodes[j];
      sum += r.weights[i] * r.weights[j] * specfun::theta(a * (y - x));
    }
  }
  return sum * (0.25 * left.width() * right.width());
}

// Integral of E(-iz|x - y|) over a pair class via F'' = E with F(d) = E_2(a d) / a^2.
cplx exp_pair_closed(const PairClass& c, cplx a) {
  auto F = [&](double d) {
    return d == 0.0 ? 0.5 / (a * a) : specfun::E(2, a * std::abs(d)) / (a * a);
  };
  if (c.same) {
    const double h = c.left_width;
    return 2.0 * (F(h) - F(0.0) + h / a);
  }
  const auto [left, right] = class_cells(c);
  return second_difference(left, right, F);
}

std::string kernel_key(const CollisionKernel& k) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& t : k.terms()) {
    os << t.k << ':';
    for (int i = 0; i < t.poly.coeffs.size(); ++i) os << t.poly.coeffs[i] << ',';
    os << ';';
  }
  return os.str();
}

ComplexOperator assemble_Q_expansion_unchecked(cplx z, const GridSpec& grid,
                                               const CollisionKernel& kernel) {
  require_cells(grid);
  specfun::log_minus_iz(z);  // rejects the cut and z = 0
  const int n = grid.n_cells();
  const int nb = kernel.size();
  const auto G = kernel.expansion_matrices();
  const int jmax = int(G.size()) - 1;
  const PairTable table = make_pair_table(grid);
  const cplx a = cplx(0.0, -1.0) * z;
  const double freq = 2.0 * std::abs(z);

  std::vector<std::vector<cplx>> H(table.classes.size());
  for (std::size_t c = 0; c < table.classes.size(); ++c) {
    const PairClass& pc = table.classes[c];
    std::vector<cplx> acc(jmax + 1, 0.0);
    for (const auto& [d, w] : radial_rule(pc, freq)) {
      const auto e = specfun::exp_int_orders(jmax, a * d);
      for (int j = 0; j <= jmax; ++j) acc[j] += w * e[j];
    }
    H[c] = std::move(acc);
    if (pc.same)
      for (auto& h : H[c]) h *= 2.0;
  }

  ComplexOperator out;
  out.grid = grid;
  out.basis_size = nb;
  out.label = OperatorLabel::Q;
  out.entries.setZero(n * nb, n * nb);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      const double f = pair_scale(grid, p, q);
      if (f == 0.0) continue;
      const int c = table.cls(p, q);
      const bool same = table.classes[c].same;
      // sign(x - y) = -1 when q lies to the right of p.
      const double sgn = table.right(p, q) ? -1.0 : 1.0;
      for (int j = 0; j <= jmax; ++j) {
        if (same && j % 2 == 1) continue;
        const double sj = same ? 1.0 : std::pow(sgn, j);
        out.entries.block(p * nb, q * nb, nb, nb) -= (f * sj * H[c][j]) * G[j].cast<cplx>();
      }
    }
  return out;
}

}  // namespace

double cell_log_moment(const Cell& p, const Cell& q) {
  auto F = [](double d) {
    const double ad = std::abs(d);
    return ad == 0.0 ? 0.0 : 0.5 * d * d * std::log(ad) - 0.75 * d * d;
  };
  return second_difference(p, q, F);
}

double cell_abs_moment(const Cell& p, const Cell& q) {
  auto F = [](double d) { return std::abs(d) * d * d / 6.0; };
  return second_difference(p, q, F);
}

RealOperator assemble_Y(const GridSpec& grid) {
  require_cells(grid);
  const int n = grid.n_cells();
  const PairTable table = make_pair_table(grid);
  std::vector<double> lm(table.classes.size());
  for (std::size_t c = 0; c < lm.size(); ++c) {
    const auto [l, r] = class_cells(table.classes[c]);
    lm[c] = euler_gamma * l.width() * r.width() + cell_log_moment(l, r);
  }
  RealOperator y;
  y.grid = grid;
  y.label = OperatorLabel::Y;
  y.entries.resize(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) y.entries(p, q) = 0.5 * pair_scale(grid, p, q) * lm[table.cls(p, q)];
  return y;
}

RealOperator assemble_Y1(const GridSpec& grid) {
  require_cells(grid);
  const int n = grid.n_cells();
  RealOperator y;
  y.grid = grid;
  y.label = OperatorLabel::Y1;
  y.entries.resize(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      y.entries(p, q) =
          0.5 * pair_scale(grid, p, q) * cell_abs_moment(grid.cells[p], grid.cells[q]);
  return y;
}

ComplexOperator assemble_Q_isotropic(cplx z, const GridSpec& grid) {
  require_cells(grid);
  const cplx L = specfun::log_minus_iz(z).value;
  const cplx a = cplx(0.0, -1.0) * z;
  const int n = grid.n_cells();
  const PairTable table = make_pair_table(grid);

  // Entire remainder int int theta(-iz|x-y|) per pair class.
  std::vector<cplx> th(table.classes.size());
  for (std::size_t c = 0; c < th.size(); ++c) {
    const PairClass& pc = table.classes[c];
    const double h = std::max(pc.left_width, pc.right_width);
    if (std::abs(z) * h <= 0.25) {
      th[c] = theta_pair_gauss(pc, a);
    } else {
      const auto [l, r] = class_cells(pc);
      th[c] = exp_pair_closed(pc, a) + (L + euler_gamma) * l.width() * r.width() +
              cell_log_moment(l, r);
    }
  }

  const RealOperator y = assemble_Y(grid);
  const Eigen::VectorXd s = sqrt_c_vector(grid);
  ComplexOperator q;
  q.grid = grid;
  q.label = OperatorLabel::Q;
  q.entries = y.entries.cast<cplx>() + (0.5 * L) * (s * s.transpose()).cast<cplx>();
  for (int p = 0; p < n; ++p)
    for (int r = 0; r < n; ++r) q.entries(p, r) -= 0.5 * pair_scale(grid, p, r) * th[table.cls(p, r)];
  return q;
}

ComplexOperator assemble_Q_direct(cplx z, const GridSpec& grid, const CollisionKernel& kernel,
                                  const DirectOptions& opt) {
  require_cells(grid);
  if (z.imag() < 0.0 || z == cplx(0.0, 0.0))
    throw DomainError("assemble_Q_direct: requires Im z >= 0 and z != 0");
  const int n = grid.n_cells();
  const int nb = kernel.size();
  const PairTable table = make_pair_table(grid);
  const double absz = std::abs(z);

  // t = 1 + s e^{i phi} with i z e^{i phi} = -|z|: the phase of e^{izt} is frozen
  // along the ray and its modulus decays like e^{-|z| s |x - y|}.
  const double phi = 0.5 * std::numbers::pi - std::arg(z);
  const cplx rot = std::polar(1.0, phi);
  double hmin = grid.cells[0].width(), extent = grid.cells.back().x1 - grid.cells[0].x0;
  for (const auto& c : grid.cells) hmin = std::min(hmin, c.width());
  const double s0 = std::min(1.0, 0.05 / (absz * extent));
  const double s_end = 1e6 / (absz * hmin);

  std::vector<double> edges{0.0};
  for (double s = s0; s < s_end; s *= 2.0) edges.push_back(s);
  edges.push_back(s_end);

  auto poly_products_c = [&](cplx u) {
    Eigen::MatrixXcd m(nb, nb);
    auto ev = [](const Polynomial& p, cplx x) {
      cplx r = 0.0;
      for (int i = int(p.coeffs.size()) - 1; i >= 0; --i) r = r * x + p.coeffs[i];
      return r;
    };
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nb; ++j) {
        const auto& ti = kernel.terms()[i];
        const auto& tj = kernel.terms()[j];
        m(i, j) = ti.k * tj.k * ev(ti.poly, u) * ev(tj.poly, u);
      }
    return m;
  };

  // Per class: value for y > x (uses P(+1/t)) and for y < x (uses P(-1/t)).
  auto compute = [&](int nodes) {
    const auto& rule = quad::gauss_legendre(nodes);
    std::vector<Eigen::MatrixXcd> plus(table.classes.size(), Eigen::MatrixXcd::Zero(nb, nb));
    std::vector<Eigen::MatrixXcd> minus = plus;
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
      const double mid = 0.5 * (edges[e] + edges[e + 1]);
      const double half = 0.5 * (edges[e + 1] - edges[e]);
      for (int i = 0; i < nodes; ++i) {
        const double s = mid + half * rule.nodes[i];
        const cplx t = 1.0 + s * rot;
        const cplx w = rule.weights[i] * half * rot / t;  // dt / t
        const cplx a = cplx(0.0, 1.0) * z * t;
        const Eigen::MatrixXcd pp = poly_products_c(1.0 / t);
        const Eigen::MatrixXcd pm = poly_products_c(-1.0 / t);
        for (std::size_t c = 0; c < table.classes.size(); ++c) {
          const PairClass& pc = table.classes[c];
          if (pc.same) {
            const double h = pc.left_width;
            const cplx ih = h * h * specfun::exprel2(a * h);
            plus[c] += (w * ih) * (pp + pm);
          } else {
            const cplx iv = std::exp(a * pc.gap) * pc.left_width * specfun::exprel(a * pc.left_width) *
                            pc.right_width * specfun::exprel(a * pc.right_width);
            plus[c] += (w * iv) * pp;
            minus[c] += (w * iv) * pm;
          }
        }
      }
    }
    // Same-cell tail beyond s_end: I_half ~ -h / a, P(+-1/t) ~ P(0).
    const cplx t_end = 1.0 + s_end * rot;
    const Eigen::MatrixXcd p0 = poly_products_c(0.0);
    for (std::size_t c = 0; c < table.classes.size(); ++c)
      if (table.classes[c].same) {
        const double h = table.classes[c].left_width;
        plus[c] += (-h / (cplx(0.0, 1.0) * z)) * (2.0 / t_end) * p0;
      }
    Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(n * nb, n * nb);
    for (int p = 0; p < n; ++p)
      for (int r = 0; r < n; ++r) {
        const double f = pair_scale(grid, p, r);
        if (f == 0.0) continue;
        const int c = table.cls(p, r);
        const auto& v = (table.classes[c].same || table.right(p, r)) ? plus[c] : minus[c];
        q.block(p * nb, r * nb, nb, nb) = -f * v;
      }
    return q;
  };

  int nodes = opt.nodes_per_panel;
  Eigen::MatrixXcd q = compute(nodes);
  for (int it = 0; it < opt.max_doublings; ++it) {
    nodes *= 2;
    Eigen::MatrixXcd q2 = compute(nodes);
    const double change = (q2 - q).cwiseAbs().maxCoeff();
    const double scale = std::max(1e-300, q2.cwiseAbs().maxCoeff());
    q = std::move(q2);
    if (change <= opt.tol * scale) {
      ComplexOperator out;
      out.grid = grid;
      out.basis_size = nb;
      out.label = OperatorLabel::Q;
      out.entries = std::move(q);
      return out;
    }
  }
  throw NumericalError("assemble_Q_direct: angular quadrature did not converge");
}

ComplexOperator assemble_Q_expansion(cplx z, const GridSpec& grid, const CollisionKernel& kernel) {
  static std::mutex mu;
  static std::map<std::string, bool> verified;
  const std::string key = kernel_key(kernel);
  bool need_check = false;
  {
    std::lock_guard<std::mutex> lock(mu);
    need_check = verified.find(key) == verified.end();
  }
  if (need_check) {
    const GridSpec g = make_grid(Profile::step(1.0, 1.0), 16);
    const cplx zc(0.6, 0.8);
    const auto ex = assemble_Q_expansion_unchecked(zc, g, kernel).entries;
    const auto di = assemble_Q_direct(zc, g, kernel, {8, 1e-10, 5}).entries;
    const double rel = (ex - di).norm() / di.norm();
    if (rel > 1e-6)
      throw NumericalError("assemble_Q_expansion: disagrees with direct quadrature", rel);
    std::lock_guard<std::mutex> lock(mu);
    verified[key] = true;
  }
  return assemble_Q_expansion_unchecked(z, grid, kernel);
}

ComplexOperator assemble_Q(cplx z, const GridSpec& grid, const CollisionKernel& kernel) {
  if (kernel.mode() == CollisionKernel::Mode::isotropic) return assemble_Q_isotropic(z, grid);
  return assemble_Q_expansion(z, grid, kernel);
}

RealOperator assemble_B(const GridSpec& grid, const CollisionKernel& kernel) {
  require_cells(grid);
  const int n = grid.n_cells();
  const int nb = kernel.size();
  const auto G = kernel.expansion_matrices();
  const int jmax = int(G.size()) - 1;
  RealOperator b;
  b.grid = grid;
  b.basis_size = nb;
  b.label = OperatorLabel::Qtilde;
  b.entries.setZero(n * nb, n * nb);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      const double f = pair_scale(grid, p, q);
      if (f == 0.0) continue;
      const Cell& cp = grid.cells[p];
      const Cell& cq = grid.cells[q];
      const double area = cp.width() * cq.width();
      Eigen::MatrixXd blk = (euler_gamma * area + cell_log_moment(cp, cq)) * G[0];
      for (int j = 1; j <= jmax; ++j) {
        double sj;
        if (p == q) sj = j % 2 == 0 ? area : 0.0;
        else sj = (q > p && j % 2 == 1) ? -area : area;
        blk -= (sj / j) * G[j];
      }
      b.entries.block(p * nb, q * nb, nb, nb) = f * blk;
    }
  return b;
}

ComplexOperator assemble_Qtilde(cplx z, const GridSpec& grid, const CollisionKernel& kernel) {
  const cplx L = specfun::log_minus_iz(z).value;
  const Eigen::VectorXd ell = ell_vector(grid, kernel);
  ComplexOperator q;
  q.grid = grid;
  q.basis_size = kernel.size();
  q.label = OperatorLabel::Qtilde;
  if (kernel.mode() == CollisionKernel::Mode::isotropic) {
    q.entries = assemble_Y(grid).entries.cast<cplx>();
  } else {
    q.entries = assemble_B(grid, kernel).entries.cast<cplx>();
  }
  q.entries += L * (ell * ell.transpose()).cast<cplx>();
  return q;
}

ComplexOperator assemble_Theta(cplx z, const GridSpec& grid, const CollisionKernel& kernel) {
  ComplexOperator t = assemble_Q(z, grid, kernel);
  t.entries -= assemble_Qtilde(z, grid, kernel).entries;
  t.label = OperatorLabel::Theta;
  return t;
}

Eigen::VectorXd project_onto_cells(const GridSpec& grid, const std::function<double(double)>& f) {
  Eigen::VectorXd v(grid.n_cells());
  for (int p = 0; p < grid.n_cells(); ++p) {
    const Cell& c = grid.cells[p];
    v[p] = quad::gauss_fixed(f, c.x0, c.x1, 8) / std::sqrt(c.width());
  }
  return v;
}

}  // namespace slab
