#include "slab/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <sstream>

namespace slab {

namespace {

void require_isotropic(const Problem& pb, const char* who) {
  if (!pb.isotropic()) throw DomainError(std::string(who) + ": isotropic kernel required");
}

// Orthonormal basis of the complement of v (columns), from a Householder QR.
Eigen::MatrixXd complement_basis(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return q.rightCols(n - 1);
}

struct LineFit {
  double k = 0.0;
  double rms = 0.0;
};

// eta ~ k + b / ln(eps), least squares over the given points.
LineFit fit_inverse_log(const std::vector<double>& eps, const std::vector<double>& eta) {
  const int m = int(eps.size());
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd y(m);
  for (int i = 0; i < m; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = 1.0 / std::log(eps[i]);
    y[i] = eta[i];
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(y);
  return {c[0], std::sqrt((a * c - y).squaredNorm() / m)};
}

}  // namespace

EtaFlow eta_flow(const Problem& pb, const std::vector<double>& eps) {
  require_isotropic(pb, "eta_flow");
  if (eps.empty()) throw ConfigError("eps", "empty list");
  EtaFlow flow;
  flow.eps = eps;
  const int n = pb.dim();
  flow.eta.resize(int(eps.size()), n);
  Eigen::MatrixXd prev;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw ConfigError("eps", "values must be positive");
    const Eigen::MatrixXd q =
        assemble_Qtilde(cplx(0.0, eps[i]), pb.grid, pb.kernel).entries.real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (q + q.transpose()));
    const Eigen::VectorXd& vals = es.eigenvalues();
    const Eigen::MatrixXd& vecs = es.eigenvectors();
    if (i == 0) {
      flow.eta.row(0) = vals.transpose();
      prev = vecs;
      continue;
    }
    // Greedy assignment by maximal |overlap|.
    Eigen::MatrixXd ov = (prev.transpose() * vecs).cwiseAbs();
    std::vector<int> assign(n, -1);
    Eigen::MatrixXd work = ov;
    for (int step = 0; step < n; ++step) {
      Eigen::Index r, c;
      const double best = work.maxCoeff(&r, &c);
      double runner = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != c) runner = std::max(runner, work(r, j));
      if (best > 0.0 && best - runner < 1e-3) {
        std::ostringstream os;
        os << "ambiguous match for branch " << r << " at eps = " << eps[i];
        flow.flags.push_back(os.str());
      }
      assign[r] = int(c);
      work.row(r).setConstant(-1.0);
      work.col(c).setConstant(-1.0);
    }
    Eigen::MatrixXd next(n, n);
    for (int b = 0; b < n; ++b) {
      flow.eta(int(i), b) = vals[assign[b]];
      // Keep the sign convention of the previous step for stable overlaps.
      next.col(b) = vecs.col(assign[b]);
    }
    prev = next;
  }
  return flow;
}

std::vector<BcPoint> bc_set(const EtaFlow& flow) {
  const int m = int(flow.eps.size());
  if (m < 3) throw ConfigError("eps", "at least three values are needed for extrapolation");
  const int nb = int(flow.eta.cols());
  // The branch carrying the rank-one log term escapes to -infinity.
  Eigen::Index escaping;
  flow.eta.row(m - 1).minCoeff(&escaping);
  std::vector<BcPoint> out;
  for (int b = 0; b < nb; ++b) {
    if (b == escaping) continue;
    auto window = [&](int end) {
      std::vector<double> e, y;
      for (int i = end - 3; i < end; ++i) {
        e.push_back(flow.eps[i]);
        y.push_back(flow.eta(i, b));
      }
      return fit_inverse_log(e, y);
    };
    const LineFit last = window(m);
    double err = last.rms;
    if (m >= 4) err = std::max(err, std::abs(last.k - window(m - 1).k));
    out.push_back({last.k, err});
  }
  std::sort(out.begin(), out.end(), [](const BcPoint& a, const BcPoint& b) { return a.k < b.k; });
  return out;
}

Eigen::VectorXd bc_compressed(const Problem& pb) {
  require_isotropic(pb, "bc_compressed");
  if (pb.profile.is_zero()) return {};
  const Eigen::MatrixXd b = assemble_B(pb.grid, pb.kernel).entries;
  const Eigen::MatrixXd p = complement_basis(ell_vector(pb.grid, pb.kernel));
  const Eigen::MatrixXd c = p.transpose() * b * p;
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (c + c.transpose()),
                                                        Eigen::EigenvaluesOnly)
      .eigenvalues();
}

double grid_critical_kappa(const Problem& unit, int n) {
  const Eigen::VectorXd k = bc_compressed(unit);
  if (n < 1 || n > k.size() || k[n - 1] >= 0.0)
    throw DomainError("grid_critical_kappa: fewer than " + std::to_string(n) +
                      " negative B_c points on this grid");
  return -1.0 / k[n - 1];
}

KappaScan kappa_scan(const Profile& shape, const std::vector<int>& levels, double kappa_lo,
                     double kappa_hi) {
  if (levels.empty()) throw ConfigError("grid.levels", "at least one grid level required");
  if (!(kappa_hi > kappa_lo) || !(kappa_lo >= 0.0))
    throw ConfigError("kappa_range", "requires 0 <= lo < hi");
  KappaScan scan;
  scan.levels = levels;
  std::vector<std::vector<double>> per_level;
  for (int cells : levels) {
    const Problem pb = make_problem(shape, CollisionKernel::isotropic(), cells);
    const Eigen::VectorXd k = bc_compressed(pb);
    std::vector<double> kap;
    for (Eigen::Index i = 0; i < k.size() && k[i] < 0.0; ++i) kap.push_back(-1.0 / k[i]);
    per_level.push_back(kap);
  }
  std::size_t common = per_level[0].size();
  for (const auto& v : per_level) common = std::min(common, v.size());
  const int L = int(levels.size());
  for (std::size_t n = 0; n < common; ++n) {
    CriticalKappa ck;
    for (const auto& v : per_level) ck.per_level.push_back(v[n]);
    const double fine = ck.per_level[L - 1];
    if (L == 1) {
      ck.kappa = fine;
      ck.error = 0.0;
    } else {
      const double d1 = ck.per_level[L - 1] - ck.per_level[L - 2];
      double ratio = 4.0;  // second-order default
      if (L >= 3) {
        const double d0 = ck.per_level[L - 2] - ck.per_level[L - 3];
        if (d1 != 0.0 && d0 / d1 > 1.0) ratio = std::clamp(d0 / d1, 2.0, 8.0);
      }
      ck.kappa = fine + d1 / (ratio - 1.0);
      ck.error = std::abs(d1 / (ratio - 1.0));
    }
    if (ck.kappa >= kappa_lo && ck.kappa <= kappa_hi) scan.critical.push_back(ck);
  }
  return scan;
}

}  // namespace slab
