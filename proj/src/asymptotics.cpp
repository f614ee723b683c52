#include "slab/spectra.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>

namespace slab {

namespace {

double opnorm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::BDCSVD<Eigen::MatrixXcd>(m).singularValues()[0];
}

}  // namespace

std::string to_string(Formula f) {
  switch (f) {
    case Formula::este0: return "este0";
    case Formula::Slog: return "Slog";
    case Formula::Ssimple_pole: return "Ssimple_pole";
    case Formula::Ssimple_vartheta0: return "Ssimple_vartheta0";
    case Formula::power_order: return "power_order";
  }
  return "este0";
}

Formula formula_from_string(const std::string& s) {
  for (Formula f : {Formula::este0, Formula::Slog, Formula::Ssimple_pole,
                    Formula::Ssimple_vartheta0, Formula::power_order})
    if (to_string(f) == s) return f;
  throw ConfigError("formula", "unknown formula '" + s + "'");
}

LogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const int m = int(x.size());
  if (m < 2 || int(y.size()) != m) throw NumericalError("loglog_fit: need at least two points");
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::log(x[i]);
    b[i] = std::log(y[i]);
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
  LogFit f;
  f.intercept = c[0];
  f.slope = c[1];
  if (m > 2) {
    const double s2 = (a * c - b).squaredNorm() / (m - 2);
    const double mean = a.col(1).mean();
    const double sxx = (a.col(1).array() - mean).square().sum();
    f.stderr_slope = sxx > 0.0 ? std::sqrt(s2 / sxx) : 0.0;
  }
  return f;
}

AsymptoticsReport asymptotics_fit(const Problem& pb, Formula f, const std::vector<double>& args,
                                  const std::vector<double>& radii, double tol, double delta) {
  if (radii.size() < 2) throw ConfigError("radii", "at least two radii required");
  AsymptoticsReport rep;
  rep.formula = f;

  std::optional<SZero> s0;
  std::optional<Classification> cls;
  std::function<double(cplx)> residual;
  std::function<double(double)> log_factor = [](double) { return 1.0; };

  switch (f) {
    case Formula::este0: {
      const double d = delta > 0.0 ? delta : admissible_delta(pb.profile, pb.kernel);
      s0 = s_zero(pb, d);
      rep.predicted = 1.0;
      residual = [&](cplx z) {
        const cplx alpha = -std::log(cplx(0.0, -1.0) * z / s0->delta);
        const cplx th = s0->vartheta;
        const Eigen::MatrixXcd pred =
            s0->value + (2.0 / (th * (1.0 + alpha * th))) * s0->a_ell * s0->a_star_ell.adjoint();
        return opnorm(char_fn(z, pb).value.entries - pred);
      };
      log_factor = [](double r) { return std::abs(std::log(r)); };
      break;
    }
    case Formula::Slog: {
      cls = classify_singularity(pb, tol);
      if (!cls->log) throw DomainError("asymptotics_fit: Slog requires a logarithmic singularity");
      rep.predicted = 1.0;
      residual = [&](cplx z) {
        const LogCoefficients& lc = *cls->log;
        const cplx l = std::log(cplx(0.0, -1.0) * z / lc.xi);
        const Eigen::MatrixXcd pred = lc.G - l * lc.e_tilde * lc.e_tilde.adjoint();
        return opnorm(char_fn_inv(z, pb).value.entries - pred);
      };
      log_factor = [](double r) { return std::pow(std::log(r), 2); };
      break;
    }
    case Formula::Ssimple_pole: {
      cls = classify_singularity(pb, tol);
      if (!cls->simple)
        throw DomainError("asymptotics_fit: Ssimple requires a first-order singularity");
      rep.predicted = 1.0;
      residual = [&](cplx z) {
        const Eigen::MatrixXcd pole = cplx(0.0, -2.0) * cls->simple->pole.cast<cplx>();
        return opnorm(z * char_fn_inv(z, pb).value.entries - pole);
      };
      break;
    }
    case Formula::Ssimple_vartheta0: {
      cls = classify_singularity(pb, tol);
      if (!cls->simple)
        throw DomainError("asymptotics_fit: Ssimple requires a first-order singularity");
      rep.predicted = 0.0;
      residual = [&](cplx z) {
        const SimpleCoefficients& sc = *cls->simple;
        const cplx zs = z / sc.shift_delta;
        Eigen::MatrixXcd pred = (cplx(0.0, -2.0) / z) * sc.pole.cast<cplx>() + sc.B0.cast<cplx>();
        pred -= std::log(cplx(0.0, 1.0) * zs) * sc.log_term.cast<cplx>();
        return opnorm(char_fn_inv(z, pb).value.entries - pred);
      };
      // The remainder is O(1 / |ln z|).
      log_factor = [](double r) { return 1.0 / std::abs(std::log(r)); };
      break;
    }
    case Formula::power_order: {
      rep.predicted = -1.0;
      residual = [&](cplx z) { return opnorm(char_fn_inv(z, pb).value.entries); };
      break;
    }
  }

  std::vector<double> rs = radii;
  std::sort(rs.begin(), rs.end(), std::greater<>());
  for (double arg : args) {
    RayFit ray;
    ray.arg = arg;
    std::vector<double> fx, fy;
    double prev = std::numeric_limits<double>::infinity();
    for (double r : rs) {
      const cplx z = std::polar(r, arg);
      const double res = residual(z);
      ray.radius.push_back(r);
      ray.residual.push_back(res);
      const double normed = res / log_factor(r);
      // A decaying residual that starts growing has hit the discretization floor.
      if (rep.predicted > 0.0 && !ray.floor_reached && normed > prev) {
        ray.floor_reached = true;
        ray.floor = prev * log_factor(fx.empty() ? r : fx.back());
      }
      if (!ray.floor_reached && normed > 0.0) {
        fx.push_back(r);
        fy.push_back(normed);
        prev = normed;
      }
    }
    if (fx.size() >= 2) {
      const LogFit lf = loglog_fit(fx, fy);
      ray.exponent = lf.slope;
      ray.exponent_stderr = lf.stderr_slope;
    }
    rep.rays.push_back(std::move(ray));
  }

  if (f == Formula::Ssimple_pole) {
    const cplx z = std::polar(rs.back(), 0.5 * std::numbers::pi);
    const Eigen::MatrixXcd pole = cplx(0.0, -2.0) * cls->simple->pole.cast<cplx>();
    rep.pole_relative_error = opnorm(z * char_fn_inv(z, pb).value.entries - pole) / opnorm(pole);
  }
  return rep;
}

}  // namespace slab
