#include "slab/errors.hpp"
#include "slab/spectra.hpp"
#include "slab/transport_sim.hpp"

#include <Eigen/QR>

#include <cmath>

namespace slab {

std::string to_string(GrowthKind g) {
  switch (g) {
    case GrowthKind::bounded: return "bounded";
    case GrowthKind::logarithmic: return "logarithmic";
    case GrowthKind::power: return "power";
    case GrowthKind::unresolved: return "unresolved";
  }
  return "unresolved";
}

namespace {

double rms_relative(const std::vector<double>& y, const std::vector<double>& fit) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::pow((y[i] - fit[i]) / y[i], 2);
  return std::sqrt(s / double(y.size()));
}

}  // namespace

GrowthVerdict growth_fit(const std::vector<double>& t, const std::vector<double>& y,
                         double ratio_threshold, double growth_threshold) {
  if (t.size() != y.size() || t.size() < 4) throw ConfigError("series", "need >= 4 points");
  for (std::size_t i = 0; i < t.size(); ++i)
    if (!(t[i] > 0.0) || !(y[i] > 0.0)) throw ConfigError("series", "t and y must be positive");
  const double t0 = *std::min_element(t.begin(), t.end());
  const double t1 = *std::max_element(t.begin(), t.end());
  if (std::log10(t1 / t0) < 1.5 - 1e-12)
    throw DomainError("growth_fit: series must span at least 1.5 decades of t");

  // Tail half in log t.
  const double mid = std::sqrt(t0 * t1);
  std::vector<double> tt, yy;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= mid) {
      tt.push_back(t[i]);
      yy.push_back(y[i]);
    }
  const int m = int(tt.size());
  if (m < 3) throw ConfigError("series", "too few points in the tail half");

  GrowthVerdict v;
  std::vector<double> fit(m);

  double mean = 0.0;
  for (double q : yy) mean += q / m;
  std::fill(fit.begin(), fit.end(), mean);
  v.residual_const = rms_relative(yy, fit);

  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd b(m), lb(m);
  for (int i = 0; i < m; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::log(tt[i]);
    b[i] = yy[i];
    lb[i] = std::log(yy[i]);
  }
  const Eigen::Vector2d cl = a.colPivHouseholderQr().solve(b);
  v.log_a = cl[0];
  v.log_b = cl[1];
  for (int i = 0; i < m; ++i) fit[i] = cl[0] + cl[1] * a(i, 1);
  v.residual_log = rms_relative(yy, fit);

  const LogFit pf = loglog_fit(tt, yy);
  v.power_a = std::exp(pf.intercept);
  v.power_p = pf.slope;
  v.p_lo = pf.slope - 2.0 * pf.stderr_slope;
  v.p_hi = pf.slope + 2.0 * pf.stderr_slope;
  for (int i = 0; i < m; ++i) fit[i] = v.power_a * std::pow(tt[i], v.power_p);
  v.residual_power = rms_relative(yy, fit);

  const double tail_ratio = tt.back() / tt.front();
  v.relative_growth = std::pow(tail_ratio, v.power_p) - 1.0;
  constexpr double cap = 1e12;
  if (v.relative_growth < growth_threshold) {
    v.kind = GrowthKind::bounded;
    v.ratio = std::min(cap, growth_threshold / std::max(v.relative_growth, growth_threshold / cap));
    return v;
  }
  const double lo = std::min(v.residual_log, v.residual_power);
  const double hi = std::max(v.residual_log, v.residual_power);
  v.ratio = lo > 0.0 ? std::min(cap, hi / lo) : cap;
  if (v.ratio >= ratio_threshold)
    v.kind = v.residual_log < v.residual_power ? GrowthKind::logarithmic : GrowthKind::power;
  else
    v.kind = GrowthKind::unresolved;
  return v;
}

}  // namespace slab
