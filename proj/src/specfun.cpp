#include "slab/specfun.hpp"

#include "slab/errors.hpp"
#include "slab/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace slab::specfun {

namespace {

bool on_cut(cplx s) { return s.imag() == 0.0 && s.real() <= 0.0; }

// E_j(s) = e^{-s} s^j int_0^inf e^{-v} (s+v)^{-j-1} dv, from t = 1 + v/s.
// Used for |s| >= series_switch with Re s >= 0, where the integrand is smooth
// and the pole at v = -s stays at distance >= series_switch from [0, inf).
cplx shifted_quadrature(int j, cplx s) {
  auto f = [&](double v) { return std::exp(-v) * std::pow(s + v, -(j + 1)); };
  constexpr double v_max = 45.0;
  auto r = quad::adaptive_gk15(f, 0.0, v_max, 0.0, 1e-15, 400);
  if (!r.converged && r.error > 1e-12 * std::abs(r.value))
    throw NumericalError("exp_int: shifted quadrature did not converge", r.error);
  return std::exp(-s) * std::pow(s, j) * r.value;
}

}  // namespace

BranchedLog log_minus_iz(cplx z) {
  if (z == cplx(0.0, 0.0))
    throw DomainError("ln(-iz): z = 0 is the branch point");
  if (z.real() == 0.0 && z.imag() < 0.0)
    throw DomainError("ln(-iz): z on the cut {-it, t > 0}");
  const cplx w(z.imag(), -z.real());  // -i z
  return {z, std::log(w)};
}

cplx theta_series(cplx s, double tol) {
  if (std::abs(s) > series_radius)
    throw NumericalError("theta_series: |s| exceeds series radius " +
                             std::to_string(series_radius),
                         std::abs(s));
  cplx sum = 0.0;
  cplx power = 1.0;  // (-s)^m / m!
  for (int m = 1; m <= 200; ++m) {
    power *= -s / double(m);
    const cplx term = power / double(m);
    sum -= term;
    if (std::abs(term) < tol * std::max(1.0, std::abs(sum))) break;
  }
  return sum;
}

cplx theta(cplx s) {
  if (std::abs(s) < series_switch || s.real() < 0.0) return theta_series(s);
  return shifted_quadrature(0, s) + std::log(s) + euler_gamma;
}

ExpIntValue exp_int(int j, cplx s) {
  if (j < 0) throw DomainError("exp_int: negative order");
  ExpIntValue out;
  out.order = j;
  out.argument = s;
  if (s == cplx(0.0, 0.0)) {
    if (j == 0) throw DomainError("exp_int: E_0 is singular at s = 0");
    out.value = 1.0 / double(j);
    out.regime = ExpIntRegime::series;
    return out;
  }
  if (on_cut(s))
    throw DomainError("exp_int: argument on the branch cut (-inf, 0]");

  const bool use_series = std::abs(s) < series_switch || s.real() < 0.0;
  if (!use_series) {
    out.value = shifted_quadrature(j, s);
    out.regime = ExpIntRegime::quadrature;
    return out;
  }
  cplx e = -std::log(s) - euler_gamma + theta_series(s);
  const cplx es = std::exp(-s);
  for (int k = 0; k < j; ++k) e = (es - s * e) / double(k + 1);
  out.value = e;
  out.regime = j == 0 ? ExpIntRegime::series : ExpIntRegime::recurrence;
  return out;
}

std::vector<cplx> exp_int_orders(int jmax, cplx s) {
  std::vector<cplx> out(jmax + 1);
  if (s == cplx(0.0, 0.0) || on_cut(s) || std::abs(s) < series_switch || s.real() < 0.0) {
    if (s == cplx(0.0, 0.0)) {
      if (jmax >= 0) out[0] = cplx(std::numeric_limits<double>::infinity(), 0.0);
      for (int j = 1; j <= jmax; ++j) out[j] = 1.0 / double(j);
      return out;
    }
    out[0] = exp_int(0, s).value;
    const cplx es = std::exp(-s);
    for (int k = 0; k < jmax; ++k) out[k + 1] = (es - s * out[k]) / double(k + 1);
    return out;
  }
  for (int j = 0; j <= jmax; ++j) out[j] = shifted_quadrature(j, s);
  return out;
}

cplx exp_int_oracle(int j, cplx s, double tol) {
  if (!(s.real() > 0.0))
    throw DomainError("exp_int_oracle: requires Re s > 0");
  // t = e^u on [1, T], T chosen so that e^{-Re s (T-1)} < e^{-45}.
  const double u_max = std::log1p(45.0 / s.real());
  auto integrand = [&](double u, bool imag) {
    const cplx v = std::exp(-s * std::exp(u) - double(j) * u);
    return imag ? v.imag() : v.real();
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double err_re = 0.0, err_im = 0.0;
  const double re = GK::integrate([&](double u) { return integrand(u, false); },
                                  0.0, u_max, 15, tol * 1e-2, &err_re);
  const double im = GK::integrate([&](double u) { return integrand(u, true); },
                                  0.0, u_max, 15, tol * 1e-2, &err_im);
  const cplx value(re, im);
  const double err = std::hypot(err_re, err_im);
  if (err > tol * std::max(1.0, std::abs(value)))
    throw NumericalError("exp_int_oracle: tolerance not reached", err);
  return value;
}

cplx exprel(cplx w) {
  if (std::abs(w) < 0.5) {
    cplx term = 1.0, sum = 1.0;
    for (int k = 2; k < 30 && std::abs(term) > 1e-17; ++k) {
      term *= w / double(k);
      sum += term;
    }
    return sum;
  }
  return (std::exp(w) - 1.0) / w;
}

cplx exprel2(cplx w) {
  if (std::abs(w) < 0.5) {
    cplx term = 0.5, sum = 0.5;
    for (int k = 3; k < 30 && std::abs(term) > 1e-17; ++k) {
      term *= w / double(k);
      sum += term;
    }
    return sum;
  }
  return (std::exp(w) - 1.0 - w) / (w * w);
}

}  // namespace slab::specfun
