#pragma once

#include <complex>
#include <vector>

namespace slab::specfun {

using cplx = std::complex<double>;

inline constexpr double euler_gamma = 0.577215664901532860606512090082402431;

// |s| below which E is evaluated from the entire remainder series.
inline constexpr double series_switch = 4.0;
// Largest |s| accepted by theta_series (200 terms keep the tail below 1e-16 there).
inline constexpr double series_radius = 40.0;

// ln(-i z) on the plane cut along the negative imaginary axis.
//   z = i*delta  ->  ln(delta), real
//   z = k > 0    ->  ln(k) - i*pi/2
struct BranchedLog {
  cplx z;
  cplx value;
};

BranchedLog log_minus_iz(cplx z);

// theta(s) = -sum_{m>=1} (-s)^m / (m! m), the entire part of E(s) + ln s + gamma.
// Terms are summed until |term| < tol * max(1, |partial sum|), at most 200.
cplx theta_series(cplx s, double tol = 1e-17);

// theta(s) on the whole plane: series for small |s|, E(s) + ln s + gamma otherwise.
cplx theta(cplx s);

enum class ExpIntRegime { series, quadrature, recurrence };

struct ExpIntValue {
  int order = 0;
  cplx argument;
  cplx value;
  ExpIntRegime regime = ExpIntRegime::series;
};

// E_j(s) = int_1^inf e^{-st} t^{-j-1} dt and its continuation to the plane cut
// along (-inf, 0]. E_j(0) = 1/j for j >= 1. Arguments on the cut throw DomainError.
ExpIntValue exp_int(int j, cplx s);

// E_0(s), ..., E_jmax(s) in one pass (shared logarithm and recurrence).
std::vector<cplx> exp_int_orders(int jmax, cplx s);

// Shorthand returning only the value.
inline cplx E(int j, cplx s) { return exp_int(j, s).value; }

// Test oracle: direct adaptive quadrature of the defining integral (Re s > 0),
// independent of the series/recurrence/shifted-quadrature paths above.
// Throws NumericalError carrying the achieved estimate if tol is not met.
cplx exp_int_oracle(int j, cplx s, double tol = 1e-12);

// (e^w - 1) / w and (e^w - 1 - w) / w^2, accurate near w = 0.
cplx exprel(cplx w);
cplx exprel2(cplx w);

}  // namespace slab::specfun
