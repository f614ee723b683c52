#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <queue>
#include <type_traits>
#include <vector>

namespace slab::quad {

struct Rule {
  Eigen::VectorXd nodes;    // on [-1, 1]
  Eigen::VectorXd weights;
};

// Gauss-Legendre rule with n points, cached per n.
const Rule& gauss_legendre(int n);

template <typename T>
struct Result {
  T value{};
  double error = 0.0;
  int intervals = 0;
  bool converged = false;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

// Kronrod 15 / Gauss 7 abscissae and weights (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
auto gk15(F& f, double a, double b) {
  using T = std::decay_t<decltype(f(a))>;
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T kron = fc * kWgk[7];
  T gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const T f1 = f(c - dx);
    const T f2 = f(c + dx);
    kron += (f1 + f2) * kWgk[j];
    if (j % 2 == 1) gauss += (f1 + f2) * kWg[j / 2];
  }
  struct Out { T value; double error; };
  return Out{kron * h, magnitude(T((kron - gauss) * h))};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod (7/15) on a finite interval. The interval
// with the largest error estimate is bisected until the summed estimate drops
// below max(abs_tol, rel_tol * |value|).
template <typename F>
auto adaptive_gk15(F&& f, double a, double b, double abs_tol, double rel_tol,
                   int max_intervals = 2000) {
  using T = std::decay_t<decltype(f(a))>;
  struct Piece {
    double a, b;
    T value;
    double error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  std::priority_queue<Piece> heap;
  auto first = detail::gk15(f, a, b);
  heap.push({a, b, first.value, first.error});
  T total = first.value;
  double err = first.error;
  int count = 1;
  while (err > std::max(abs_tol, rel_tol * detail::magnitude(total)) &&
         count < max_intervals) {
    Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push({worst.a, mid, left.value, left.error});
    heap.push({mid, worst.b, right.value, right.error});
    ++count;
  }
  // Re-sum to shed the drift of incremental updates.
  T sum{};
  double esum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().error;
    heap.pop();
  }
  Result<T> r;
  r.value = sum;
  r.error = esum;
  r.intervals = count;
  r.converged = esum <= std::max(abs_tol, rel_tol * detail::magnitude(sum));
  return r;
}

// Fixed Gauss-Legendre rule mapped to [a, b].
template <typename F>
auto gauss_fixed(F&& f, double a, double b, int n) {
  using T = std::decay_t<decltype(f(a))>;
  const Rule& r = gauss_legendre(n);
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  T sum{};
  for (int i = 0; i < n; ++i) sum += f(c + h * r.nodes[i]) * r.weights[i];
  return T(sum * h);
}

}  // namespace slab::quad
