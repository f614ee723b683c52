#include "oracles.hpp"
#include "slab/cli.hpp"
#include "slab/specfun.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace slab;
using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

struct Result {
  bool pass = false;
  std::string detail;
};

Problem step(double kappa, int cells) {
  return make_problem(Profile::step(kappa), CollisionKernel::isotropic(), cells);
}

Profile two_level() { return Profile({{-1.0, 0.0, 0.5}, {0.0, 1.5, 2.0}}); }

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
  return v;
}

double sigma_min_s0(const Problem& pb) {
  const SZero s = s_zero(pb, 0.5 * admissible_delta(pb.profile, pb.kernel));
  return near_kernel(s.value).smallest_sv;
}

Result special_functions() {
  double worst = 0.0;
  for (double r : log_grid(1e-3, 50.0, 20))
    for (double arg : {-1.45, -0.75, 0.0, 0.75, 1.45})
      for (int j : {0, 1, 3}) {
        const cplx s = std::polar(r, arg);
        worst = std::max(worst, std::abs(specfun::E(j, s) - specfun::exp_int_oracle(j, s)));
      }
  double rec = 0.0;
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> re(0.01, 20.0), im(-20.0, 20.0);
  for (int n = 0; n < 100; ++n) {
    const cplx s(re(gen), im(gen));
    const auto e = specfun::exp_int_orders(7, s);
    for (int j = 0; j < 7; ++j)
      rec = std::max(rec, std::abs(e[j + 1] * double(j + 1) - std::exp(-s) + s * e[j]) /
                              (1.0 + std::abs(e[j])));
  }
  std::ostringstream os;
  os << "oracle max " << worst << " (<= 1e-9), recurrence max " << rec << " (<= 1e-10)";
  return {worst <= 1e-9 && rec <= 1e-10, os.str()};
}

Result operator_laws() {
  const GridSpec g = make_grid(two_level(), 128);
  const CollisionKernel k = CollisionKernel::isotropic();
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> re(-3.0, 3.0), lim(-3.0, 1.0);
  double top = -INFINITY;
  for (int n = 0; n < 20; ++n) {
    const cplx z(re(gen), std::pow(10.0, lim(gen)));
    const Eigen::MatrixXcd q = assemble_Q(z, g, k).entries;
    top = std::max(top, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(0.5 * (q + q.adjoint()))
                            .eigenvalues()
                            .maxCoeff());
  }
  bool sign_ok = true;
  double worst_sign = 0.0;
  for (double kr : {-2.0, -0.5, 0.5, 2.0}) {
    const Eigen::MatrixXcd q = assemble_Q(kr, g, k).entries;
    const Eigen::VectorXd ev =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>((q - q.adjoint()) / cplx(0.0, 2.0)).eigenvalues();
    const Eigen::VectorXd s = (kr < 0.0 ? 1.0 : -1.0) * ev;
    worst_sign = std::min(worst_sign, s.minCoeff() / s.maxCoeff());
    sign_ok = sign_ok && s.maxCoeff() > 0.0 && s.minCoeff() >= -1e-12 * s.maxCoeff();
  }
  bool mono = true;
  Eigen::VectorXd prev;
  for (double e = 1e-6; e <= 1.0 + 1e-12; e *= 10.0) {
    const Eigen::MatrixXd q = assemble_Q(cplx(0.0, e), g, k).entries.real();
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q).eigenvalues();
    if (prev.size() && (ev - prev).minCoeff() < -1e-12) mono = false;
    prev = ev;
  }
  std::ostringstream os;
  os << "max Re-part eigenvalue " << top << " (<= 1e-8), sign law min/max " << worst_sign
     << ", monotone " << (mono ? "yes" : "no");
  return {top <= 1e-8 && sign_ok && mono, os.str()};
}

Result cross_path() {
  const GridSpec g = make_grid(two_level(), 64);
  const CollisionKernel iso = CollisionKernel::isotropic();
  const CollisionKernel as_poly = CollisionKernel::polynomial({{1.0, normalized_legendre(0)}});
  double worst = 0.0;
  for (cplx z : {cplx(0.6, 0.8), cplx(2.0, 0.1), cplx(-1.5, 0.5), cplx(0.0, 0.05), cplx(0.0, 3.0)}) {
    const Eigen::MatrixXcd a = assemble_Q_isotropic(z, g).entries;
    worst = std::max(worst, (assemble_Q_direct(z, g, iso).entries - a).norm() / a.norm());
    worst = std::max(worst, (assemble_Q_expansion(z, g, as_poly).entries - a).norm() / a.norm());
  }
  const CollisionKernel k2 =
      CollisionKernel::polynomial({{1.0, normalized_legendre(0)}, {0.7, normalized_legendre(2)}});
  const Eigen::MatrixXcd d = assemble_Q_direct(cplx(0.3, 0.4), g, k2).entries;
  worst = std::max(worst, (assemble_Q_expansion(cplx(0.3, 0.4), g, k2).entries - d).norm() / d.norm());
  const Eigen::VectorXd w = k2.ell_weights();
  const Eigen::MatrixXd g0 = w * w.transpose();
  const double gerr = (k2.expansion_matrices()[0] - g0).cwiseAbs().maxCoeff();
  const double machine = 4.0 * std::numeric_limits<double>::epsilon() * g0.cwiseAbs().maxCoeff();
  std::ostringstream os;
  os << "max relative path gap " << worst << " (<= 1e-6), G_0 error " << gerr;
  return {worst <= 1e-6 && gerr <= machine, os.str()};
}

Result quadratic_form() {
  const GridSpec g = make_grid(two_level(), 128);
  const Eigen::VectorXd s = sqrt_c_vector(g);
  const Eigen::MatrixXd y1 = assemble_Y1(g).entries;
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  double worst = 0.0, most = -INFINITY;
  for (int n = 0; n < 10; ++n) {
    Eigen::VectorXd h(g.n_cells());
    for (auto& v : h) v = nd(gen);
    h -= s * (s.dot(h) / s.squaredNorm());
    double F = 0.0, rhs = 0.0;
    for (int p = 0; p < g.n_cells(); ++p) {
      const double wd = g.cells[p].width();
      const double F1 = F + g.sqrt_c[p] * h[p] * std::sqrt(wd);
      rhs -= wd * (F * F + F * F1 + F1 * F1) / 3.0;
      F = F1;
    }
    const double lhs = h.dot(y1 * h);
    worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
    most = std::max(most, lhs);
  }
  std::ostringstream os;
  os << "max relative gap " << worst << " (<= 1e-8), max <Y1 h, h> " << most << " (< 0)";
  return {worst <= 1e-8 && most < 0.0, os.str()};
}

json base_config() {
  return {{"schema_version", 1}, {"profile", {{"kind", "step"}, {"kappa", 1.0}}}};
}

Result spectrum_simulation() {
  json j = base_config();
  j["grid"] = {{"cells", 128}, {"levels", {128, 256}}, {"X", 22}, {"nx", {4096, 8192}}, {"mu_nodes", 32}};
  j["evolve"] = {{"T", 20}, {"samples", 40}};
  const ParseResult pr = parse_config(j);
  if (!pr.ok()) return {false, "config rejected"};
  const cli::Outcome o = cli::run("evolve", *pr.config);
  const double beta = o.report["beta_spectra"];
  const json& coarse = o.report["levels"][0];
  const double err = std::abs(coarse["relative_error"].get<double>());
  std::ostringstream os;
  os << "beta_spectra " << beta << ", beta_sim " << coarse["beta_sim"].get<double>() << " at "
     << coarse["nx"].get<int>() << "x32, relative error " << err << " (<= 0.01)";
  return {beta > 0.0 && err <= 0.01, os.str()};
}

Result kappa_scan_check() {
  const KappaScan scan = kappa_scan(Profile::step(1.0), {128, 256, 512}, 0.5, 9.0);
  const int n = int(scan.critical.size());
  int confirmed = 0;
  double worst_ratio = INFINITY, worst_mid = INFINITY, worst_oracle = 0.0;
  std::vector<double> ks;
  for (const auto& c : scan.critical) ks.push_back(c.kappa);
  for (int i = 0; i < n; ++i) {
    const double r = sigma_min_s0(step(ks[i], 128)) / sigma_min_s0(step(ks[i], 256));
    worst_ratio = std::min(worst_ratio, r);
    if (r >= 3.0) ++confirmed;
    if (i < 8) worst_oracle = std::max(worst_oracle, std::abs(ks[i] - oracle::critical_kappa[i]));
  }
  bool bounded = true;
  for (int i = 0; i < n; ++i) {
    const double mid = i == 0 ? 0.5 * ks[0] : 0.5 * (ks[i - 1] + ks[i]);
    const double a = sigma_min_s0(step(mid, 128)), b = sigma_min_s0(step(mid, 256));
    worst_mid = std::min(worst_mid, std::min(a, b));
    if (!(std::min(a, b) > 1e-2 && a / b < 1.5)) bounded = false;
  }
  std::ostringstream os;
  os << n << " critical values, " << confirmed << " with sigma_min(S(0)) shrink >= 3 (worst "
     << worst_ratio << "), midpoint sigma_min >= " << worst_mid << ", max deviation from frozen "
     << worst_oracle;
  return {n >= 5 && confirmed == n && bounded, os.str()};
}

Result asymptotics() {
  const std::vector<double> args{pi / 2, pi / 4, 3 * pi / 4};
  const std::vector<double> radii = log_grid(1e-4, 1e-1, 10);
  const Problem unit = step(1.0, 128);
  const Problem none = unit;
  const Problem first = step(grid_critical_kappa(unit, 1), 128);
  const Problem logc = step(grid_critical_kappa(unit, 2), 128);
  bool ok = true;
  std::ostringstream os;
  auto run = [&](Formula f, const Problem& pb) {
    const AsymptoticsReport r = asymptotics_fit(pb, f, args, radii, 1e-6, 0.0);
    os << (os.tellp() > 0 ? ", " : "") << to_string(f) << " [";
    for (const RayFit& ray : r.rays) {
      const double q = ray.exponent / r.predicted;
      os << " " << q;
      ok = ok && q >= 0.8 && q <= 1.2;
    }
    os << " ]";
    return r;
  };
  run(Formula::este0, none);
  run(Formula::Slog, logc);
  const AsymptoticsReport pole = run(Formula::Ssimple_pole, first);
  os << ", pole coefficient error " << pole.pole_relative_error << " (<= 0.05)";
  ok = ok && pole.pole_relative_error <= 0.05;
  return {ok, "exponent / predicted in [0.8, 1.2]: " + os.str()};
}

Result growth_trichotomy() {
  struct Case {
    const char* file;
    GrowthKind expect;
  };
  bool ok = true;
  std::ostringstream os;
  for (const Case c : {Case{"growth_noncritical.json", GrowthKind::bounded},
                       Case{"growth_logarithmic.json", GrowthKind::logarithmic},
                       Case{"growth_power.json", GrowthKind::power}}) {
    std::ifstream in(std::string(SLAB_CONFIG_DIR) + "/" + c.file);
    const ParseResult pr = parse_config(json::parse(in));
    if (!pr.ok()) return {false, std::string(c.file) + " rejected"};
    const cli::Outcome o = cli::run("growth", *pr.config);
    const std::string v = o.report["verdict"];
    bool pass = v == to_string(c.expect);
    os << (os.tellp() > 0 ? "; " : "") << c.file << ": " << v;
    for (const json& l : o.report["levels"]) os << " (" << l["nx"].get<int>() << ": " << l["verdict"]["kind"].get<std::string>() << ")";
    if (c.expect == GrowthKind::power && pass) {
      const double p = o.report["p"];
      os << " p = " << p;
      pass = p >= 0.8;
    }
    ok = ok && pass;
  }
  return {ok, os.str()};
}

Result splitting() {
  const std::vector<double> ks{-2.0, -1.0, -0.3, 0.4, 1.5};
  std::vector<std::vector<int>> ranks;
  for (int n : {64, 128, 256}) ranks.push_back(ac_splitting_profile(step(1.0, n), ks, 0.5).delta_rank);
  bool grows = true;
  for (std::size_t i = 0; i < ks.size(); ++i)
    grows = grows && ranks[0][i] < ranks[1][i] && ranks[1][i] < ranks[2][i];

  const Problem unit = step(1.0, 128);
  std::vector<double> crit;
  for (int n = 1; n <= 4; ++n) crit.push_back(grid_critical_kappa(unit, n));
  int crit_hits = 0, false_hits = 0;
  for (double k : crit) {
    const SZero s = s_zero(step(k, 128), 0.5 * admissible_delta(Profile::step(k), unit.kernel));
    if (near_kernel(s.value).singular) ++crit_hits;
  }
  std::vector<double> non{1.0, 0.5 * (crit[0] + crit[1]), 0.5 * (crit[1] + crit[2]), 0.5 * (crit[2] + crit[3])};
  for (double k : non) {
    const SZero s = s_zero(step(k, 128), 0.5 * admissible_delta(Profile::step(k), unit.kernel));
    if (near_kernel(s.value).singular) ++false_hits;
  }
  std::ostringstream os;
  os << "rank Delta(k) at 64/128/256 cells: " << ranks[0][0] << "/" << ranks[1][0] << "/" << ranks[2][0]
     << " (k = -2), growing at all 5 k: " << (grows ? "yes" : "no") << "; S(0) near-kernel in "
     << crit_hits << "/4 critical and " << false_hits << "/4 non-critical runs";
  return {grows && crit_hits == 4 && false_hits == 0, os.str()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    double limit_s;  // 0: no runtime requirement
    std::function<Result()> run;
  };
  const std::vector<Criterion> all{
      {1, 1.0, special_functions}, {2, 60.0, operator_laws},      {3, 0.0, cross_path},
      {4, 0.0, quadratic_form},    {5, 300.0, spectrum_simulation}, {6, 0.0, kappa_scan_check},
      {7, 0.0, asymptotics},       {8, 1800.0, growth_trichotomy},  {9, 0.0, splitting}};
  int failures = 0;
  for (const Criterion& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0.0 && secs >= c.limit_s) {
      r.pass = false;
      r.detail += "; runtime over " + cli::format_number(c.limit_s) + " s";
    }
    failures += r.pass ? 0 : 1;
    std::cout << "criterion " << c.id << ": " << (r.pass ? "PASS" : "FAIL") << " (" << r.detail << "; "
              << secs << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
