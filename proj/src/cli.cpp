#include "slab/cli.hpp"

#include "slab/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace slab::cli {

using nlohmann::json;

namespace {

json cj(cplx z) { return json::array({z.real(), z.imag()}); }

json mat(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

json base(const std::string& command, const ExperimentConfig& cfg) {
  json r;
  r["schema_version"] = kSchemaVersion;
  r["command"] = command;
  r["config_hash"] = cfg.hash;
  r["config"] = cfg.echo;
  r["status"] = "ok";
  return r;
}

void require_isotropic(const ExperimentConfig& cfg, const std::string& command) {
  if (cfg.kernel.mode() != CollisionKernel::Mode::isotropic)
    throw ConfigError("collision.kind", "command '" + command + "' requires the isotropic kernel");
}

SpectrumResult spectrum_of(const ExperimentConfig& cfg, const Problem& pb) {
  if (pb.profile.is_zero()) return {};
  if (pb.isotropic()) {
    const double hi = cfg.spectrum.eps_hi.value_or(eigenvalue_ceiling(pb));
    return discrete_spectrum_isotropic(pb, cfg.spectrum.eps_lo, hi);
  }
  return discrete_spectrum_general(pb, cfg.spectrum.contour);
}

std::vector<Eigenvalue> by_growth(std::vector<Eigenvalue> v) {
  std::sort(v.begin(), v.end(), [](const Eigenvalue& a, const Eigenvalue& b) {
    return a.z.imag() != b.z.imag() ? a.z.imag() > b.z.imag() : a.z.real() < b.z.real();
  });
  return v;
}

// ---------------------------------------------------------------------------

Outcome cmd_spectrum(const ExperimentConfig& cfg) {
  Outcome out{base("spectrum", cfg), {{"cells", "index", "re", "im", "residual"}, {}}};
  json levels = json::array();
  std::vector<std::vector<Eigenvalue>> found;
  for (int cells : cfg.levels) {
    double kappa = 1.0;
    const Problem pb = make_problem(cfg, cells, &kappa);
    const SpectrumResult r = spectrum_of(cfg, pb);
    const std::vector<Eigenvalue> ev = by_growth(r.eigenvalues);
    json lv{{"cells", cells}, {"kappa", kappa}, {"notices", r.notices}};
    json list = json::array();
    for (std::size_t i = 0; i < ev.size(); ++i) {
      list.push_back({{"z", cj(ev[i].z)}, {"residual", ev[i].residual}});
      out.csv.rows.push_back({double(cells), double(i), ev[i].z.real(), ev[i].z.imag(), ev[i].residual});
    }
    lv["eigenvalues"] = list;
    levels.push_back(lv);
    found.push_back(ev);
  }
  const auto& a = found[found.size() - 2];
  const auto& b = found.back();
  double dz = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) dz = std::max(dz, std::abs(a[i].z - b[i].z));
  out.report["grid_levels"] = cfg.levels;
  out.report["levels"] = levels;
  out.report["eigenvalues"] = levels.back()["eigenvalues"];
  out.report["two_grid_delta"] = {{"count_match", a.size() == b.size()}, {"max_abs_dz", dz}};
  if (a.size() != b.size()) out.report["status"] = "unresolved";
  return out;
}

Outcome cmd_svals(const ExperimentConfig& cfg) {
  Outcome out{base("svals", cfg), {{"cells", "k", "index", "sval"}, {}}};
  json levels = json::array();
  std::vector<SingularValueProfile> prof;
  for (int cells : cfg.levels) {
    double kappa = 1.0;
    const Problem pb = make_problem(cfg, cells, &kappa);
    const SingularValueProfile p = ac_splitting_profile(pb, cfg.svals.k, cfg.svals.beta);
    json lv{{"cells", cells}, {"kappa", kappa}, {"k", p.k}, {"x1_dim", p.x1_dim},
            {"ker_dim", p.ker_dim}, {"delta_rank", p.delta_rank}};
    json lo = json::array(), hi = json::array();
    for (std::size_t i = 0; i < p.k.size(); ++i) {
      const Eigen::VectorXd& s = p.svals[i];
      lo.push_back(s.size() ? s[s.size() - 1] : 0.0);
      hi.push_back(s.size() ? s[0] : 0.0);
      for (Eigen::Index j = 0; j < s.size(); ++j)
        out.csv.rows.push_back({double(cells), p.k[i], double(j), s[j]});
    }
    lv["smallest_sv"] = lo;
    lv["largest_sv"] = hi;
    levels.push_back(lv);
    prof.push_back(p);
  }
  const auto& a = prof[prof.size() - 2];
  const auto& b = prof.back();
  double d = 0.0;
  json growth = json::array();
  for (std::size_t i = 0; i < a.k.size(); ++i) {
    const double sa = a.svals[i].size() ? a.svals[i].minCoeff() : 0.0;
    const double sb = b.svals[i].size() ? b.svals[i].minCoeff() : 0.0;
    d = std::max(d, std::abs(sa - sb));
    growth.push_back(b.delta_rank[i] - a.delta_rank[i]);
  }
  out.report["grid_levels"] = cfg.levels;
  out.report["levels"] = levels;
  out.report["two_grid_delta"] = {{"max_abs_smallest_sv", d}, {"delta_rank_growth", growth}};
  return out;
}

Outcome cmd_bc(const ExperimentConfig& cfg) {
  require_isotropic(cfg, "bc");
  Outcome out{base("bc", cfg), {{"cells", "eps", "branch", "eta"}, {}}};
  json levels = json::array();
  std::vector<std::vector<double>> neg;
  for (int cells : cfg.levels) {
    double kappa = 1.0;
    const Problem pb = make_problem(cfg, cells, &kappa);
    const EtaFlow flow = eta_flow(pb, cfg.bc.eps);
    const std::vector<BcPoint> pts = bc_set(flow);
    const Eigen::VectorXd comp = bc_compressed(pb);
    std::vector<double> n;
    for (Eigen::Index i = 0; i < comp.size() && comp[i] < 0.0; ++i) n.push_back(comp[i]);
    json set = json::array();
    for (const BcPoint& p : pts) set.push_back({{"k", p.k}, {"error", p.error}});
    levels.push_back({{"cells", cells}, {"kappa", kappa}, {"bc_set", set},
                      {"compressed_negative", n}, {"flags", flow.flags}});
    for (std::size_t i = 0; i < flow.eps.size(); ++i)
      for (Eigen::Index b = 0; b < flow.eta.cols(); ++b)
        out.csv.rows.push_back({double(cells), flow.eps[i], double(b), flow.eta(Eigen::Index(i), b)});
    neg.push_back(n);
  }
  const auto& a = neg[neg.size() - 2];
  const auto& b = neg.back();
  double d = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  out.report["grid_levels"] = cfg.levels;
  out.report["levels"] = levels;
  out.report["two_grid_delta"] = {{"max_abs_dk", d}, {"count_match", a.size() == b.size()}};
  return out;
}

Outcome cmd_kappa_scan(const ExperimentConfig& cfg) {
  require_isotropic(cfg, "kappa-scan");
  if (cfg.profile.is_zero()) throw ConfigError("profile", "kappa-scan needs a nonzero shape");
  Outcome out{base("kappa-scan", cfg), {{"n", "kappa", "error"}, {}}};
  for (int cells : cfg.levels) out.csv.columns.push_back("kappa_" + std::to_string(cells));
  const KappaScan scan = kappa_scan(cfg.profile, cfg.levels, cfg.kappa_scan.kappa_lo, cfg.kappa_scan.kappa_hi);
  json crit = json::array();
  json deltas = json::array();
  double dmax = 0.0;
  for (std::size_t n = 0; n < scan.critical.size(); ++n) {
    const CriticalKappa& c = scan.critical[n];
    crit.push_back({{"n", n + 1}, {"kappa", c.kappa}, {"error", c.error}, {"per_level", c.per_level}});
    std::vector<double> row{double(n + 1), c.kappa, c.error};
    row.insert(row.end(), c.per_level.begin(), c.per_level.end());
    out.csv.rows.push_back(row);
    const double d = c.per_level.size() >= 2
                         ? std::abs(c.per_level.back() - c.per_level[c.per_level.size() - 2])
                         : 0.0;
    deltas.push_back(d);
    dmax = std::max(dmax, d);
  }
  out.report["grid_levels"] = scan.levels;
  out.report["critical"] = crit;
  out.report["two_grid_delta"] = {{"per_kappa", deltas}, {"max", dmax}};
  return out;
}

Outcome cmd_classify(const ExperimentConfig& cfg) {
  require_isotropic(cfg, "classify");
  Outcome out{base("classify", cfg), {{"cells", "kappa", "margin", "n_dim", "kind"}, {}}};
  json levels = json::array();
  std::vector<Classification> cls;
  for (int cells : cfg.levels) {
    double kappa = 1.0;
    const Problem pb = make_problem(cfg, cells, &kappa);
    Classification c = classify_singularity(pb, cfg.classify.tol);
    json lv{{"cells", cells},
            {"kappa", kappa},
            {"kind", to_string(c.kind)},
            {"in_E", c.in_E},
            {"margin", c.margin},
            {"N_dim", c.N.dim},
            {"N_ambiguous", c.N.ambiguous},
            {"N_alt_dim", c.N.alt_dim},
            {"near_eigs", c.N.near_eigs}};
    if (c.log)
      lv["log"] = {{"xi", c.log->xi}, {"rho", cj(c.log->rho)}, {"distance", c.log->distance},
                   {"e_tilde_norm", c.log->e_tilde.norm()}};
    if (c.simple)
      lv["simple"] = {{"M", mat(c.simple->M)},
                      {"vartheta", c.simple->vartheta},
                      {"shift_delta", c.simple->shift_delta},
                      {"pole_norm", c.simple->pole.norm()},
                      {"B0_norm", c.simple->B0.norm()}};
    levels.push_back(lv);
    out.csv.rows.push_back({double(cells), kappa, c.margin, double(c.N.dim), double(int(c.kind))});
    cls.push_back(std::move(c));
  }
  const Classification& a = cls[cls.size() - 2];
  const Classification& b = cls.back();
  const bool agree = a.kind == b.kind;
  const Singularity verdict = agree ? b.kind : Singularity::unresolved;
  json delta{{"margin", std::abs(a.margin - b.margin)}, {"kind_agrees", agree}};
  if (a.simple && b.simple) delta["vartheta"] = std::abs(a.simple->vartheta - b.simple->vartheta);
  if (a.log && b.log) delta["rho"] = std::abs(a.log->rho - b.log->rho);
  out.report["grid_levels"] = cfg.levels;
  out.report["levels"] = levels;
  out.report["classification"] = to_string(verdict);
  out.report["two_grid_delta"] = delta;
  if (verdict == Singularity::unresolved) out.report["status"] = "unresolved";
  return out;
}

Outcome cmd_asymptotics(const ExperimentConfig& cfg) {
  Outcome out{base("asymptotics", cfg), {{"formula", "cells", "arg", "radius", "residual"}, {}}};
  json fits = json::array();
  json deltas = json::object();
  bool unresolved = false;
  for (std::size_t fi = 0; fi < cfg.asymptotics.formulas.size(); ++fi) {
    const Formula f = cfg.asymptotics.formulas[fi];
    json levels = json::array();
    std::vector<AsymptoticsReport> reps;
    std::string na;
    for (int cells : cfg.levels) {
      double kappa = 1.0;
      const Problem pb = make_problem(cfg, cells, &kappa);
      AsymptoticsReport rep;
      try {
        rep = asymptotics_fit(pb, f, cfg.asymptotics.args, cfg.asymptotics.radii, cfg.asymptotics.tol,
                              cfg.asymptotics.delta);
      } catch (const DomainError& e) {
        na = e.what();
        break;
      }
      json rays = json::array();
      for (const RayFit& r : rep.rays) {
        rays.push_back({{"arg", r.arg},
                        {"exponent", r.exponent},
                        {"exponent_stderr", r.exponent_stderr},
                        {"floor_reached", r.floor_reached},
                        {"floor", r.floor}});
        for (std::size_t i = 0; i < r.radius.size(); ++i)
          out.csv.rows.push_back({double(fi), double(cells), r.arg, r.radius[i], r.residual[i]});
      }
      json lv{{"cells", cells}, {"kappa", kappa}, {"predicted", rep.predicted}, {"rays", rays}};
      if (f == Formula::Ssimple_pole) lv["pole_relative_error"] = rep.pole_relative_error;
      levels.push_back(lv);
      reps.push_back(std::move(rep));
    }
    json entry{{"formula", to_string(f)}, {"levels", levels}};
    if (!na.empty()) {
      entry["not_applicable"] = na;
      unresolved = true;
    } else {
      const auto& a = reps[reps.size() - 2];
      const auto& b = reps.back();
      double d = 0.0;
      for (std::size_t r = 0; r < a.rays.size(); ++r)
        d = std::max(d, std::abs(a.rays[r].exponent - b.rays[r].exponent));
      deltas[to_string(f)] = {{"max_abs_exponent", d}};
    }
    fits.push_back(entry);
  }
  out.report["grid_levels"] = cfg.levels;
  out.report["fits"] = fits;
  out.report["two_grid_delta"] = deltas;
  if (unresolved) out.report["status"] = "unresolved";
  return out;
}

// ---------------------------------------------------------------------------
// Simulation

std::vector<ComplexField> initial_data(const InitialSpec& s, const Problem& pb,
                                       const std::shared_ptr<const PhaseGrid>& g,
                                       const Stepper& st, const std::vector<Eigenvalue>& evs,
                                       const std::string& field) {
  std::vector<ComplexField> v;
  if (s.kind == "random") {
    for (std::uint64_t seed : s.seeds) {
      const RealField r = random_field(g, s.lo, s.hi, seed);
      v.push_back(ComplexField{r.values.cast<cplx>(), g});
    }
  } else if (s.kind == "gaussian") {
    const RealField r = gaussian_field(g, s.x0, s.width);
    v.push_back(ComplexField{r.values.cast<cplx>(), g});
  } else if (s.kind == "resonant") {
    v.push_back(resonant_field(pb, g, s.eps0, s.weight_power, s.radius));
  } else {
    if (s.mode_index >= int(evs.size()))
      throw ConfigError(field + ".initial.mode_index",
                        "only " + std::to_string(evs.size()) + " eigenvalues found");
    v.push_back(eigenmode_reconstruct(pb, evs[std::size_t(s.mode_index)], st).right);
  }
  return v;
}

Trajectory evolve_any(const ComplexField& u, const Stepper& st, const Profile& p,
                      const std::vector<double>& times, double cfl) {
  if (u.values.imag().norm() <= 1e-12 * u.values.norm())
    return evolve(RealField{u.values.real(), u.grid}, st, p, times, cfl);
  return evolve(u, st, p, times, cfl);
}

// Pointwise maximum over trajectories sampled at the same times.
Trajectory envelope(const std::vector<Trajectory>& trs) {
  Trajectory m = trs.front();
  for (const Trajectory& t : trs)
    for (std::size_t i = 0; i < m.norm.size(); ++i) m.norm[i] = std::max(m.norm[i], t.norm[i]);
  return m;
}

double max_relative_gap(const Trajectory& a, const Trajectory& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < std::min(a.norm.size(), b.norm.size()); ++i)
    d = std::max(d, std::abs(a.norm[i] - b.norm[i]) / std::max(std::abs(b.norm[i]), 1e-300));
  return d;
}

struct SimLevel {
  std::shared_ptr<const PhaseGrid> grid;
  Stepper stepper;
};

SimLevel sim_level(const ExperimentConfig& cfg, const Problem& pb, int nx) {
  auto g = make_phase_grid(cfg.sim.X, nx, cfg.sim.mu_nodes, cfg.sim.mu_rule);
  Stepper st(g, pb.profile, pb.kernel, cfg.sim.dt_over_h * g->h);
  return {g, st};
}

Outcome cmd_evolve(const ExperimentConfig& cfg) {
  Outcome out{base("evolve", cfg), {{"nx", "t", "norm"}, {}}};
  double kappa = 1.0;
  const Problem pb = make_problem(cfg, cfg.levels.back(), &kappa);
  const std::vector<Eigenvalue> evs = by_growth(spectrum_of(cfg, pb).eigenvalues);
  const double beta_spec = evs.empty() ? 0.0 : evs.front().z.imag();
  std::vector<double> times;
  for (int i = 1; i <= cfg.evolve.samples; ++i) times.push_back(cfg.evolve.T * i / cfg.evolve.samples);
  json levels = json::array();
  std::vector<Trajectory> trs;
  std::vector<double> betas;
  for (int nx : cfg.sim.nx) {
    const SimLevel lv = sim_level(cfg, pb, nx);
    std::vector<Trajectory> each;
    for (const ComplexField& u : initial_data(cfg.evolve.initial, pb, lv.grid, lv.stepper, evs, "evolve"))
      each.push_back(evolve_any(u, lv.stepper, pb.profile, times, std::max(1.0, cfg.sim.dt_over_h)));
    const Trajectory tr = envelope(each);
    // Exponential rate from the second half of the samples.
    std::vector<double> tt, ly;
    for (std::size_t i = tr.t.size() / 2; i < tr.t.size(); ++i) {
      tt.push_back(tr.t[i]);
      ly.push_back(std::log(tr.norm[i]));
    }
    Eigen::MatrixXd a(tt.size(), 2);
    Eigen::VectorXd y(tt.size());
    for (std::size_t i = 0; i < tt.size(); ++i) {
      a(Eigen::Index(i), 0) = 1.0;
      a(Eigen::Index(i), 1) = tt[i];
      y[Eigen::Index(i)] = ly[i];
    }
    const double beta_sim = (a.transpose() * a).ldlt().solve(a.transpose() * y)[1];
    json l{{"nx", nx}, {"h", lv.grid->h}, {"dt", lv.stepper.dt()}, {"beta_sim", beta_sim}};
    if (beta_spec > 0.0) l["relative_error"] = (beta_sim - beta_spec) / beta_spec;
    levels.push_back(l);
    for (std::size_t i = 0; i < tr.t.size(); ++i) out.csv.rows.push_back({double(nx), tr.t[i], tr.norm[i]});
    trs.push_back(tr);
    betas.push_back(beta_sim);
  }
  json eig = json::array();
  for (const Eigenvalue& e : evs) eig.push_back({{"z", cj(e.z)}, {"residual", e.residual}});
  out.report["grid_levels"] = {{"cells", cfg.levels.back()}, {"nx", cfg.sim.nx}};
  out.report["kappa"] = kappa;
  out.report["eigenvalues"] = eig;
  out.report["beta_spectra"] = beta_spec;
  out.report["levels"] = levels;
  out.report["two_grid_delta"] = {{"max_relative_norm", max_relative_gap(trs[0], trs[1])},
                                  {"beta_sim", std::abs(betas[0] - betas[1])}};
  return out;
}

json verdict_json(const GrowthVerdict& v) {
  return {{"kind", to_string(v.kind)},
          {"ratio", v.ratio},
          {"relative_growth", v.relative_growth},
          {"residual_const", v.residual_const},
          {"residual_log", v.residual_log},
          {"residual_power", v.residual_power},
          {"log_fit", {v.log_a, v.log_b}},
          {"power_fit", {v.power_a, v.power_p}},
          {"p_interval", {v.p_lo, v.p_hi}}};
}

Outcome cmd_growth(const ExperimentConfig& cfg) {
  Outcome out{base("growth", cfg), {{"nx", "t", "norm"}, {}}};
  double kappa = 1.0;
  const Problem pb = make_problem(cfg, cfg.levels.back(), &kappa);
  const std::vector<Eigenvalue> evs = by_growth(spectrum_of(cfg, pb).eigenvalues);
  const std::vector<double> times = log_times(cfg.growth.t0, cfg.growth.T, cfg.growth.samples);
  json levels = json::array();
  std::vector<Trajectory> trs;
  std::vector<GrowthVerdict> verdicts;
  for (int nx : cfg.sim.nx) {
    const SimLevel lv = sim_level(cfg, pb, nx);
    std::vector<Mode> modes;
    json mj = json::array();
    for (const Eigenvalue& e : evs) {
      modes.push_back(eigenmode_reconstruct(pb, e, lv.stepper));
      mj.push_back({{"z", cj(e.z)}, {"residual", modes.back().residual}});
    }
    std::vector<Trajectory> each;
    for (const ComplexField& u : initial_data(cfg.growth.initial, pb, lv.grid, lv.stepper, evs, "growth"))
      each.push_back(deflate_and_measure(u, modes, lv.stepper, pb.profile, times, cfg.growth.interval));
    const Trajectory tr = envelope(each);
    const GrowthVerdict v =
        growth_fit(tr.t, tr.norm, cfg.growth.ratio_threshold, cfg.growth.growth_threshold);
    levels.push_back({{"nx", nx}, {"h", lv.grid->h}, {"dt", lv.stepper.dt()}, {"modes", mj},
                      {"verdict", verdict_json(v)}});
    for (std::size_t i = 0; i < tr.t.size(); ++i) out.csv.rows.push_back({double(nx), tr.t[i], tr.norm[i]});
    trs.push_back(tr);
    verdicts.push_back(v);
  }
  const bool agree = verdicts[0].kind == verdicts[1].kind;
  const GrowthKind kind = agree ? verdicts[1].kind : GrowthKind::unresolved;
  out.report["grid_levels"] = {{"cells", cfg.levels.back()}, {"nx", cfg.sim.nx}};
  out.report["kappa"] = kappa;
  out.report["levels"] = levels;
  out.report["verdict"] = to_string(kind);
  if (kind == GrowthKind::power) out.report["p"] = verdicts[1].power_p;
  out.report["two_grid_delta"] = {{"max_relative_norm", max_relative_gap(trs[0], trs[1])},
                                  {"p", std::abs(verdicts[0].power_p - verdicts[1].power_p)},
                                  {"verdict_agrees", agree}};
  if (kind == GrowthKind::unresolved) out.report["status"] = "unresolved";
  return out;
}

void write_file(const std::filesystem::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << s;
}

json issues_json(const std::vector<Issue>& v, const char* kind) {
  json a = json::array();
  for (const Issue& i : v) a.push_back({{"field", i.field}, {"message", i.message}, {"kind", kind}});
  return a;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"spectrum",    "svals",   "bc",     "kappa-scan", "classify",
                                          "asymptotics", "evolve",  "growth", "validate"};
  return c;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string to_csv(const Csv& csv) {
  std::string s;
  for (std::size_t i = 0; i < csv.columns.size(); ++i) s += (i ? "," : "") + csv.columns[i];
  s += "\n";
  for (const auto& row : csv.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ",";
      s += format_number(row[i]);
    }
    s += "\n";
  }
  return s;
}

Outcome run(const std::string& command, const ExperimentConfig& cfg) {
  if (command == "spectrum") return cmd_spectrum(cfg);
  if (command == "svals") return cmd_svals(cfg);
  if (command == "bc") return cmd_bc(cfg);
  if (command == "kappa-scan") return cmd_kappa_scan(cfg);
  if (command == "classify") return cmd_classify(cfg);
  if (command == "asymptotics") return cmd_asymptotics(cfg);
  if (command == "evolve") return cmd_evolve(cfg);
  if (command == "growth") return cmd_growth(cfg);
  if (command == "validate") {
    Outcome o{base("validate", cfg), {}};
    o.report["valid"] = true;
    return o;
  }
  throw ConfigError("command", "unknown command '" + command + "'");
}

int run_to_dir(const std::string& command, const std::string& config_path,
               const std::string& out_override, std::ostream& log) {
  namespace fs = std::filesystem;
  const ParseResult pr = validate_config(config_path);
  const fs::path dir = !out_override.empty() ? fs::path(out_override)
                       : pr.config                ? fs::path(pr.config->out_dir)
                                                  : fs::path("out");
  fs::create_directories(dir);
  const fs::path err = dir / (command + ".error.json");
  auto fail = [&](int code, json body) {
    body["command"] = command;
    body["schema_version"] = kSchemaVersion;
    if (pr.config) body["config_hash"] = pr.config->hash;
    write_file(err, body.dump(2) + "\n");
    log << command << ": " << body["status"].get<std::string>() << " (see " << err.string() << ")\n";
    return code;
  };

  if (!pr.ok()) {
    json issues = issues_json(pr.schema, "schema");
    for (const json& i : issues_json(pr.physics, "physics")) issues.push_back(i);
    for (const json& i : issues)
      log << "  " << i["field"].get<std::string>() << ": " << i["message"].get<std::string>() << "\n";
    return fail(schema_violation, {{"status", "schema_violation"}, {"issues", issues}});
  }
  const ExperimentConfig& cfg = *pr.config;
  try {
    const Outcome o = run(command, cfg);
    write_file(dir / (command + ".json"), o.report.dump(2) + "\n");
    if (cfg.csv && !o.csv.columns.empty()) write_file(dir / (command + ".csv"), to_csv(o.csv));
    log << command << ": " << o.report["status"].get<std::string>() << " -> " << dir.string() << "\n";
    return ok;
  } catch (const ConfigError& e) {
    return fail(schema_violation,
                {{"status", "schema_violation"},
                 {"issues", json::array({{{"field", e.field()}, {"message", e.what()}, {"kind", "schema"}}})}});
  } catch (const DomainError& e) {
    return fail(schema_violation,
                {{"status", "schema_violation"},
                 {"issues", json::array({{{"field", command}, {"message", e.what()}, {"kind", "domain"}}})}});
  } catch (const NumericalError& e) {
    return fail(numerical_failure,
                {{"status", "numerical_failure"}, {"message", e.what()}, {"achieved", e.achieved()}});
  } catch (const std::exception& e) {
    return fail(numerical_failure, {{"status", "numerical_failure"}, {"message", e.what()}});
  }
}

}  // namespace slab::cli
