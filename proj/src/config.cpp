#include "slab/config.hpp"

#include "slab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace slab {

using nlohmann::json;

namespace {

// Walks one JSON object, mirrors accepted values (and defaults) into `out`,
// and records type errors and unknown keys.
class Reader {
public:
  Reader(const json& in, json& out, std::string path, std::vector<Issue>& issues)
      : in_(in), out_(out), path_(std::move(path)), issues_(issues) {
    if (!in_.is_object()) fail("", "must be an object");
    out_ = json::object();
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void fail(const std::string& key, const std::string& msg) {
    issues_.push_back({key.empty() ? path_ : field(key), msg});
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return in_.is_object() && in_.contains(key) && !in_.at(key).is_null();
  }

  double number(const std::string& key, double def) {
    double v = def;
    if (has(key)) {
      const json& x = in_.at(key);
      if (x.is_number() && std::isfinite(x.get<double>()))
        v = x.get<double>();
      else
        fail(key, "must be a finite number");
    }
    out_[key] = v;
    return v;
  }

  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key, 0.0);
  }

  double positive(const std::string& key, double def) {
    const double v = number(key, def);
    if (!(v > 0.0)) fail(key, "must be positive");
    return v;
  }

  long integer(const std::string& key, long def, long lo) {
    long v = def;
    if (has(key)) {
      const json& x = in_.at(key);
      if (x.is_number_integer())
        v = x.get<long>();
      else
        fail(key, "must be an integer");
    }
    if (v < lo) fail(key, "must be >= " + std::to_string(lo));
    out_[key] = v;
    return v;
  }

  bool boolean(const std::string& key, bool def) {
    bool v = def;
    if (has(key)) {
      if (in_.at(key).is_boolean())
        v = in_.at(key).get<bool>();
      else
        fail(key, "must be a boolean");
    }
    out_[key] = v;
    return v;
  }

  std::string string(const std::string& key, const std::string& def,
                     const std::vector<std::string>& allowed) {
    std::string v = def;
    if (has(key)) {
      if (in_.at(key).is_string())
        v = in_.at(key).get<std::string>();
      else
        fail(key, "must be a string");
    }
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(key, "must be one of {" + list + "}");
    }
    out_[key] = v;
    return v;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    if (has(key)) {
      const json& x = in_.at(key);
      std::vector<double> v;
      bool good = x.is_array();
      if (good)
        for (const json& e : x) {
          if (!e.is_number() || !std::isfinite(e.get<double>())) {
            good = false;
            break;
          }
          v.push_back(e.get<double>());
        }
      if (good)
        def = std::move(v);
      else
        fail(key, "must be an array of finite numbers");
    }
    out_[key] = def;
    return def;
  }

  std::vector<long> integers(const std::string& key, std::vector<long> def) {
    if (has(key)) {
      const json& x = in_.at(key);
      std::vector<long> v;
      bool good = x.is_array();
      if (good)
        for (const json& e : x) {
          if (!e.is_number_integer()) {
            good = false;
            break;
          }
          v.push_back(e.get<long>());
        }
      if (good)
        def = std::move(v);
      else
        fail(key, "must be an array of integers");
    }
    out_[key] = def;
    return def;
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return has(key) ? in_.at(key) : empty;
  }

  json& slot(const std::string& key) { return out_[key]; }

  void finish() {
    if (!in_.is_object()) return;
    for (const auto& item : in_.items())
      if (!seen_.count(item.key())) fail(item.key(), "unknown key");
  }

private:
  const json& in_;
  json& out_;
  std::string path_;
  std::vector<Issue>& issues_;
  std::set<std::string> seen_;
};

Profile read_profile(Reader& root, std::vector<Issue>& issues, int& tune_critical) {
  if (!root.has("profile")) {
    issues.push_back({"profile", "required"});
    return Profile{};
  }
  Reader r(root.raw("profile"), root.slot("profile"), "profile", issues);
  const std::string kind = r.string("kind", "step", {"step", "segments", "zero"});
  tune_critical = int(r.integer("tune_critical", 0, 0));
  Profile p;
  try {
    if (kind == "step") {
      const double kappa = r.number("kappa", 1.0);
      const double hw = r.positive("half_width", 1.0);
      if (kappa < 0.0) r.fail("kappa", "must be nonnegative");
      else p = kappa == 0.0 ? Profile{} : Profile::step(kappa, hw);
    } else if (kind == "segments") {
      const json& segs = r.raw("segments");
      json& out = r.slot("segments");
      out = json::array();
      std::vector<Segment> v;
      if (!segs.is_array() || segs.empty()) {
        r.fail("segments", "must be a nonempty array of {x0, x1, value}");
      } else {
        for (std::size_t i = 0; i < segs.size(); ++i) {
          json o;
          Reader s(segs[i], o, "profile.segments[" + std::to_string(i) + "]", issues);
          Segment g;
          g.x0 = s.number("x0", 0.0);
          g.x1 = s.number("x1", 0.0);
          g.value = s.number("value", 0.0);
          s.finish();
          out.push_back(o);
          v.push_back(g);
        }
        p = Profile(v);
      }
    }
  } catch (const ConfigError& e) {
    issues.push_back({e.field(), e.what()});
  }
  r.finish();
  return p;
}

CollisionKernel read_kernel(Reader& root, std::vector<Issue>& schema, std::vector<Issue>& physics) {
  Reader r(root.raw("collision"), root.slot("collision"), "collision", schema);
  const std::string kind = r.string("kind", "isotropic", {"isotropic", "polynomial"});
  CollisionKernel k = CollisionKernel::isotropic();
  if (kind == "polynomial") {
    const json& terms = r.raw("terms");
    json& out = r.slot("terms");
    out = json::array();
    std::vector<KernelTerm> v;
    if (!terms.is_array() || terms.empty()) {
      r.fail("terms", "must be a nonempty array of {k, coeffs | legendre}");
    } else {
      for (std::size_t i = 0; i < terms.size(); ++i) {
        json o;
        Reader t(terms[i], o, "collision.terms[" + std::to_string(i) + "]", schema);
        KernelTerm term;
        term.k = t.positive("k", 1.0);
        if (t.has("legendre")) {
          const long n = t.integer("legendre", 0, 0);
          term.poly = normalized_legendre(int(n));
        } else {
          const std::vector<double> c = t.numbers("coeffs", {});
          if (c.empty()) t.fail("coeffs", "required unless legendre is given");
          term.poly.coeffs = Eigen::Map<const Eigen::VectorXd>(c.data(), Eigen::Index(c.size()));
        }
        t.finish();
        out.push_back(o);
        v.push_back(term);
      }
      bool shaped = true;
      for (const auto& term : v) shaped = shaped && term.poly.coeffs.size() > 0 && term.k > 0.0;
      if (shaped) {
        // K >= 0 requires a positive definite Gram matrix of the P_i.
        Eigen::MatrixXd gram(v.size(), v.size());
        for (std::size_t a = 0; a < v.size(); ++a)
          for (std::size_t b = 0; b < v.size(); ++b)
            gram(a, b) = Polynomial::inner(v[a].poly, v[b].poly);
        const double low = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram).eigenvalues()[0];
        if (!(low > 1e-12))
          physics.push_back({"collision.terms", "Gram matrix of the P_i is not positive definite "
                                                "(smallest eigenvalue " + std::to_string(low) + ")"});
        try {
          k = CollisionKernel::polynomial(v);
        } catch (const ConfigError& e) {
          physics.push_back({e.field(), e.what()});
        }
      }
    }
  }
  r.finish();
  return k;
}

InitialSpec read_initial(Reader& parent, const std::string& path, std::uint64_t seed,
                         std::vector<Issue>& issues, const std::string& def_kind) {
  Reader r(parent.raw("initial"), parent.slot("initial"), path + ".initial", issues);
  InitialSpec s;
  s.kind = r.string("kind", def_kind, {"random", "gaussian", "resonant", "eigenmode"});
  if (s.kind == "random") {
    s.lo = r.number("lo", -1.0);
    s.hi = r.number("hi", 1.0);
    if (!(s.hi > s.lo)) r.fail("hi", "must exceed lo");
    const std::vector<long> seeds = r.integers("seeds", {long(seed)});
    if (seeds.empty()) r.fail("seeds", "must be nonempty");
    for (long v : seeds) {
      if (v < 0) r.fail("seeds", "must be nonnegative");
      s.seeds.push_back(std::uint64_t(v));
    }
  } else if (s.kind == "gaussian") {
    s.x0 = r.number("x0", 0.0);
    s.width = r.positive("width", 1.0);
  } else if (s.kind == "resonant") {
    s.eps0 = r.positive("eps0", 1e-4);
    s.weight_power = r.number("weight_power", 0.75);
    s.radius = r.positive("radius", 10.0);
  } else {
    s.mode_index = int(r.integer("mode_index", 0, 0));
  }
  r.finish();
  return s;
}

void check_delta(const char* field, double delta, const ExperimentConfig& c,
                 std::vector<Issue>& physics) {
  if (delta == 0.0 || c.profile.is_zero()) return;
  const double a = c.profile.diameter();
  const double kn = c.kernel.norm();
  const double c1 = c.profile.l1_norm();
  const double b1 = 1.0 / (2.0 * a);
  const double b2 = c.c_n / (a * kn * kn * c1 * c1);
  const double bound = std::min(b1, b2);
  if (delta < 0.0 || delta > bound) {
    std::ostringstream os;
    os.precision(17);
    os << "delta = " << delta << " exceeds min{1/(2a), C_N/(a |K|^2 |c|_1^2)} = min{" << b1
       << ", " << b2 << "} = " << bound << " (a = " << a << ", |K| = " << kn
       << ", |c|_1 = " << c1 << ", C_N = " << c.c_n << ")";
    physics.push_back({field, os.str()});
  }
}

}  // namespace

std::string config_hash(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ParseResult parse_config(const json& j) {
  ParseResult res;
  ExperimentConfig c;
  std::vector<Issue>& schema = res.schema;
  Reader root(j, c.echo, "", schema);
  if (!j.is_object()) return res;

  const long version = root.integer("schema_version", kSchemaVersion, 1);
  if (version != kSchemaVersion)
    root.fail("schema_version", "unsupported (expected " + std::to_string(kSchemaVersion) + ")");
  c.seed = std::uint64_t(root.integer("seed", 0, 0));

  c.profile = read_profile(root, schema, c.tune_critical);
  c.kernel = read_kernel(root, schema, res.physics);
  {
    Reader r(root.raw("constants"), root.slot("constants"), "constants", schema);
    c.c_n = r.positive("C_N", 1.0);
    r.finish();
  }
  {
    Reader r(root.raw("grid"), root.slot("grid"), "grid", schema);
    const long cells = r.integer("cells", 128, 1);
    const std::vector<long> lv = r.integers("levels", {cells, 2 * cells});
    for (long v : lv) {
      if (v < 1) r.fail("levels", "entries must be positive");
      c.levels.push_back(int(v));
    }
    if (c.levels.size() < 2) r.fail("levels", "at least two grid levels required");
    if (!std::is_sorted(c.levels.begin(), c.levels.end()) ||
        std::adjacent_find(c.levels.begin(), c.levels.end()) != c.levels.end())
      r.fail("levels", "must be strictly ascending");
    c.sim.X = r.positive("X", 22.0);
    const std::vector<long> nx = r.integers("nx", {4096, 8192});
    for (long v : nx) {
      if (v < 8) r.fail("nx", "entries must be >= 8");
      c.sim.nx.push_back(int(v));
    }
    if (c.sim.nx.size() != 2) r.fail("nx", "exactly two simulator resolutions required");
    c.sim.mu_nodes = int(r.integer("mu_nodes", 32, 2));
    const std::string rule = r.string("mu_rule", "gauss", {"gauss", "graded"});
    c.sim.mu_rule = rule == "graded" ? MuRule::graded : MuRule::gauss;
    if (c.sim.mu_nodes % 2 != 0) r.fail("mu_nodes", "must be even");
    if (c.sim.mu_rule == MuRule::graded && c.sim.mu_nodes % (2 * kGradedPanelPoints) != 0)
      r.fail("mu_nodes", "graded rule needs a multiple of " + std::to_string(2 * kGradedPanelPoints));
    c.sim.dt_over_h = r.positive("dt_over_h", 1.0);
    r.finish();
  }
  {
    Reader r(root.raw("spectrum"), root.slot("spectrum"), "spectrum", schema);
    c.spectrum.eps_lo = r.positive("eps_lo", 1e-6);
    c.spectrum.eps_hi = r.optional_number("eps_hi");
    if (c.spectrum.eps_hi && !(*c.spectrum.eps_hi > c.spectrum.eps_lo))
      r.fail("eps_hi", "must exceed eps_lo");
    Reader k(r.raw("contour"), r.slot("contour"), "spectrum.contour", schema);
    c.spectrum.contour.re_lo = k.number("re_lo", -1.0);
    c.spectrum.contour.re_hi = k.number("re_hi", 1.0);
    c.spectrum.contour.im_lo = k.positive("im_lo", 1e-3);
    c.spectrum.contour.im_hi = k.positive("im_hi", 1.0);
    if (!(c.spectrum.contour.re_hi > c.spectrum.contour.re_lo)) k.fail("re_hi", "must exceed re_lo");
    if (!(c.spectrum.contour.im_hi > c.spectrum.contour.im_lo)) k.fail("im_hi", "must exceed im_lo");
    k.finish();
    r.finish();
  }
  {
    Reader r(root.raw("svals"), root.slot("svals"), "svals", schema);
    c.svals.k = r.numbers("k", {-2.0, -0.5, 0.0, 0.5, 2.0});
    c.svals.beta = r.positive("beta", 0.5);
    if (c.svals.k.empty()) r.fail("k", "must be nonempty");
    r.finish();
  }
  {
    Reader r(root.raw("bc"), root.slot("bc"), "bc", schema);
    c.bc.eps = r.numbers("eps", {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8});
    if (c.bc.eps.size() < 3) r.fail("eps", "at least three values required");
    for (double e : c.bc.eps)
      if (!(e > 0.0)) r.fail("eps", "entries must be positive");
    r.finish();
  }
  {
    Reader r(root.raw("kappa_scan"), root.slot("kappa_scan"), "kappa_scan", schema);
    c.kappa_scan.kappa_lo = r.positive("kappa_lo", 0.5);
    c.kappa_scan.kappa_hi = r.positive("kappa_hi", 9.0);
    if (!(c.kappa_scan.kappa_hi > c.kappa_scan.kappa_lo)) r.fail("kappa_hi", "must exceed kappa_lo");
    r.finish();
  }
  {
    Reader r(root.raw("classify"), root.slot("classify"), "classify", schema);
    c.classify.tol = r.positive("tol", 1e-6);
    r.finish();
  }
  {
    Reader r(root.raw("asymptotics"), root.slot("asymptotics"), "asymptotics", schema);
    json& fout = r.slot("formulas");
    fout = json::array();
    if (r.has("formulas")) {
      const json& f = r.raw("formulas");
      if (!f.is_array() || f.empty()) r.fail("formulas", "must be a nonempty array of names");
      else
        for (const json& e : f) {
          try {
            if (!e.is_string()) throw ConfigError("asymptotics.formulas", "must be strings");
            c.asymptotics.formulas.push_back(formula_from_string(e.get<std::string>()));
            fout.push_back(e);
          } catch (const ConfigError&) {
            r.fail("formulas", "unknown formula " + e.dump() +
                                   " (este0, Slog, Ssimple_pole, Ssimple_vartheta0, power_order)");
          }
        }
    } else {
      c.asymptotics.formulas = {Formula::este0};
      fout.push_back("este0");
    }
    const double pi = 3.14159265358979323846;
    c.asymptotics.args = r.numbers("args", {pi / 4, pi / 2, 3 * pi / 4});
    for (double a : c.asymptotics.args)
      if (!(a > 0.0 && a < pi)) r.fail("args", "rays must lie in the open upper half plane");
    c.asymptotics.radii = r.numbers("radii", {1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4});
    if (c.asymptotics.radii.size() < 2) r.fail("radii", "at least two radii required");
    for (double v : c.asymptotics.radii)
      if (!(v > 0.0)) r.fail("radii", "entries must be positive");
    c.asymptotics.tol = r.positive("tol", 1e-6);
    c.asymptotics.delta = r.number("delta", 0.0);
    r.finish();
  }
  {
    Reader r(root.raw("evolve"), root.slot("evolve"), "evolve", schema);
    c.evolve.T = r.positive("T", 20.0);
    c.evolve.samples = int(r.integer("samples", 40, 2));
    c.evolve.initial = read_initial(r, "evolve", c.seed, schema, "random");
    r.finish();
  }
  {
    Reader r(root.raw("growth"), root.slot("growth"), "growth", schema);
    c.growth.t0 = r.positive("t0", 1.0);
    c.growth.T = r.positive("T", 100.0);
    if (!(c.growth.T > c.growth.t0)) r.fail("T", "must exceed t0");
    c.growth.samples = int(r.integer("samples", 40, 4));
    c.growth.interval = r.positive("interval", 1.0);
    c.growth.ratio_threshold = r.positive("ratio_threshold", 3.0);
    c.growth.growth_threshold = r.positive("growth_threshold", 0.1);
    c.growth.initial = read_initial(r, "growth", c.seed, schema, "random");
    r.finish();
  }
  {
    Reader r(root.raw("output"), root.slot("output"), "output", schema);
    c.out_dir = r.string("dir", "out", {});
    c.csv = r.boolean("csv", true);
    r.finish();
  }
  root.finish();

  if (!c.profile.is_zero() && c.levels.size() >= 2) {
    check_delta("asymptotics.delta", c.asymptotics.delta, c, res.physics);
  }
  c.hash = config_hash(c.echo);
  res.config = std::move(c);
  return res;
}

ParseResult validate_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ParseResult r;
    r.schema.push_back({"config", "cannot open '" + path + "'"});
    return r;
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    ParseResult r;
    r.schema.push_back({"config", std::string("invalid JSON: ") + e.what()});
    return r;
  }
  return parse_config(j);
}

Problem make_problem(const ExperimentConfig& cfg, int cells, double* kappa) {
  if (cfg.tune_critical == 0) {
    if (kappa) *kappa = 1.0;
    return make_problem(cfg.profile, cfg.kernel, cells);
  }
  const double k = grid_critical_kappa(make_problem(cfg.profile, cfg.kernel, cells), cfg.tune_critical);
  if (kappa) *kappa = k;
  return make_problem(cfg.profile.scaled(k), cfg.kernel, cells);
}

}  // namespace slab
