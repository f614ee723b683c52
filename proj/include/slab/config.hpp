#pragma once

#include "slab/profile.hpp"
#include "slab/spectra.hpp"
#include "slab/transport_sim.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace slab {

inline constexpr int kSchemaVersion = 1;

struct Issue {
  std::string field;
  std::string message;
};

struct InitialSpec {
  std::string kind = "random";  // random | gaussian | resonant | eigenmode
  double lo = -1.0, hi = 1.0;   // random support
  std::vector<std::uint64_t> seeds;
  double x0 = 0.0, width = 1.0;  // gaussian
  double eps0 = 1e-4, weight_power = 0.75, radius = 10.0;  // resonant
  int mode_index = 0;            // eigenmode
};

struct SimGrid {
  double X = 22.0;
  std::vector<int> nx;           // two resolutions, coarse first
  int mu_nodes = 32;
  MuRule mu_rule = MuRule::gauss;
  double dt_over_h = 1.0;
};

struct ExperimentConfig {
  nlohmann::json echo;           // normalized config with defaults filled in
  std::string hash;

  Profile profile;
  int tune_critical = 0;         // > 0: Galerkin levels use the n-th grid-critical multiple
  CollisionKernel kernel = CollisionKernel::isotropic();
  std::vector<int> levels;       // Galerkin cell counts, ascending
  SimGrid sim;
  std::uint64_t seed = 0;
  double c_n = 1.0;
  std::string out_dir = "out";
  bool csv = true;

  struct {
    double eps_lo = 1e-6;
    std::optional<double> eps_hi;
    Contour contour;
  } spectrum;
  struct {
    std::vector<double> k;
    double beta = 0.5;
  } svals;
  struct {
    std::vector<double> eps;
  } bc;
  struct {
    double kappa_lo = 0.5, kappa_hi = 9.0;
  } kappa_scan;
  struct {
    double tol = 1e-6;
  } classify;
  struct {
    std::vector<Formula> formulas;
    std::vector<double> args, radii;
    double tol = 1e-6;
    double delta = 0.0;          // 0 selects the admissible bound
  } asymptotics;
  struct {
    double T = 20.0;
    int samples = 40;
    InitialSpec initial;
  } evolve;
  struct {
    double t0 = 1.0, T = 100.0;
    int samples = 40;
    double interval = 1.0;
    double ratio_threshold = 3.0;
    double growth_threshold = 0.1;
    InitialSpec initial;
  } growth;
};

struct ParseResult {
  std::optional<ExperimentConfig> config;
  std::vector<Issue> schema;     // structural violations
  std::vector<Issue> physics;    // kernel and delta admissibility
  bool ok() const { return config.has_value() && schema.empty() && physics.empty(); }
};

// Schema check followed by the physics checks; never throws on bad input.
ParseResult parse_config(const nlohmann::json& j);
ParseResult validate_config(const std::string& path);

// FNV-1a 64 of the compact dump (keys sorted), as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

// Galerkin problem on `cells` cells; with tune_critical the profile is rescaled
// to the grid-critical amplitude of that level, returned through `kappa`.
Problem make_problem(const ExperimentConfig& cfg, int cells, double* kappa = nullptr);

}  // namespace slab
