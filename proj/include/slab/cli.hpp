#pragma once

#include "slab/config.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace slab::cli {

enum ExitCode { ok = 0, schema_violation = 2, numerical_failure = 3 };

const std::vector<std::string>& commands();

struct Csv {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Outcome {
  nlohmann::json report;  // status is "ok" or "unresolved"
  Csv csv;
};

// Runs one command; library exceptions propagate.
Outcome run(const std::string& command, const ExperimentConfig& cfg);

// Loads and validates the config, runs the command and writes
// <out>/<command>.json (+ .csv). Failures write <out>/<command>.error.json.
int run_to_dir(const std::string& command, const std::string& config_path,
               const std::string& out_override, std::ostream& log);

// Shortest round-trip decimal form.
std::string format_number(double v);
std::string to_csv(const Csv& csv);

}  // namespace slab::cli
