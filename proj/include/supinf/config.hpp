#pragma once

#include <string>
#include <vector>

#include "supinf/continuation.hpp"
#include "supinf/solver.hpp"

namespace supinf {

// Run configuration parsed from the TOML-style sectioned key/value file.
// Unknown sections or keys are fatal; all validation errors are reported
// together.
struct RunConfig {
  // [mesh]
  int dim = 1;
  std::array<int, 2> cells{256, 256};
  std::array<double, 4> extent{0.0, 1.0, 0.0, 1.0};
  // [problem]
  std::string f = "dirichlet";
  std::string coef = "one";          // weighted_dirichlet coefficient
  std::vector<double> tensor;        // f = "tensor" entries, (N*dim)^2 values
  std::string g = "abs";
  double g_value = 1.0;              // g = "const" level
  double G = 1e9;
  int components = 1;
  // [constraint]
  std::string kind = "none";
  std::string pi = "comp0_minus_c";
  double c = 0.0;
  double radius = 1.0;
  std::vector<double> box_lo, box_hi;
  std::string h = "neg_component_0";
  double H = 0.0;
  // [solver]
  SolveConfig solver;
  // [schedule]
  Schedule schedule;
  // [output]
  std::string out_dir;  // empty: SUPINF_OUT or ./out
  bool timing = true;
};

struct ParseResult {
  RunConfig config;
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

ParseResult parse_config(const std::string& path);
ParseResult parse_config_text(const std::string& text, const std::string& origin);

// Materializes the mesh/densities/constraint described by the config.
Problem make_problem(const RunConfig& cfg);

// Dumps every key with full precision; the output parses back to an
// identical configuration (used by `check` to rebuild the problem).
void write_resolved_config(const std::string& path, const RunConfig& cfg);

std::string default_out_dir(const RunConfig& cfg);

}  // namespace supinf
