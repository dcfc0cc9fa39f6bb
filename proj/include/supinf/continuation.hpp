#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "supinf/kkt.hpp"
#include "supinf/solver.hpp"

namespace supinf {

struct Schedule {
  double p0 = 3.0;  // default max(n,2)+1
  double gamma = 2.0;
  int steps = 6;

  std::vector<double> values() const;
};

struct TraceEntry {
  SolveState state;
  RescaledMultipliers resc;
  double sigma_mass = 0.0, tau_mass = 0.0;
  std::array<double, 4> pairings{};  // test functions 1, x, x^2, center bump vs sigma
};

struct ContinuationTrace {
  std::vector<TraceEntry> entries;
  bool aborted = false;
  std::string abort_reason;
  std::string flags;
  // limit diagnostics from the tail
  double F_inf_estimate = 0.0;  // F_inf of the last iterate
  double G_inf_last = 0.0;
  double Lambda_tail = 1.0, M_tail = 0.0, psi_tail = 0.0;
  double tail_oscillation = 0.0;  // spread of Lambda/M/|Psi| over the last 3 states
};

// Warm-started solves along the p-schedule with per-state diagnostics.
// Infeasibility at p0 propagates; non-convergence aborts the schedule and
// returns the partial trace.
ContinuationTrace run_schedule(const Problem& prob, const Schedule& sched,
                               const SolveConfig& cfg);

// Pairings int phi d(sigma_p) along the trace for the fixed test set.
struct PairingTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // [fn][j]
  std::vector<double> tail_gap;             // |last - previous| per fn
};
PairingTable measure_pairing_trace(const ContinuationTrace& trace);

// Test-function values at a point, in table order.
std::array<double, 4> pairing_test_functions(const Mesh& mesh, const double* x);
double measure_pairing(const DiscreteMeasure& m, const Mesh& mesh, int which);

struct ConsistencyReport {
  bool passed = true;
  std::vector<std::string> violations;
};

// Checks the minimality/Hoelder chain along the trace: F_p(u_p)
// nondecreasing within tolerance and bounded by F_inf of the last
// iterate, G_p(u_p) <= G + feasibility tolerance throughout.
ConsistencyReport sup_estimate_consistency(const ContinuationTrace& trace, double G,
                                           double feas_tol);
ConsistencyReport sup_estimate_consistency(std::span<const double> F_values, double F_inf_last,
                                           std::span<const double> G_values, double G,
                                           double feas_tol);

}  // namespace supinf
