#include "supinf/continuation.hpp"

#include <cmath>
#include <stdexcept>

namespace supinf {

std::vector<double> Schedule::values() const {
  if (!(p0 >= 1.0)) throw std::invalid_argument("schedule: p0 must be >= 1");
  if (!(gamma > 1.0)) throw std::invalid_argument("schedule: gamma must exceed 1");
  if (steps < 1) throw std::invalid_argument("schedule: steps must be >= 1");
  std::vector<double> v(steps);
  double p = p0;
  for (int j = 0; j < steps; ++j) {
    v[j] = p;
    p *= gamma;
  }
  return v;
}

std::array<double, 4> pairing_test_functions(const Mesh& mesh, const double* x) {
  std::array<double, 4> out{1.0, x[0], x[0] * x[0], 0.0};
  // C-infinity bump supported on the middle half of the box
  double r2 = 0.0;
  for (int a = 0; a < mesh.dim; ++a) {
    const double c = 0.5 * (mesh.lo[a] + mesh.hi[a]);
    const double rad = 0.25 * (mesh.hi[a] - mesh.lo[a]);
    const double t = (x[a] - c) / rad;
    r2 += t * t;
  }
  out[3] = r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
  return out;
}

double measure_pairing(const DiscreteMeasure& m, const Mesh& mesh, int which) {
  double acc = 0.0;
  for (int q = 0; q < mesh.quad_count(); ++q) {
    if (m.weights[q] == 0.0) continue;
    const auto x = mesh.quad_point(q);
    acc += m.weights[q] * pairing_test_functions(mesh, x.data())[which];
  }
  return acc;
}

ContinuationTrace run_schedule(const Problem& prob, const Schedule& sched,
                               const SolveConfig& cfg) {
  ContinuationTrace trace;
  const std::vector<double> ps = sched.values();

  Field warm_u;
  RawMultipliers warm_m;
  bool have_warm = false;

  for (std::size_t j = 0; j < ps.size(); ++j) {
    WarmStart ws;
    if (have_warm) {
      ws.u = &warm_u;
      ws.mults = &warm_m;
    }
    SolveState st;
    try {
      st = solve_p(prob, ps[j], cfg, ws);
    } catch (const InfeasibleError&) {
      if (j == 0) throw;  // incompatible problem, nothing to trace
      trace.aborted = true;
      trace.abort_reason = "solver reported infeasibility at p = " + std::to_string(ps[j]);
      break;
    }

    TraceEntry e;
    e.state = std::move(st);
    e.resc = rescale(e.state.mults, e.state.F_p, e.state.G_p, e.state.p);
    auto [sigma, tau] = build_measures(e.state, prob);
    e.sigma_mass = sigma.mass;
    e.tau_mass = tau.mass;
    for (int t = 0; t < 4; ++t) e.pairings[t] = measure_pairing(sigma, prob.mesh, t);
    e.state.kkt_res = kkt_residual_p(e.state, prob, 64, cfg.seed);

    const bool ok = e.state.converged;
    warm_u = e.state.u;
    warm_m = e.state.mults;
    have_warm = true;
    trace.entries.push_back(std::move(e));

    if (!ok) {
      trace.aborted = true;
      trace.abort_reason = "solver did not converge at p = " + std::to_string(ps[j]);
      break;
    }
  }

  if (!trace.entries.empty()) {
    const TraceEntry& last = trace.entries.back();
    trace.F_inf_estimate = last.state.F_inf;
    trace.G_inf_last = last.state.G_inf;
    trace.Lambda_tail = last.resc.Lambda;
    trace.M_tail = last.resc.M;
    trace.psi_tail = last.resc.psi_sup;
    const std::size_t n = trace.entries.size();
    const std::size_t k0 = n >= 3 ? n - 3 : 0;
    double lmin = 1e300, lmax = -1e300, mmin = 1e300, mmax = -1e300, pmin = 1e300,
           pmax = -1e300;
    for (std::size_t j = k0; j < n; ++j) {
      const auto& r = trace.entries[j].resc;
      lmin = std::min(lmin, r.Lambda);
      lmax = std::max(lmax, r.Lambda);
      mmin = std::min(mmin, r.M);
      mmax = std::max(mmax, r.M);
      pmin = std::min(pmin, r.psi_sup);
      pmax = std::max(pmax, r.psi_sup);
    }
    trace.tail_oscillation = std::max({lmax - lmin, mmax - mmin, pmax - pmin});
    // flag violations of the minimality chain
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double a = trace.entries[j].state.F_p;
      const double b = trace.entries[j + 1].state.F_p;
      if (b < a - 1e-8 * (1.0 + std::fabs(a))) {
        trace.flags += "nonmonotone_F;";
        break;
      }
    }
  }
  return trace;
}

PairingTable measure_pairing_trace(const ContinuationTrace& trace) {
  if (trace.entries.size() < 2)
    throw std::invalid_argument("measure_pairing_trace: need at least 2 states");
  PairingTable t;
  t.names = {"1", "x", "x^2", "bump"};
  t.values.assign(4, {});
  for (int fn = 0; fn < 4; ++fn) {
    for (const auto& e : trace.entries) t.values[fn].push_back(e.pairings[fn]);
    const auto& v = t.values[fn];
    t.tail_gap.push_back(std::fabs(v[v.size() - 1] - v[v.size() - 2]));
  }
  return t;
}

ConsistencyReport sup_estimate_consistency(std::span<const double> F_values, double F_inf_last,
                                           std::span<const double> G_values, double G,
                                           double feas_tol) {
  ConsistencyReport rep;
  auto fail = [&rep](std::string msg) {
    rep.passed = false;
    rep.violations.push_back(std::move(msg));
  };
  for (std::size_t j = 0; j + 1 < F_values.size(); ++j) {
    const double tol = 1e-8 * (1.0 + std::fabs(F_values[j]));
    if (F_values[j + 1] < F_values[j] - tol)
      fail("F_p sequence decreases at step " + std::to_string(j + 1));
  }
  if (!F_values.empty() && F_values.back() > F_inf_last + 1e-8 * (1.0 + F_inf_last))
    fail("final F_p exceeds F_inf of the last iterate");
  for (std::size_t j = 0; j < G_values.size(); ++j)
    if (G_values[j] > G + feas_tol)
      fail("G_p exceeds the bound at step " + std::to_string(j));
  return rep;
}

ConsistencyReport sup_estimate_consistency(const ContinuationTrace& trace, double G,
                                           double feas_tol) {
  std::vector<double> F, Gv;
  for (const auto& e : trace.entries) {
    F.push_back(e.state.F_p);
    Gv.push_back(e.state.G_p);
  }
  return sup_estimate_consistency(F, trace.F_inf_estimate, Gv, G, feas_tol);
}

}  // namespace supinf
