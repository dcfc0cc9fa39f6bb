// supinf: solve | sweep | check | oracle pipelines over config files.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "supinf/config.hpp"
#include "supinf/field_io.hpp"
#include "supinf/kkt.hpp"
#include "supinf/oracle.hpp"

namespace fs = std::filesystem;
using namespace supinf;

namespace {

void write_multipliers(const std::string& path, const RawMultipliers& m) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot write " + path);
  std::fprintf(fp, "# supinf-multipliers lambda=%.17g mu=%.17g pointwise=%zu scalars=%zu\n",
               m.lambda, m.mu, m.psi.pointwise.size(), m.psi.scalars.size());
  for (double v : m.psi.pointwise) std::fprintf(fp, "%.17g\n", v);
  for (double v : m.psi.scalars) std::fprintf(fp, "%.17g\n", v);
  std::fclose(fp);
}

RawMultipliers read_multipliers(const std::string& path, const ConstraintSpec& spec,
                                const Mesh& mesh) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string header;
  std::getline(in, header);
  RawMultipliers m;
  std::size_t np = 0, ns = 0;
  if (std::sscanf(header.c_str(), "# supinf-multipliers lambda=%lg mu=%lg pointwise=%zu scalars=%zu",
                  &m.lambda, &m.mu, &np, &ns) != 4)
    throw std::runtime_error("bad multiplier header in " + path);
  m.psi = zero_value(spec, mesh);
  if (m.psi.pointwise.size() != np || m.psi.scalars.size() != ns)
    throw std::runtime_error("multiplier payload does not match the constraint in " + path);
  for (auto& v : m.psi.pointwise) in >> v;
  for (auto& v : m.psi.scalars) in >> v;
  if (!in) throw std::runtime_error("truncated multiplier file " + path);
  return m;
}

void write_state_csv(const std::string& path, const SolveState& st, bool timing) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot write " + path);
  std::fprintf(fp, "p,F_p,G_p,mu,psi_norm,kkt_res,slack,feasibility,outer_iters,wall_ms\n");
  std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n", st.p, st.F_p,
               st.G_p, st.mults.mu, st.mults.psi.sup_norm(), st.kkt_res, st.slack, st.feasibility,
               st.outer_iters, timing ? st.wall_ms : 0.0);
  std::fclose(fp);
}

void write_trace_csv(const std::string& path, const ContinuationTrace& trace, bool timing) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot write " + path);
  std::fprintf(fp,
               "j,p,F_p,F_inf_of_up,G_p,mu,Lambda,M,psi_norm,kkt_res,slack,sigma_mass,tau_mass,"
               "pairing_1,pairing_x,pairing_x2,pairing_bump,outer_iters,wall_ms\n");
  for (std::size_t j = 0; j < trace.entries.size(); ++j) {
    const auto& e = trace.entries[j];
    const auto& st = e.state;
    std::fprintf(fp,
                 "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                 "%.17g,%.17g,%.17g,%.17g,%d,%.17g\n",
                 j, st.p, st.F_p, st.F_inf, st.G_p, st.mults.mu, e.resc.Lambda, e.resc.M,
                 st.mults.psi.sup_norm(), st.kkt_res, st.slack, e.sigma_mass, e.tau_mass,
                 e.pairings[0], e.pairings[1], e.pairings[2], e.pairings[3], st.outer_iters,
                 timing ? st.wall_ms : 0.0);
  }
  std::fclose(fp);
}

struct CheckTols {
  double kkt = -1.0;  // default 10*inner_tol
  double mass = 1e-12;
  double slack = 1e-8;
};

// Recomputes the invariant suite for a state; prints one line per check.
int run_checks(const Problem& prob, const RunConfig& cfg, const SolveState& st,
               const CheckTols& tols) {
  int failures = 0;
  auto report = [&failures](const std::string& name, double value, double threshold) {
    const bool ok = value <= threshold;
    if (!ok) ++failures;
    std::printf("%s %s value=%.6g threshold=%.6g\n", ok ? "ok" : "FAIL", name.c_str(), value,
                threshold);
  };

  try {
    validate_field(st.u, prob.mesh);
    std::printf("ok field_valid\n");
  } catch (const std::exception& e) {
    ++failures;
    std::printf("FAIL field_valid %s\n", e.what());
  }

  report("feasibility", st.feasibility, 10.0 * cfg.solver.outer_tol);

  const auto [sigma, tau] = build_measures(st, prob);
  report("sigma_mass", sigma.mass, 1.0 + tols.mass);
  report("tau_mass", tau.mass, 1.0 + tols.mass);

  const auto [emi_lhs, emi_rhs] = energy_measure_identity(st, prob, sigma);
  report("energy_measure_identity", std::fabs(emi_lhs - emi_rhs), 1e-10 * (1.0 + emi_rhs));

  const RescaledMultipliers rm = rescale(st.mults, st.F_p, st.G_p, st.p);
  report("multiplier_normalization", std::fabs(rm.Lambda + rm.M + rm.psi_sup - 1.0), 1e-14);
  if (std::isfinite(rm.log_R)) std::printf("ok R_positive log_R=%.6g\n", rm.log_R);
  else {
    ++failures;
    std::printf("FAIL R_positive log_R=%.6g\n", rm.log_R);
  }

  report("slackness", slackness(st, prob.G), tols.slack * (1.0 + prob.G));

  const double kkt = kkt_residual_p(st, prob, 64, cfg.solver.seed);
  report("kkt_residual", kkt, tols.kkt > 0.0 ? tols.kkt : 10.0 * cfg.solver.inner_tol);

  if (!st.converged) {
    ++failures;
    std::printf("FAIL converged flags=%s\n", st.flags.c_str());
  } else {
    std::printf("ok converged\n");
  }
  return failures;
}

SolveState finish_state(const Problem& prob, const RunConfig& cfg, SolveState st) {
  st.kkt_res = kkt_residual_p(st, prob, 64, cfg.solver.seed);
  return st;
}

int cmd_solve(const std::string& config_path, double p_override, const std::string& warm_path,
              std::string out_dir, bool no_timing) {
  ParseResult pr = parse_config(config_path);
  if (!pr.ok()) {
    for (const auto& e : pr.errors) std::fprintf(stderr, "config error: %s\n", e.c_str());
    return 2;
  }
  RunConfig cfg = pr.config;
  if (no_timing) cfg.timing = false;
  if (out_dir.empty()) out_dir = default_out_dir(cfg);
  fs::create_directories(out_dir);

  Problem prob = make_problem(cfg);
  const double p = p_override > 0.0 ? p_override : cfg.schedule.p0;

  Field warm;
  WarmStart ws;
  if (!warm_path.empty()) {
    warm = read_field_for_mesh(warm_path, prob.mesh);
    ws.u = &warm;
  }

  SolveState st;
  try {
    st = finish_state(prob, cfg, solve_p(prob, p, cfg.solver, ws));
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }

  write_state_csv(out_dir + "/state.csv", st, cfg.timing);
  write_field(out_dir + "/u.field", st.u, prob.mesh);
  write_multipliers(out_dir + "/multipliers.txt", st.mults);
  write_resolved_config(out_dir + "/run.cfg", cfg);

  const int failures = run_checks(prob, cfg, st, CheckTols{});
  std::printf("solve p=%g F_p=%.12g G_p=%.12g feasibility=%.3g outer=%d\n", p, st.F_p, st.G_p,
              st.feasibility, st.outer_iters);
  return failures == 0 ? 0 : 1;
}

int cmd_sweep(const std::string& config_path, std::string out_dir, bool no_timing) {
  ParseResult pr = parse_config(config_path);
  if (!pr.ok()) {
    for (const auto& e : pr.errors) std::fprintf(stderr, "config error: %s\n", e.c_str());
    return 2;
  }
  RunConfig cfg = pr.config;
  if (no_timing) cfg.timing = false;
  if (out_dir.empty()) out_dir = default_out_dir(cfg);
  fs::create_directories(out_dir);

  Problem prob = make_problem(cfg);
  ContinuationTrace trace;
  try {
    trace = run_schedule(prob, cfg.schedule, cfg.solver);
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }

  write_trace_csv(out_dir + "/trace.csv", trace, cfg.timing);
  write_resolved_config(out_dir + "/run.cfg", cfg);
  int failures = 0;
  if (!trace.entries.empty()) {
    const SolveState& last = trace.entries.back().state;
    write_state_csv(out_dir + "/state.csv", last, cfg.timing);
    write_field(out_dir + "/u.field", last.u, prob.mesh);
    write_multipliers(out_dir + "/multipliers.txt", last.mults);
    failures += run_checks(prob, cfg, last, CheckTols{});
  }
  const ConsistencyReport rep =
      sup_estimate_consistency(trace, prob.G, 10.0 * cfg.solver.outer_tol);
  for (const auto& v : rep.violations) {
    ++failures;
    std::printf("FAIL consistency %s\n", v.c_str());
  }
  if (rep.passed) std::printf("ok consistency\n");
  if (trace.aborted) {
    ++failures;
    std::printf("FAIL schedule %s\n", trace.abort_reason.c_str());
  }
  std::printf("sweep states=%zu F_inf_estimate=%.12g Lambda=%.6g M=%.6g\n", trace.entries.size(),
              trace.F_inf_estimate, trace.Lambda_tail, trace.M_tail);
  return failures == 0 ? 0 : 1;
}

int cmd_check(const std::string& state_dir, const CheckTols& tols) {
  ParseResult pr = parse_config(state_dir + "/run.cfg");
  if (!pr.ok()) {
    for (const auto& e : pr.errors) std::fprintf(stderr, "config error: %s\n", e.c_str());
    return 2;
  }
  const RunConfig& cfg = pr.config;
  Problem prob = make_problem(cfg);

  // reload the recorded row
  std::ifstream in(state_dir + "/state.csv");
  if (!in) {
    std::fprintf(stderr, "error: cannot open %s/state.csv\n", state_dir.c_str());
    return 2;
  }
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  SolveState st;
  double rec_F = 0, rec_G = 0, rec_psi = 0, rec_wall = 0;
  if (std::sscanf(row.c_str(), "%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%d,%lg", &st.p, &rec_F, &rec_G,
                  &st.mults.mu, &rec_psi, &st.kkt_res, &st.slack, &st.feasibility,
                  &st.outer_iters, &rec_wall) != 10) {
    std::fprintf(stderr, "error: malformed state.csv row\n");
    return 2;
  }
  st.u = read_field_for_mesh(state_dir + "/u.field", prob.mesh);
  st.mults = read_multipliers(state_dir + "/multipliers.txt", prob.constraint, prob.mesh);
  if (!st.mults.psi.all_finite() || !std::isfinite(st.mults.mu)) {
    std::fprintf(stderr, "error: non-finite multipliers in %s\n", state_dir.c_str());
    return 2;
  }
  st.converged = true;

  // recompute the energies from the dumped field
  st.F_p = eval_Lp(prob.f, st.u, prob.mesh, st.p).value;
  st.G_p = eval_Lp(prob.g, st.u, prob.mesh, st.p).value;
  st.F_inf = eval_Linf(prob.f, st.u, prob.mesh).value;
  st.G_inf = eval_Linf(prob.g, st.u, prob.mesh).value;
  const ConstraintValue q = eval_Q(prob.constraint, st.u, prob.mesh);
  st.q_norm = q.norm(prob.mesh);
  st.feasibility = std::max(st.q_norm, std::max(0.0, st.G_p - prob.G));
  st.slack = slackness(st, prob.G);

  int failures = 0;
  auto roundtrip = [&failures](const char* name, double recorded, double recomputed) {
    const double err = std::fabs(recorded - recomputed) / (1.0 + std::fabs(recomputed));
    const bool ok = err <= 1e-14;
    if (!ok) ++failures;
    std::printf("%s roundtrip_%s err=%.3g\n", ok ? "ok" : "FAIL", name, err);
  };
  roundtrip("F_p", rec_F, st.F_p);
  roundtrip("G_p", rec_G, st.G_p);

  failures += run_checks(prob, cfg, st, tols);
  return failures == 0 ? 0 : 1;
}

int cmd_oracle(const std::string& case_name, double V, double G, double p,
               const std::string& config_path) {
  if (case_name == "parabola_lp") {
    for (double pp : {1.0, 2.0, 4.0, 8.0}) {
      const auto r = oracle::parabola_lp(pp);
      std::printf("parabola_lp p=%g closed_form=%.12g quadrature=%.12g\n", pp, r.closed_form,
                  r.fine_quadrature);
    }
    return 0;
  }
  if (case_name == "iso_slope") {
    try {
      const double s = oracle::iso_slope(V, G);
      std::printf("iso_slope V=%g G=%g slope=%.12g area_residual=%.3g\n", V, G, s,
                  oracle::iso_slope_area_residual(V, G));
      const double s_lo = oracle::iso_slope(G / 2.0 - 1e-9, G);
      const double s_hi = oracle::iso_slope(G / 2.0 + 1e-9, G);
      std::printf("iso_slope switch_continuity=%.3g\n", std::fabs(s_hi - s_lo));
    } catch (const InfeasibleError& e) {
      std::printf("iso_slope infeasible: %s\n", e.what());
      return 3;
    }
    return 0;
  }
  if (case_name == "p2_exact") {
    std::printf("p2_exact V=%g F_2=%.12g\n", V, oracle::p2_value(V));
    return 0;
  }
  if (case_name == "brute") {
    ParseResult pr = parse_config(config_path);
    if (!pr.ok()) {
      for (const auto& e : pr.errors) std::fprintf(stderr, "config error: %s\n", e.c_str());
      return 2;
    }
    Problem prob = make_problem(pr.config);
    oracle::BruteForceConfig bcfg;
    const auto r = oracle::brute_force(prob, p, bcfg);
    if (!r.feasible_found) {
      std::printf("brute p=%g infeasible (no feasible grid point)\n", p);
      return 3;
    }
    std::printf("brute p=%g value=%.12g evaluated=%ld\n", p, r.value, r.evaluated);
    return 0;
  }
  std::fprintf(stderr, "error: unknown oracle case '%s'\n", case_name.c_str());
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lp-approximation toolkit for constrained sup-functional minimization"};
  app.require_subcommand(1);

  std::string config_path, warm_path, out_dir, state_dir, case_name = "parabola_lp";
  double p_override = -1.0, V = 0.2, G = 1.0, p_oracle = 2.0;
  bool no_timing = false;
  CheckTols tols;

  auto* solve = app.add_subcommand("solve", "solve the constrained problem at one exponent");
  solve->add_option("--config", config_path, "config file")->required();
  solve->add_option("--p", p_override, "exponent (default: schedule p0)");
  solve->add_option("--warm", warm_path, "warm-start field file");
  solve->add_option("--out", out_dir, "output directory");
  solve->add_flag("--no-timing", no_timing, "write 0 for wall_ms (byte-reproducible output)");

  auto* sweep = app.add_subcommand("sweep", "run the p-schedule with warm starts");
  sweep->add_option("--config", config_path, "config file")->required();
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_flag("--no-timing", no_timing, "write 0 for wall_ms (byte-reproducible output)");

  auto* check = app.add_subcommand("check", "recompute invariants from a dumped state");
  check->add_option("--state", state_dir, "state directory")->required();
  check->add_option("--kkt-tol", tols.kkt, "kkt residual threshold");
  check->add_option("--mass-tol", tols.mass, "measure mass slack");
  check->add_option("--slack-tol", tols.slack, "complementary slackness threshold");

  auto* orc = app.add_subcommand("oracle", "print certified oracle values");
  orc->add_option("--case", case_name, "parabola_lp|iso_slope|p2_exact|brute")->required();
  orc->add_option("--V", V, "isoperimetric volume");
  orc->add_option("--G", G, "sup bound");
  orc->add_option("--p", p_oracle, "exponent for brute");
  orc->add_option("--config", config_path, "config file for brute");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(config_path, p_override, warm_path, out_dir, no_timing);
    if (sweep->parsed()) return cmd_sweep(config_path, out_dir, no_timing);
    if (check->parsed()) return cmd_check(state_dir, tols);
    if (orc->parsed()) return cmd_oracle(case_name, V, G, p_oracle, config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}
