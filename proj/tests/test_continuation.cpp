#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "supinf/continuation.hpp"
#include "supinf/oracle.hpp"

using namespace supinf;
using namespace testutil;

namespace {

Problem iso_problem(int cells, double V, double G) {
  Problem prob;
  prob.mesh = interval(cells);
  prob.f = DensityF::abs_grad();
  prob.g = DensityG::abs();
  prob.G = G;
  prob.constraint.kind = ConstraintKind::isoperimetric;
  prob.constraint.h = HFn::neg_component_0;
  prob.constraint.H = -V;
  return prob;
}

}  // namespace

TEST_CASE("schedule values") {
  Schedule s;
  s.p0 = 4.0;
  s.gamma = 2.0;
  s.steps = 4;
  const auto v = s.values();
  REQUIRE(v.size() == 4);
  CHECK(v[0] == 4.0);
  CHECK(v[3] == 32.0);
  s.gamma = 1.0;
  CHECK_THROWS_AS(s.values(), std::invalid_argument);
}

TEST_CASE("unconstrained schedule stays flat at zero") {
  Problem prob;
  prob.mesh = interval(16);
  prob.f = DensityF::dirichlet();
  prob.g = DensityG::abs();
  prob.G = 1e9;
  Schedule sched;
  sched.p0 = 3.0;
  sched.steps = 4;
  SolveConfig cfg;
  ContinuationTrace tr = run_schedule(prob, sched, cfg);
  REQUIRE(tr.entries.size() == 4);
  CHECK(!tr.aborted);
  for (const auto& e : tr.entries) {
    CHECK(e.state.F_p == 0.0);
    CHECK(e.sigma_mass == 0.0);  // zero measure at zero energy
    for (double v : e.pairings) CHECK(v == 0.0);
  }
  CHECK(tr.F_inf_estimate == 0.0);
  CHECK(sup_estimate_consistency(tr, prob.G, 1e-7).passed);
}

TEST_CASE("triangle benchmark: slack cap and F_p -> 4V") {
  const double V = 0.2;
  Problem prob = iso_problem(96, V, 1e9);
  Schedule sched;
  sched.p0 = 4.0;
  sched.steps = 5;  // up to p = 64
  SolveConfig cfg;
  ContinuationTrace tr = run_schedule(prob, sched, cfg);
  REQUIRE(!tr.aborted);
  REQUIRE(tr.entries.size() == 5);

  const double slope = oracle::iso_slope(V, 1e9);
  CHECK(slope == doctest::Approx(0.8));
  CHECK(tr.entries.back().state.F_p == doctest::Approx(slope).epsilon(0.05));

  // cap slack along the whole schedule: M_p stays 0
  for (const auto& e : tr.entries) {
    CHECK(e.resc.M <= 1e-6);
    CHECK(e.state.mults.mu <= 1e-12);
    CHECK(e.resc.Lambda >= 0.0);
    CHECK(e.resc.Lambda <= 1.0);
    CHECK(e.sigma_mass <= 1.0 + 1e-12);
    CHECK(e.tau_mass <= 1.0 + 1e-12);
  }

  const ConsistencyReport rep = sup_estimate_consistency(tr, prob.G, 1e-7);
  CHECK(rep.passed);
}

TEST_CASE("measure pairing trace: masses and plateau bump decay") {
  const double V = 0.6;  // trapezoid regime with plateau under the bump
  Problem prob = iso_problem(96, V, 1.0);
  Schedule sched;
  sched.p0 = 4.0;
  sched.steps = 5;
  SolveConfig cfg;
  ContinuationTrace tr = run_schedule(prob, sched, cfg);
  REQUIRE(!tr.aborted);

  const PairingTable pt = measure_pairing_trace(tr);
  REQUIRE(pt.values.size() == 4);
  REQUIRE(pt.tail_gap.size() == 4);
  for (double g : pt.tail_gap) CHECK(g >= 0.0);
  // pairing with 1 is the mass sequence, each entry <= 1
  for (double mass : pt.values[0]) CHECK(mass <= 1.0 + 1e-12);
  // sigma concentrates on the slopes: the center bump pairing decays
  const auto& bump = pt.values[3];
  CHECK(bump.back() <= bump.front());
  CHECK(bump.back() <= 0.05);

  ContinuationTrace tiny;
  CHECK_THROWS_AS(measure_pairing_trace(tiny), std::invalid_argument);
}

TEST_CASE("sup_estimate_consistency flags corrupted traces") {
  const std::vector<double> good_F{0.5, 0.6, 0.62, 0.622};
  const std::vector<double> G_vals{0.3, 0.3, 0.3, 0.3};
  CHECK(sup_estimate_consistency(good_F, 0.63, G_vals, 1.0, 1e-6).passed);

  // shuffled F values are no longer a minimality chain
  const std::vector<double> bad_F{0.62, 0.5, 0.622, 0.6};
  const ConsistencyReport bad = sup_estimate_consistency(bad_F, 0.63, G_vals, 1.0, 1e-6);
  CHECK(!bad.passed);
  CHECK(!bad.violations.empty());

  // G above the bound
  const std::vector<double> bad_G{0.3, 1.5, 0.3, 0.3};
  CHECK(!sup_estimate_consistency(good_F, 0.63, bad_G, 1.0, 1e-6).passed);

  // final F above the sup estimate
  CHECK(!sup_estimate_consistency(good_F, 0.5, G_vals, 1.0, 1e-6).passed);
}

TEST_CASE("2d schedule: volume demand over the unit square") {
  Problem prob;
  const double ext2[4] = {0.0, 1.0, 0.0, 1.0};
  const int cells2[2] = {12, 12};
  prob.mesh = build_mesh(2, ext2, cells2);
  prob.f = DensityF::abs_grad();
  prob.g = DensityG::abs();
  prob.G = 1e9;
  prob.constraint.kind = ConstraintKind::isoperimetric;
  prob.constraint.h = HFn::neg_component_0;
  prob.constraint.H = -0.05;
  Schedule sched;
  sched.p0 = 3.0;
  sched.gamma = 2.0;
  sched.steps = 3;
  SolveConfig cfg;
  ContinuationTrace tr = run_schedule(prob, sched, cfg);
  REQUIRE(!tr.aborted);
  REQUIRE(tr.entries.size() == 3);
  for (std::size_t j = 0; j < tr.entries.size(); ++j) {
    const auto& e = tr.entries[j];
    CHECK(e.state.converged);
    CHECK(e.sigma_mass <= 1.0 + 1e-12);
    CHECK(e.state.kkt_res <= 10.0 * cfg.inner_tol);
    if (j > 0)
      CHECK(e.state.F_p >= tr.entries[j - 1].state.F_p - 1e-8 * (1.0 + e.state.F_p));
  }
  CHECK(sup_estimate_consistency(tr, prob.G, 1e-7).passed);
}

TEST_CASE("schedule propagates infeasibility at p0") {
  Problem prob = iso_problem(16, 2.0, 1.0);
  Schedule sched;
  SolveConfig cfg;
  CHECK_THROWS_AS(run_schedule(prob, sched, cfg), InfeasibleError);
}

TEST_CASE("tail sandwich along a warm-started schedule") {
  Problem prob = iso_problem(64, 0.3, 1.0);
  Schedule sched;
  sched.p0 = 3.0;
  sched.steps = 5;
  SolveConfig cfg;
  ContinuationTrace tr = run_schedule(prob, sched, cfg);
  REQUIRE(!tr.aborted);
  for (std::size_t j = 0; j + 1 < tr.entries.size(); ++j) {
    const double a = tr.entries[j].state.F_p;
    const double b = tr.entries[j + 1].state.F_p;
    CHECK(b >= a - 1e-8 * (1.0 + std::fabs(a)));
  }
  // feasibility persistence
  for (const auto& e : tr.entries) CHECK(e.state.G_p <= prob.G + cfg.outer_tol * 10.0);
  CHECK(tr.tail_oscillation >= 0.0);
}
