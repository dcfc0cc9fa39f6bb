#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "supinf/kkt.hpp"
#include "supinf/oracle.hpp"

using namespace supinf;
using namespace testutil;

namespace {

Problem iso_problem(int cells, double V, double G, bool equality) {
  Problem prob;
  prob.mesh = interval(cells);
  prob.f = DensityF::abs_grad();
  prob.g = DensityG::abs();
  prob.G = G;
  prob.constraint.kind =
      equality ? ConstraintKind::isoperimetric_eq : ConstraintKind::isoperimetric;
  prob.constraint.h = HFn::neg_component_0;
  prob.constraint.H = -V;
  return prob;
}

}  // namespace

TEST_CASE("build_measure: zero energy, uniform hat, endpoint concentration") {
  Mesh m = interval(32);
  const DensityF f = DensityF::dirichlet();

  // F_p = 0 gives the zero measure
  std::vector<double> zeros(m.quad_count(), 0.0);
  DiscreteMeasure z = build_measure(zeros, 0.0, 4.0, m);
  CHECK(z.mass == 0.0);

  // hat: density == norm, uniform weights, mass exactly 1
  Field hat_u = nodal_1d(m, hat);
  const Samples s = sample(hat_u, m);
  std::vector<double> fvals;
  f_values_into(f, s, m, fvals);
  const double Fp = eval_Lp(fvals, m, 6.0).value;
  DiscreteMeasure sigma = build_measure(fvals, Fp, 6.0, m);
  CHECK(sigma.mass == doctest::Approx(1.0).epsilon(1e-13));
  for (double w : sigma.weights)
    CHECK(w == doctest::Approx(1.0 / m.quad_count()).epsilon(1e-12));

  // parabola, p = 8: mass <= 1 and weight concentrates near the endpoints
  Field u = nodal_1d(m, parabola);
  const Samples sp = sample(u, m);
  f_values_into(f, sp, m, fvals);
  const double F8 = eval_Lp(fvals, m, 8.0).value;
  DiscreteMeasure s8 = build_measure(fvals, F8, 8.0, m);
  CHECK(s8.mass <= 1.0 + 1e-12);
  CHECK(s8.weights.front() > s8.weights[m.quad_count() / 2] * 50.0);
  CHECK(s8.weights.back() > s8.weights[m.quad_count() / 2] * 50.0);
}

TEST_CASE("rescale: normalization and the spec examples") {
  ConstraintSpec none;
  Mesh m = interval(4);

  // mu = 0, psi = 0, lambda = 1: Lambda = 1
  RawMultipliers r0;
  r0.psi = zero_value(none, m);
  RescaledMultipliers a = rescale(r0, 2.0, 0.0, 3.0);
  CHECK(a.Lambda == 1.0);
  CHECK(a.M == 0.0);
  // power scaling: lambda_hat = F_p^{p-1} = 4
  CHECK(a.R == doctest::Approx(4.0).epsilon(1e-12));

  // equal thirds
  ConstraintSpec iso;
  iso.kind = ConstraintKind::isoperimetric;
  RawMultipliers r1;
  r1.lambda = 1.0;
  r1.mu = 1.0;
  r1.psi = zero_value(iso, m);
  r1.psi.scalars[0] = 1.0;
  RescaledMultipliers b = rescale(r1, 1.5, 1.2, 5.0);
  CHECK(b.Lambda == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(b.M == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(b.psi_sup == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(std::fabs(b.Lambda + b.M + b.psi_sup - 1.0) <= 1e-14);

  // all-zero triple violates the non-vanishing condition
  RawMultipliers bad;
  bad.lambda = 0.0;
  bad.psi = zero_value(none, m);
  CHECK_THROWS_AS(rescale(bad, 1.0, 1.0, 2.0), std::runtime_error);
}

TEST_CASE("rescale stays finite in log form at extreme p") {
  ConstraintSpec none;
  Mesh m = interval(4);
  RawMultipliers r;
  r.mu = 0.3;
  r.psi = zero_value(none, m);
  RescaledMultipliers a = rescale(r, 4.0, 1.0, 1024.0);
  CHECK(std::isfinite(a.log_R));
  CHECK(a.log_R == doctest::Approx(1023.0 * std::log(4.0) + std::log(1.3)));
  CHECK(a.Lambda + a.M + a.psi_sup == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("quadratic identity holds to rounding for random data") {
  Mesh m = interval(16);
  std::mt19937 rng(71);
  std::uniform_real_distribution<double> dist(0.0, 1.0);

  for (int trial = 0; trial < 50; ++trial) {
    Field u = random_field(m, 2, 1.0, rng);
    Field v = random_field(m, 2, 1.0, rng);
    DiscreteMeasure sigma;
    sigma.weights.resize(m.quad_count());
    for (auto& w : sigma.weights) w = dist(rng) / m.quad_count();

    const DensityF fid = DensityF::dirichlet();
    CHECK(quadratic_identity_gap(u, v, sigma, fid, m) <= 1e-12);

    const DensityF aniso = DensityF::constant_tensor({3.0, 1.0, 1.0, 2.0}, 2);
    CHECK(quadratic_identity_gap(u, v, sigma, aniso, m) <= 1e-12);

    CHECK(quadratic_identity_gap(u, u, sigma, fid, m) == 0.0);
  }
  Field u = random_field(m, 1, 1.0, rng);
  DiscreteMeasure sigma;
  sigma.weights.assign(m.quad_count(), 1.0 / m.quad_count());
  CHECK_THROWS_AS(quadratic_identity_gap(u, u, sigma, DensityF::abs_grad(), m),
                  std::logic_error);
}

TEST_CASE("step-5 ellipticity inequality under the measure") {
  Mesh m = interval(16);
  const DensityF f = DensityF::constant_tensor({3.0, 1.0, 1.0, 2.0}, 2);
  const double a0 = f.min_ellipticity(m);
  std::mt19937 rng(73);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Field u = random_field(m, 2, 1.0, rng);
    Field v = random_field(m, 2, 1.0, rng);
    const Samples su = sample(u, m), sv = sample(v, m);
    DiscreteMeasure sigma;
    sigma.weights.resize(m.quad_count());
    for (auto& w : sigma.weights) w = dist(rng) / m.quad_count();
    double lhs = 0.0, rhs = 0.0;
    for (int q = 0; q < m.quad_count(); ++q) {
      double diff[2], norm2 = 0.0;
      for (int k = 0; k < 2; ++k) {
        diff[k] = su.du[q * 2 + k] - sv.du[q * 2 + k];
        norm2 += diff[k] * diff[k];
      }
      const auto x = m.quad_point(q);
      lhs += sigma.weights[q] * f.value(x.data(), diff, 2, 1);
      rhs += sigma.weights[q] * norm2;
    }
    CHECK(lhs >= a0 * rhs - 1e-12);
  }
}

TEST_CASE("energy-measure identity on a converged solve") {
  Problem prob = iso_problem(48, 0.25, 1e9, false);
  SolveConfig cfg;
  SolveState st = solve_p(prob, 4.0, cfg);
  REQUIRE(st.converged);
  auto [sigma, tau] = build_measures(st, prob);
  CHECK(sigma.mass <= 1.0 + 1e-12);
  CHECK(tau.mass <= 1.0 + 1e-12);
  const auto [lhs, rhs] = energy_measure_identity(st, prob, sigma);
  CHECK(std::fabs(lhs - rhs) <= 1e-10 * (1.0 + rhs));

  // hat-profile style state: uniform measure gives the identity exactly
  Problem up = iso_problem(32, 0.0, 1e9, false);
  SolveState zero_state;
  zero_state.p = 4.0;
  zero_state.u = zero_field(up.mesh, 1);
  zero_state.F_p = 0.0;
  zero_state.G_p = 0.0;
  auto [s0, t0] = build_measures(zero_state, up);
  const auto [l0, r0] = energy_measure_identity(zero_state, up, s0);
  CHECK(l0 == 0.0);
  CHECK(r0 == 0.0);
}

TEST_CASE("energy-measure identity on constructed fields") {
  // hat profile: density == norm, so both sides equal the norm exactly
  Problem prob;
  prob.mesh = interval(32);
  prob.f = DensityF::dirichlet();
  SolveState hat_state;
  hat_state.p = 6.0;
  hat_state.u = nodal_1d(prob.mesh, hat);
  hat_state.F_p = eval_Lp(prob.f, hat_state.u, prob.mesh, 6.0).value;
  auto [sh, th] = build_measures(hat_state, prob);
  auto [lh, rh] = energy_measure_identity(hat_state, prob, sh);
  CHECK(lh == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rh == doctest::Approx(1.0).epsilon(1e-12));

  // parabola at p = 4: the identity is algebraic, 1e-10 relative
  SolveState par;
  par.p = 4.0;
  par.u = nodal_1d(prob.mesh, parabola);
  par.F_p = eval_Lp(prob.f, par.u, prob.mesh, 4.0).value;
  auto [sp, tp] = build_measures(par, prob);
  auto [lp, rp] = energy_measure_identity(par, prob, sp);
  CHECK(std::fabs(lp - rp) <= 1e-10 * (1.0 + rp));
}

TEST_CASE("analytic profile with the exact degenerate triple satisfies the system") {
  // at the exactly feasible minimizer the pi-relaxed constraint has a
  // vanishing differential, so the exact multiplier triple is the
  // degenerate one (lambda = mu = 0, psi free) and every term vanishes
  const double V = 1.0 / 12.0;
  Problem prob = iso_problem(128, V, 1e9, true);
  SolveState st;
  st.p = 2.0;
  st.u = zero_field(prob.mesh, 1);
  const auto prof = oracle::p2_profile_nodal(V, prob.mesh);
  for (int i = 0; i < prob.mesh.node_count(); ++i) st.u.at(i, 0) = prof[i];
  st.F_p = eval_Lp(prob.f, st.u, prob.mesh, st.p).value;
  st.G_p = eval_Lp(prob.g, st.u, prob.mesh, st.p).value;
  st.mults.lambda = 0.0;
  st.mults.mu = 0.0;
  st.mults.psi = zero_value(prob.constraint, prob.mesh);
  st.mults.psi.scalars[0] = 1.0;

  const double h = prob.mesh.h[0];
  CHECK(kkt_residual_p(st, prob, 64, 0) <= h * h);
}

TEST_CASE("kkt residual is small at convergence and large off it") {
  const double V = 1.0 / 12.0;
  Problem prob = iso_problem(64, V, 1e9, true);
  prob.f = DensityF::dirichlet();  // quadratic objective, same minimizer family
  SolveConfig cfg;
  cfg.outer_tol = 1e-10;
  SolveState st = solve_p(prob, 2.0, cfg);
  REQUIRE(st.converged);
  st.kkt_res = kkt_residual_p(st, prob, 64, 0);
  CHECK(st.kkt_res <= 10.0 * cfg.inner_tol);

  // negative control: a random field is nowhere near stationary
  std::mt19937 rng(79);
  SolveState fake = st;
  fake.u = random_field(prob.mesh, 1, 0.5, rng);
  fake.F_p = eval_Lp(prob.f, fake.u, prob.mesh, fake.p).value;
  fake.G_p = eval_Lp(prob.g, fake.u, prob.mesh, fake.p).value;
  const double bad = kkt_residual_p(fake, prob, 64, 0);
  CHECK(bad >= 100.0 * st.kkt_res);
}

TEST_CASE("slackness behaviour") {
  // inactive constraint with mu = 0
  SolveState st;
  st.G_p = 0.4;
  st.mults.mu = 0.0;
  CHECK(slackness(st, 0.5) == 0.0);

  // active constraint: zero gap regardless of mu
  st.G_p = 0.5;
  st.mults.mu = 3.7;
  CHECK(slackness(st, 0.5) == 0.0);

  // product form
  st.mults.mu = 0.5;
  st.G_p = 0.5 + 1e-9;
  CHECK(slackness(st, 0.5) == doctest::Approx(5e-10));

  CHECK(slackness_limit(0.25, 0.9, 1.0) == doctest::Approx(0.025));
}

TEST_CASE("slackness vanishes on a converged capped solve") {
  // the Lp cap only binds once p is large enough that the normalized
  // Lp norm of the triangle profile exceeds G
  Problem prob = iso_problem(48, 0.6, 1.0, false);
  SolveConfig cfg;
  SolveState st = solve_p(prob, 64.0, cfg);
  REQUIRE(st.converged);
  CHECK(st.mults.mu > 0.0);  // trapezoid regime: the cap binds
  CHECK(slackness(st, prob.G) <= 1e-8 * (1.0 + prob.G));
}
