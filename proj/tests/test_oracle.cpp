#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "supinf/functionals.hpp"
#include "supinf/oracle.hpp"

using namespace supinf;
using namespace testutil;

TEST_CASE("independent lp_norm agrees with the main evaluator") {
  Mesh m = interval(64);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(0.0, 5.0);
  std::vector<double> dens(m.quad_count());
  for (auto& d : dens) d = dist(rng);
  for (double p : {1.0, 2.0, 7.5, 32.0}) {
    const double a = oracle::lp_norm(dens, p);
    const double b = eval_Lp(dens, m, p).value;
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
  CHECK(oracle::linf_norm(dens) == eval_Linf(dens, m).value);
}

TEST_CASE("parabola_lp: closed form vs quadrature") {
  for (double p : {1.0, 2.0, 4.0, 8.0}) {
    const auto r = oracle::parabola_lp(p);
    CHECK(r.closed_form == doctest::Approx(r.fine_quadrature).epsilon(1e-10));
  }
  CHECK(oracle::parabola_lp(1.0).closed_form == doctest::Approx(1.0 / 3.0));
  CHECK(oracle::parabola_lp(2.0).closed_form == doctest::Approx(1.0 / std::sqrt(5.0)));
}

TEST_CASE("iso_slope: branches, continuity, infeasibility") {
  CHECK(oracle::iso_slope(0.0, 1.0) == 0.0);
  CHECK(oracle::iso_slope(0.2, 1e9) == doctest::Approx(0.8));
  CHECK(oracle::iso_slope(0.75, 1.0) == doctest::Approx(4.0));
  CHECK(oracle::iso_slope_area_residual(0.75, 1.0) <= 1e-14);
  CHECK(oracle::iso_slope_area_residual(0.2, 1e9) <= 1e-14);

  // continuity across the triangle/trapezoid switch at V = G/2
  const double G = 1.3;
  const double below = oracle::iso_slope(G / 2.0 - 1e-10, G);
  const double above = oracle::iso_slope(G / 2.0 + 1e-10, G);
  CHECK(below == doctest::Approx(2.0 * G).epsilon(1e-8));
  CHECK(above == doctest::Approx(2.0 * G).epsilon(1e-8));

  CHECK_THROWS_AS(oracle::iso_slope(1.0, 1.0), InfeasibleError);
  CHECK_THROWS_AS(oracle::iso_slope(2.0, 1.0), InfeasibleError);
}

TEST_CASE("p2 profile and value") {
  CHECK(oracle::p2_value(0.0) == 0.0);
  CHECK(oracle::p2_value(1.0 / 12.0) == doctest::Approx(1.0 / std::sqrt(12.0)));
  // sign symmetry
  CHECK(oracle::p2_value(-1.0 / 12.0) == oracle::p2_value(1.0 / 12.0));

  Mesh m = interval(8);
  const auto prof = oracle::p2_profile_nodal(1.0 / 12.0, m);
  CHECK(prof[0] == 0.0);
  CHECK(prof[8] == 0.0);
  CHECK(prof[4] == doctest::Approx(0.125));  // x(1-x)/2 at x = 1/2
}

TEST_CASE("brute force: unconstrained minimum is the zero field") {
  Problem prob;
  prob.mesh = interval(5);
  prob.f = DensityF::dirichlet();
  prob.g = DensityG::abs();
  prob.G = 1e9;
  oracle::BruteForceConfig cfg;
  cfg.values_per_node = 11;
  cfg.lo = -1.0;
  cfg.hi = 1.0;
  cfg.polish = false;
  const auto r = oracle::brute_force(prob, 2.0, cfg);
  REQUIRE(r.feasible_found);
  CHECK(r.value == 0.0);
  for (double v : r.interior) CHECK(v == 0.0);
}

TEST_CASE("brute force honors the point budget") {
  Problem prob;
  prob.mesh = interval(20);
  oracle::BruteForceConfig cfg;
  cfg.values_per_node = 21;
  CHECK_THROWS_AS(oracle::brute_force(prob, 2.0, cfg), std::invalid_argument);
}

TEST_CASE("brute force with equality elimination hits the p2 benchmark") {
  const double V = 1.0 / 12.0;
  Problem prob;
  prob.mesh = interval(6);
  prob.f = DensityF::abs_grad();
  prob.g = DensityG::abs();
  prob.G = 1e9;
  prob.constraint.kind = ConstraintKind::isoperimetric_eq;
  prob.constraint.h = HFn::neg_component_0;
  prob.constraint.H = -V;
  oracle::BruteForceConfig cfg;
  cfg.values_per_node = 9;
  cfg.lo = 0.0;
  cfg.hi = 0.3;
  const auto r = oracle::brute_force(prob, 2.0, cfg);
  REQUIRE(r.feasible_found);
  // 6-cell discretization of the continuous optimum 2 sqrt(3) V
  CHECK(r.value == doctest::Approx(oracle::p2_value(V)).epsilon(0.05));
}

TEST_CASE("infeasible rejection set reports no feasible point") {
  Problem prob;
  prob.mesh = interval(5);
  prob.f = DensityF::dirichlet();
  prob.g = DensityG::abs();
  prob.G = 0.1;  // cap
  prob.constraint.kind = ConstraintKind::isoperimetric;
  prob.constraint.h = HFn::neg_component_0;
  prob.constraint.H = -0.9;  // volume >= 0.9 conflicts with sup <= 0.1
  oracle::BruteForceConfig cfg;
  cfg.values_per_node = 7;
  cfg.lo = -0.5;
  cfg.hi = 0.5;
  const auto r = oracle::brute_force(prob, 2.0, cfg);
  CHECK(!r.feasible_found);
}

TEST_CASE("fd_check is exact for linear functionals") {
  Mesh m = interval(10);
  std::mt19937 rng(7);
  Field w = random_field(m, 1, 1.0, rng);
  auto J = [&](const Field& u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) acc += 3.0 * u.values[i] * w.values[i];
    return acc;
  };
  Field grad = zero_field(m, 1);
  for (std::size_t i = 0; i < grad.values.size(); ++i) grad.values[i] = 3.0 * w.values[i];
  zero_boundary(grad, m);
  CHECK(oracle::fd_check(J, grad, zero_field(m, 1), m, 1e-5) <= 1e-9);
  CHECK_THROWS_AS(oracle::fd_check(J, grad, zero_field(m, 1), m, 0.0), std::invalid_argument);
}
