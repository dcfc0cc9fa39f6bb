#pragma once

#include <functional>
#include <span>
#include <vector>

#include "supinf/solver.hpp"

// Independent ground truth used to certify every derived target before the
// main implementation is trusted. The evaluators here use their own plain
// long-double summation and density formulas, none of the kernels or
// reductions of the main path.
namespace supinf::oracle {

// Normalized Lp / sup of a density sequence, direct summation.
double lp_norm(std::span<const double> density, double p);
double linf_norm(std::span<const double> density);

// F_p of u = x(1-x) with f = |u'|^2 on (0,1): closed form (2p+1)^{-1/p}
// against composite-Simpson quadrature of the integrand.
struct ParabolaLp {
  double closed_form = 0.0;
  double fine_quadrature = 0.0;
};
ParabolaLp parabola_lp(double p, int panels = 1 << 16);

// Optimal sup|u'| for the 1d benchmark: minimize sup|u'| over u(0)=u(1)=0
// with integral of u >= V and sup|u| <= G. Triangle slope 4V while the
// triangle height stays below G, else the trapezoid slope G^2/(G-V).
// Throws InfeasibleError when V >= G.
double iso_slope(double V, double G);
// Residual of the defining area equation at the returned slope (exact
// algebraic witness, zero up to rounding).
double iso_slope_area_residual(double V, double G);
// Nodal optimal profile on a 1d mesh over (0,1).
std::vector<double> iso_profile_nodal(double V, double G, const Mesh& mesh1d);

// Minimizer of the mean Dirichlet energy under integral of u = V:
// u = 6V x(1-x), F_2 = 2 sqrt(3) V.
double p2_value(double V);
std::vector<double> p2_profile_nodal(double V, const Mesh& mesh1d);

struct BruteForceConfig {
  int values_per_node = 21;
  double lo = -1.5, hi = 1.5;
  bool polish = true;
  double feas_tol = 1e-6;
  long max_points = 10'000'000;
};

struct BruteForceResult {
  double value = 0.0;
  std::vector<double> interior;  // best feasible interior dofs
  bool feasible_found = false;
  long evaluated = 0;
};

// Exhaustive search over the value grid with feasibility by rejection;
// linear equality isoperimetric constraints eliminate one node exactly.
// A deterministic compass-search polish closes the grid-resolution gap.
BruteForceResult brute_force(const Problem& prob, double p, const BruteForceConfig& cfg);

// Objective value the oracle assigns to a packed interior vector
// (independent evaluation path; used to cross-check the solver).
double objective_at(const Problem& prob, double p, std::span<const double> interior);
bool feasible_at(const Problem& prob, double p, std::span<const double> interior,
                 double feas_tol);

// Max relative error between an analytic gradient and central finite
// differences of the functional over interior dofs; the denominator is
// the sup norm of the analytic gradient (floored at 1e-12).
double fd_check(const std::function<double(const Field&)>& functional,
                const Field& analytic_grad, const Field& at, const Mesh& mesh, double step);

}  // namespace supinf::oracle
