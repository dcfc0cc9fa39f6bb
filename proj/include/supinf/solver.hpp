#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "supinf/constraints.hpp"
#include "supinf/functionals.hpp"
#include "supinf/mesh.hpp"

namespace supinf {

struct Problem {
  Mesh mesh;
  int components = 1;
  DensityF f = DensityF::dirichlet();
  DensityG g = DensityG::abs();
  double G = 1e9;
  ConstraintSpec constraint;
};

struct SolveConfig {
  double inner_tol = 1e-8;
  double outer_tol = 1e-9;
  int max_outer = 40;
  double penalty_init = 10.0;
  double penalty_growth = 10.0;
  double multiplier_init = 0.0;
  unsigned seed = 0;
  int inner_max_iter = 5000;
  double slack_tol = 1e-9;  // scaled by (1+G)
};

// Multipliers in the Lp-norm normalization: lambda (== 1 in the normal
// case) multiplies grad F_p, mu multiplies grad G_p, and psi pairs with
// dQ on the right-hand side as in the first-order system. These are O(1)
// at any p; the kkt module converts them to the power-scaled quantities.
struct RawMultipliers {
  double lambda = 1.0;
  double mu = 0.0;
  ConstraintValue psi;

  bool not_all_zero() const { return lambda != 0.0 || mu != 0.0 || psi.sup_norm() != 0.0; }
};

struct SolveState {
  double p = 2.0;
  Field u;
  double F_p = 0.0, G_p = 0.0, F_inf = 0.0, G_inf = 0.0;
  RawMultipliers mults;
  double q_norm = 0.0;       // ||Q(u)||, weighted L1
  double feasibility = 0.0;  // max(q_norm, (G_p - G)_+)
  double slack = 0.0;        // |mu (G_p - G)|
  double kkt_res = -1.0;     // filled by the kkt module
  int outer_iters = 0;
  long inner_iters = 0;
  double wall_ms = 0.0;
  bool converged = false;
  bool minimality_ok = true;     // F_p(u_p) <= F_p(u_ref) + tol
  double descent_violation = 0.0;
  std::string flags;
  Field u_ref;  // feasible reference from the compatibility phase
};

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The verbatim scaled augmented Lagrangian of the power-form problem:
//   (1/p) F_p(u)^p
//   + (1/(2 rho)) (max(0, mu + rho c)^2 - mu^2),  c = (1/p) G_p^p - G^p/p
//   + <psi, Q(u)> + (rho/2) ||Q(u)||^2
// with the quadrature-weighted L2 norm in the penalty. With rho = 0 the
// inequality term degenerates to mu*c. The multipliers are taken at face
// value (power normalization); this is the formula surface used by tests.
double scaled_lagrangian(const Field& u, double p, const Problem& prob,
                         const RawMultipliers& mults, double penalty);

struct InnerResult {
  std::vector<double> x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iters = 0;
  bool converged = false;
};

// fg(x, grad_out) -> value. Returns x with ||grad|| <= tol*max(1, |value|),
// L-BFGS with Armijo backtracking; deterministic.
using Objective = std::function<double(std::span<const double>, std::span<double>)>;
InnerResult inner_minimize(const Objective& fg, std::vector<double> x0, double tol, int max_iter);

struct WarmStart {
  const Field* u = nullptr;
  const RawMultipliers* mults = nullptr;
};

// Augmented-Lagrangian solve of the finite-p constrained problem. Throws
// InfeasibleError when the compatibility check fails; non-convergence
// within max_outer returns the best state with converged = false.
SolveState solve_p(const Problem& prob, double p, const SolveConfig& cfg,
                   const WarmStart& warm = {});

}  // namespace supinf
