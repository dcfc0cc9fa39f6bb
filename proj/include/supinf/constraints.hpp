#pragma once

#include <string>
#include <vector>

#include "supinf/mesh.hpp"

namespace supinf {

enum class ConstraintKind {
  none,
  holonomic,        // Pi(x, u) = 0 pointwise
  unilateral,       // Pi(x, u) <= 0 pointwise, relaxed by pi
  inclusion_ball,   // u(x) in closed ball of given radius
  inclusion_box,    // u(x) in a box, componentwise
  isoperimetric,    // integral of h(x, u, Du) <= H, relaxed by pi
  isoperimetric_eq  // integral of h = H, two pi-relaxed scalars
};

// Pointwise constraint functions Pi(x, eta) from the built-in catalogue.
enum class PiFn {
  comp0_minus_c,    // eta_0 - c
  c_minus_comp0,    // c - eta_0
  normsq_minus_c,   // |eta|^2 - c
  comp0_sq,         // eta_0^2        (holonomic, zero set is critical)
  comp_diff         // eta_0 - eta_1  (holonomic, N >= 2, flagged)
};
PiFn pi_fn_from_name(const std::string& name);
const char* pi_fn_name(PiFn fn);

// Isoperimetric integrands h(x, eta, P) from the catalogue.
enum class HFn {
  neg_component_0,  // -eta_0
  mass,             // eta_0
  energy            // |P|^2
};
HFn h_fn_from_name(const std::string& name);
const char* h_fn_name(HFn fn);

struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::none;
  PiFn pi = PiFn::comp0_minus_c;
  double c = 0.0;  // parameter of pi
  double radius = 1.0;
  std::vector<double> box_lo, box_hi;
  HFn h = HFn::neg_component_0;
  double H = 0.0;

  // Props 7-9(ii): dQ vanishes wherever Q does. Holds for the pi-composed
  // kinds by construction; holonomic entries only when the zero set
  // consists of critical points of Pi.
  bool degenerate_differential() const;
  int scalar_count() const;
};

// Residuals and dual elements share the payload layout: one value per
// quadrature point for the pointwise kinds, one or two reals for the
// scalar kinds.
struct ConstraintValue {
  ConstraintKind kind = ConstraintKind::none;
  std::vector<double> pointwise;
  std::vector<double> scalars;

  double norm(const Mesh& mesh) const;  // weighted L1 / sum of abs
  double sup_norm() const;              // dual-space (sup) norm
  bool all_finite() const;
};

// The C1 relaxation of Eq-style inequalities: 0 on t <= 0, t^2 on t > 0.
double pi_relax(double t);
double pi_relax_deriv(double t);

ConstraintValue eval_Q(const ConstraintSpec& spec, const Field& u, const Mesh& mesh);
ConstraintValue eval_Q(const ConstraintSpec& spec, const Mesh& mesh, const Samples& s);

// Gateaux derivative of eval_Q at u in the given direction.
ConstraintValue apply_dQ(const ConstraintSpec& spec, const Field& u, const Field& variation,
                         const Mesh& mesh);

// <psi, q>: weighted integral for pointwise kinds, plain product summed
// over entries for scalar kinds. Throws on kind/shape mismatch.
double pairing(const ConstraintValue& dual, const ConstraintValue& residual, const Mesh& mesh);

// Nodal gradient of u -> <omega, Q(u)> (interior rows only). This is the
// adjoint used by the multiplier and penalty terms of the augmented
// Lagrangian.
void dQ_adjoint_into(const ConstraintSpec& spec, const Mesh& mesh, const Samples& s,
                     const ConstraintValue& omega, Field& out);

ConstraintValue zero_value(const ConstraintSpec& spec, const Mesh& mesh);

}  // namespace supinf
