#pragma once

#include <span>
#include <string>
#include <vector>

#include "supinf/mesh.hpp"

namespace supinf {

struct LpValue {
  double p = 1.0;  // exponent, +inf for the sup functional
  double value = 0.0;
};

// Spatial coefficient a(x) for the weighted quadratic density.
enum class CoefKind { one, two_plus_sin };
double coef_value(CoefKind k, const double* x);
CoefKind coef_from_name(const std::string& name);

// Density f(x, eta, P). Either quadratic in P (isotropic coefficient or a
// constant symmetric tensor acting on vec(P)) or |P| itself. f never
// depends on eta; the quadratic-only diagnostics are gated on quadratic().
class DensityF {
 public:
  static DensityF dirichlet();                             // |P|^2
  static DensityF weighted_dirichlet(CoefKind coef);       // a(x)|P|^2
  static DensityF abs_grad();                              // |P|
  static DensityF constant_tensor(std::vector<double> sym, int K);

  bool quadratic() const { return kind_ != Kind::abs_grad; }
  const std::string& name() const { return name_; }
  CoefKind coef_kind() const { return coef_; }
  const std::vector<double>& tensor() const { return A_; }
  int tensor_size() const { return K_; }

  double value(const double* x, const double* P, int N, int dim) const;
  void dP(const double* x, const double* P, int N, int dim, double* out) const;

  // alpha_0: the smallest value of A(x):Q(x)Q over |Q|=1 and x. Dense
  // sampling for x-dependent coefficients, smallest eigenvalue for
  // constant tensors. Throws std::logic_error for the non-quadratic
  // density and std::runtime_error if the result is not positive.
  double min_ellipticity(const Mesh& mesh) const;

 private:
  enum class Kind { isotropic, tensor, abs_grad } kind_ = Kind::isotropic;
  std::string name_ = "dirichlet";
  CoefKind coef_ = CoefKind::one;
  std::vector<double> A_;  // K x K row-major, symmetric
  int K_ = 0;
};

// Gradient-free density g(x, eta) >= 0.
class DensityG {
 public:
  static DensityG abs();             // |eta|
  static DensityG quad();            // |eta|^2
  static DensityG constant(double c);

  const std::string& name() const { return name_; }
  double constant_value() const { return c_; }
  double value(const double* x, const double* eta, int N) const;
  void deta(const double* x, const double* eta, int N, double* out) const;

 private:
  enum class Kind { abs, quad, constant } kind_ = Kind::abs;
  std::string name_ = "abs";
  double c_ = 1.0;
};

// Density values at the quadrature points; throws if a value is negative.
void f_values_into(const DensityF& f, const Samples& s, const Mesh& mesh,
                   std::vector<double>& out);
void g_values_into(const DensityG& g, const Samples& s, const Mesh& mesh,
                   std::vector<double>& out);

// Normalized Lp norm ((1/|Omega|) sum_q w_q d_q^p)^{1/p}, evaluated in the
// overflow-safe d/d_max scaled form. Throws on p < 1 or a negative density.
LpValue eval_Lp(std::span<const double> density, const Mesh& mesh, double p);
// Maximum of the density over quadrature points.
LpValue eval_Linf(std::span<const double> density, const Mesh& mesh);

LpValue eval_Lp(const DensityF& f, const Field& u, const Mesh& mesh, double p);
LpValue eval_Lp(const DensityG& g, const Field& u, const Mesh& mesh, double p);
LpValue eval_Linf(const DensityF& f, const Field& u, const Mesh& mesh);
LpValue eval_Linf(const DensityG& g, const Field& u, const Mesh& mesh);

// Nodal gradient of (1/p) F_p(u)^p, interior rows only (boundary zero).
Field grad_scaled_objective(const DensityF& f, const Field& u, const Mesh& mesh, double p);
// Nodal gradient of (1/p) G_p(u)^p.
Field grad_scaled_constraint_g(const DensityG& g, const Field& u, const Mesh& mesh, double p);

// Gradients of the norms F_p, G_p themselves in the (density/norm)^{p-1}
// ratio form, which stays bounded for any p. Zero gradient when the norm
// vanishes. Used by the solver; `fvals`/`gvals` and the norm value must
// come from the same field.
void grad_Lp_norm_f_into(const DensityF& f, const Mesh& mesh, const Samples& s,
                         std::span<const double> fvals, double p, double norm_value, Field& out);
void grad_Lp_norm_g_into(const DensityG& g, const Mesh& mesh, const Samples& s,
                         std::span<const double> gvals, double p, double norm_value, Field& out);

}  // namespace supinf
