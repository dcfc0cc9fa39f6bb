#include "supinf/constraints.hpp"

#include <cmath>
#include <stdexcept>

namespace supinf {

namespace {
constexpr int kMaxComp = 4;

double pi_fn_value(PiFn fn, double c, const double* eta, int N) {
  switch (fn) {
    case PiFn::comp0_minus_c: return eta[0] - c;
    case PiFn::c_minus_comp0: return c - eta[0];
    case PiFn::normsq_minus_c: {
      double s = 0.0;
      for (int i = 0; i < N; ++i) s += eta[i] * eta[i];
      return s - c;
    }
    case PiFn::comp0_sq: return eta[0] * eta[0];
    case PiFn::comp_diff:
      if (N < 2) throw std::invalid_argument("comp_diff needs N >= 2");
      return eta[0] - eta[1];
  }
  return 0.0;
}

void pi_fn_deta(PiFn fn, double /*c*/, const double* eta, int N, double* out) {
  for (int i = 0; i < N; ++i) out[i] = 0.0;
  switch (fn) {
    case PiFn::comp0_minus_c: out[0] = 1.0; return;
    case PiFn::c_minus_comp0: out[0] = -1.0; return;
    case PiFn::normsq_minus_c:
      for (int i = 0; i < N; ++i) out[i] = 2.0 * eta[i];
      return;
    case PiFn::comp0_sq: out[0] = 2.0 * eta[0]; return;
    case PiFn::comp_diff:
      out[0] = 1.0;
      out[1] = -1.0;
      return;
  }
}

double h_fn_value(HFn fn, const double* eta, const double* P, int N, int dim) {
  switch (fn) {
    case HFn::neg_component_0: return -eta[0];
    case HFn::mass: return eta[0];
    case HFn::energy: {
      double s = 0.0;
      for (int k = 0; k < N * dim; ++k) s += P[k] * P[k];
      return s;
    }
  }
  return 0.0;
}

void h_fn_deta(HFn fn, const double* /*eta*/, int N, double* out) {
  for (int i = 0; i < N; ++i) out[i] = 0.0;
  if (fn == HFn::neg_component_0) out[0] = -1.0;
  if (fn == HFn::mass) out[0] = 1.0;
}

void h_fn_dP(HFn fn, const double* P, int N, int dim, double* out) {
  for (int k = 0; k < N * dim; ++k) out[k] = fn == HFn::energy ? 2.0 * P[k] : 0.0;
}

// integral of h over the domain (plain, not averaged)
double h_integral(const ConstraintSpec& spec, const Mesh& mesh, const Samples& s) {
  const int N = s.components, dim = s.dim;
  const double w = mesh.cell_volume();
  double acc = 0.0;
  for (int q = 0; q < s.n_q; ++q)
    acc += w * h_fn_value(spec.h, &s.u[static_cast<std::size_t>(q) * N],
                          &s.du[static_cast<std::size_t>(q) * N * dim], N, dim);
  return acc;
}

double h_directional(const ConstraintSpec& spec, const Mesh& mesh, const Samples& su,
                     const Samples& sv) {
  const int N = su.components, dim = su.dim;
  const double w = mesh.cell_volume();
  double he[kMaxComp], hP[kMaxComp * 2];
  double acc = 0.0;
  for (int q = 0; q < su.n_q; ++q) {
    const double* uq = &su.u[static_cast<std::size_t>(q) * N];
    const double* duq = &su.du[static_cast<std::size_t>(q) * N * dim];
    const double* vq = &sv.u[static_cast<std::size_t>(q) * N];
    const double* dvq = &sv.du[static_cast<std::size_t>(q) * N * dim];
    h_fn_deta(spec.h, uq, N, he);
    h_fn_dP(spec.h, duq, N, dim, hP);
    double t = 0.0;
    for (int c = 0; c < N; ++c) t += he[c] * vq[c];
    for (int k = 0; k < N * dim; ++k) t += hP[k] * dvq[k];
    acc += w * t;
  }
  return acc;
}

}  // namespace

PiFn pi_fn_from_name(const std::string& name) {
  if (name == "comp0_minus_c") return PiFn::comp0_minus_c;
  if (name == "c_minus_comp0") return PiFn::c_minus_comp0;
  if (name == "normsq_minus_c") return PiFn::normsq_minus_c;
  if (name == "comp0_sq") return PiFn::comp0_sq;
  if (name == "comp_diff") return PiFn::comp_diff;
  throw std::invalid_argument("unknown pointwise constraint function '" + name + "'");
}

const char* pi_fn_name(PiFn fn) {
  switch (fn) {
    case PiFn::comp0_minus_c: return "comp0_minus_c";
    case PiFn::c_minus_comp0: return "c_minus_comp0";
    case PiFn::normsq_minus_c: return "normsq_minus_c";
    case PiFn::comp0_sq: return "comp0_sq";
    case PiFn::comp_diff: return "comp_diff";
  }
  return "?";
}

HFn h_fn_from_name(const std::string& name) {
  if (name == "neg_component_0") return HFn::neg_component_0;
  if (name == "mass") return HFn::mass;
  if (name == "energy") return HFn::energy;
  throw std::invalid_argument("unknown isoperimetric integrand '" + name + "'");
}

const char* h_fn_name(HFn fn) {
  switch (fn) {
    case HFn::neg_component_0: return "neg_component_0";
    case HFn::mass: return "mass";
    case HFn::energy: return "energy";
  }
  return "?";
}

bool ConstraintSpec::degenerate_differential() const {
  switch (kind) {
    case ConstraintKind::none: return true;
    case ConstraintKind::holonomic: return pi == PiFn::comp0_sq;
    default: return true;  // pi-composed kinds
  }
}

int ConstraintSpec::scalar_count() const {
  if (kind == ConstraintKind::isoperimetric) return 1;
  if (kind == ConstraintKind::isoperimetric_eq) return 2;
  return 0;
}

double ConstraintValue::norm(const Mesh& mesh) const {
  double acc = 0.0;
  if (!pointwise.empty()) {
    const double w = mesh.cell_volume();
    for (double v : pointwise) acc += w * std::fabs(v);
  }
  for (double v : scalars) acc += std::fabs(v);
  return acc;
}

double ConstraintValue::sup_norm() const {
  double m = 0.0;
  for (double v : pointwise) m = std::max(m, std::fabs(v));
  for (double v : scalars) m = std::max(m, std::fabs(v));
  return m;
}

bool ConstraintValue::all_finite() const {
  for (double v : pointwise)
    if (!std::isfinite(v)) return false;
  for (double v : scalars)
    if (!std::isfinite(v)) return false;
  return true;
}

double pi_relax(double t) { return t > 0.0 ? t * t : 0.0; }
double pi_relax_deriv(double t) { return t > 0.0 ? 2.0 * t : 0.0; }

ConstraintValue zero_value(const ConstraintSpec& spec, const Mesh& mesh) {
  ConstraintValue v;
  v.kind = spec.kind;
  switch (spec.kind) {
    case ConstraintKind::none: break;
    case ConstraintKind::isoperimetric:
    case ConstraintKind::isoperimetric_eq:
      v.scalars.assign(spec.scalar_count(), 0.0);
      break;
    default:
      v.pointwise.assign(mesh.quad_count(), 0.0);
      break;
  }
  return v;
}

ConstraintValue eval_Q(const ConstraintSpec& spec, const Field& u, const Mesh& mesh) {
  if (spec.kind == ConstraintKind::none) return zero_value(spec, mesh);
  return eval_Q(spec, mesh, sample(u, mesh));
}

ConstraintValue eval_Q(const ConstraintSpec& spec, const Mesh& mesh, const Samples& s) {
  ConstraintValue out = zero_value(spec, mesh);
  if (spec.kind == ConstraintKind::none) return out;
  const int N = s.components;

  switch (spec.kind) {
    case ConstraintKind::holonomic:
      for (int q = 0; q < s.n_q; ++q)
        out.pointwise[q] = pi_fn_value(spec.pi, spec.c, &s.u[static_cast<std::size_t>(q) * N], N);
      break;
    case ConstraintKind::unilateral:
      for (int q = 0; q < s.n_q; ++q)
        out.pointwise[q] =
            pi_relax(pi_fn_value(spec.pi, spec.c, &s.u[static_cast<std::size_t>(q) * N], N));
      break;
    case ConstraintKind::inclusion_ball:
      for (int q = 0; q < s.n_q; ++q) {
        const double* uq = &s.u[static_cast<std::size_t>(q) * N];
        double r2 = 0.0;
        for (int c = 0; c < N; ++c) r2 += uq[c] * uq[c];
        out.pointwise[q] = pi_relax(std::sqrt(r2) - spec.radius);
      }
      break;
    case ConstraintKind::inclusion_box: {
      if (static_cast<int>(spec.box_lo.size()) != N || static_cast<int>(spec.box_hi.size()) != N)
        throw std::invalid_argument("inclusion_box: bounds must have one entry per component");
      for (int q = 0; q < s.n_q; ++q) {
        const double* uq = &s.u[static_cast<std::size_t>(q) * N];
        double acc = 0.0;
        for (int c = 0; c < N; ++c)
          acc += pi_relax(uq[c] - spec.box_hi[c]) + pi_relax(spec.box_lo[c] - uq[c]);
        out.pointwise[q] = acc;
      }
      break;
    }
    case ConstraintKind::isoperimetric:
      out.scalars[0] = pi_relax(h_integral(spec, mesh, s) - spec.H);
      break;
    case ConstraintKind::isoperimetric_eq: {
      const double I = h_integral(spec, mesh, s);
      out.scalars[0] = pi_relax(I - spec.H);
      out.scalars[1] = pi_relax(spec.H - I);
      break;
    }
    case ConstraintKind::none: break;
  }
  return out;
}

ConstraintValue apply_dQ(const ConstraintSpec& spec, const Field& u, const Field& variation,
                         const Mesh& mesh) {
  ConstraintValue out = zero_value(spec, mesh);
  if (spec.kind == ConstraintKind::none) return out;
  if (variation.components != u.components)
    throw std::invalid_argument("apply_dQ: variation shape mismatch");
  const Samples su = sample(u, mesh);
  const Samples sv = sample(variation, mesh);
  const int N = su.components;
  double de[kMaxComp];

  switch (spec.kind) {
    case ConstraintKind::holonomic:
      for (int q = 0; q < su.n_q; ++q) {
        const double* uq = &su.u[static_cast<std::size_t>(q) * N];
        const double* vq = &sv.u[static_cast<std::size_t>(q) * N];
        pi_fn_deta(spec.pi, spec.c, uq, N, de);
        double t = 0.0;
        for (int c = 0; c < N; ++c) t += de[c] * vq[c];
        out.pointwise[q] = t;
      }
      break;
    case ConstraintKind::unilateral:
      for (int q = 0; q < su.n_q; ++q) {
        const double* uq = &su.u[static_cast<std::size_t>(q) * N];
        const double* vq = &sv.u[static_cast<std::size_t>(q) * N];
        const double d = pi_relax_deriv(pi_fn_value(spec.pi, spec.c, uq, N));
        if (d == 0.0) continue;
        pi_fn_deta(spec.pi, spec.c, uq, N, de);
        double t = 0.0;
        for (int c = 0; c < N; ++c) t += de[c] * vq[c];
        out.pointwise[q] = d * t;
      }
      break;
    case ConstraintKind::inclusion_ball:
      for (int q = 0; q < su.n_q; ++q) {
        const double* uq = &su.u[static_cast<std::size_t>(q) * N];
        const double* vq = &sv.u[static_cast<std::size_t>(q) * N];
        double r2 = 0.0;
        for (int c = 0; c < N; ++c) r2 += uq[c] * uq[c];
        const double r = std::sqrt(r2);
        const double d = pi_relax_deriv(r - spec.radius);
        if (d == 0.0 || r == 0.0) continue;
        double t = 0.0;
        for (int c = 0; c < N; ++c) t += uq[c] / r * vq[c];
        out.pointwise[q] = d * t;
      }
      break;
    case ConstraintKind::inclusion_box:
      for (int q = 0; q < su.n_q; ++q) {
        const double* uq = &su.u[static_cast<std::size_t>(q) * N];
        const double* vq = &sv.u[static_cast<std::size_t>(q) * N];
        double t = 0.0;
        for (int c = 0; c < N; ++c)
          t += (pi_relax_deriv(uq[c] - spec.box_hi[c]) - pi_relax_deriv(spec.box_lo[c] - uq[c])) *
               vq[c];
        out.pointwise[q] = t;
      }
      break;
    case ConstraintKind::isoperimetric: {
      const double I = h_integral(spec, mesh, su);
      const double d = pi_relax_deriv(I - spec.H);
      out.scalars[0] = d == 0.0 ? 0.0 : d * h_directional(spec, mesh, su, sv);
      break;
    }
    case ConstraintKind::isoperimetric_eq: {
      const double I = h_integral(spec, mesh, su);
      const double dlo = pi_relax_deriv(I - spec.H);
      const double dhi = pi_relax_deriv(spec.H - I);
      if (dlo != 0.0 || dhi != 0.0) {
        const double J = h_directional(spec, mesh, su, sv);
        out.scalars[0] = dlo * J;
        out.scalars[1] = -dhi * J;
      }
      break;
    }
    case ConstraintKind::none: break;
  }
  return out;
}

double pairing(const ConstraintValue& dual, const ConstraintValue& residual, const Mesh& mesh) {
  if (dual.kind != residual.kind) throw std::invalid_argument("pairing: kind mismatch");
  if (dual.pointwise.size() != residual.pointwise.size() ||
      dual.scalars.size() != residual.scalars.size())
    throw std::invalid_argument("pairing: shape mismatch");
  double acc = 0.0;
  const double w = mesh.cell_volume();
  for (std::size_t i = 0; i < dual.pointwise.size(); ++i)
    acc += w * dual.pointwise[i] * residual.pointwise[i];
  for (std::size_t i = 0; i < dual.scalars.size(); ++i) acc += dual.scalars[i] * residual.scalars[i];
  return acc;
}

void dQ_adjoint_into(const ConstraintSpec& spec, const Mesh& mesh, const Samples& s,
                     const ConstraintValue& omega, Field& out) {
  std::fill(out.values.begin(), out.values.end(), 0.0);
  if (spec.kind == ConstraintKind::none) return;
  const int N = s.components, dim = s.dim;
  const double w = mesh.cell_volume();
  double de[kMaxComp], coefU[kMaxComp], coefP[kMaxComp * 2];

  switch (spec.kind) {
    case ConstraintKind::holonomic:
      for (int q = 0; q < s.n_q; ++q) {
        const double t = w * omega.pointwise[q];
        if (t == 0.0) continue;
        pi_fn_deta(spec.pi, spec.c, &s.u[static_cast<std::size_t>(q) * N], N, de);
        for (int c = 0; c < N; ++c) coefU[c] = t * de[c];
        scatter_quad(mesh, q, coefU, nullptr, out);
      }
      break;
    case ConstraintKind::unilateral:
      for (int q = 0; q < s.n_q; ++q) {
        const double* uq = &s.u[static_cast<std::size_t>(q) * N];
        const double d = pi_relax_deriv(pi_fn_value(spec.pi, spec.c, uq, N));
        const double t = w * omega.pointwise[q] * d;
        if (t == 0.0) continue;
        pi_fn_deta(spec.pi, spec.c, uq, N, de);
        for (int c = 0; c < N; ++c) coefU[c] = t * de[c];
        scatter_quad(mesh, q, coefU, nullptr, out);
      }
      break;
    case ConstraintKind::inclusion_ball:
      for (int q = 0; q < s.n_q; ++q) {
        const double* uq = &s.u[static_cast<std::size_t>(q) * N];
        double r2 = 0.0;
        for (int c = 0; c < N; ++c) r2 += uq[c] * uq[c];
        const double r = std::sqrt(r2);
        const double d = pi_relax_deriv(r - spec.radius);
        if (d == 0.0 || r == 0.0) continue;
        const double t = w * omega.pointwise[q] * d / r;
        for (int c = 0; c < N; ++c) coefU[c] = t * uq[c];
        scatter_quad(mesh, q, coefU, nullptr, out);
      }
      break;
    case ConstraintKind::inclusion_box:
      for (int q = 0; q < s.n_q; ++q) {
        const double* uq = &s.u[static_cast<std::size_t>(q) * N];
        const double t = w * omega.pointwise[q];
        if (t == 0.0) continue;
        for (int c = 0; c < N; ++c)
          coefU[c] =
              t * (pi_relax_deriv(uq[c] - spec.box_hi[c]) - pi_relax_deriv(spec.box_lo[c] - uq[c]));
        scatter_quad(mesh, q, coefU, nullptr, out);
      }
      break;
    case ConstraintKind::isoperimetric:
    case ConstraintKind::isoperimetric_eq: {
      const double I = h_integral(spec, mesh, s);
      double factor = omega.scalars[0] * pi_relax_deriv(I - spec.H);
      if (spec.kind == ConstraintKind::isoperimetric_eq)
        factor -= omega.scalars[1] * pi_relax_deriv(spec.H - I);
      if (factor == 0.0) break;
      for (int q = 0; q < s.n_q; ++q) {
        const double* uq = &s.u[static_cast<std::size_t>(q) * N];
        const double* duq = &s.du[static_cast<std::size_t>(q) * N * dim];
        h_fn_deta(spec.h, uq, N, de);
        h_fn_dP(spec.h, duq, N, dim, coefP);
        for (int c = 0; c < N; ++c) coefU[c] = factor * w * de[c];
        for (int k = 0; k < N * dim; ++k) coefP[k] *= factor * w;
        scatter_quad(mesh, q, coefU, coefP, out);
      }
      break;
    }
    case ConstraintKind::none: break;
  }
  zero_boundary(out, mesh);
}

}  // namespace supinf
