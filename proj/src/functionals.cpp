#include "supinf/functionals.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "supinf/kernels.hpp"

namespace supinf {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxComp = 4;
}  // namespace

double coef_value(CoefKind k, const double* x) {
  switch (k) {
    case CoefKind::one: return 1.0;
    case CoefKind::two_plus_sin: return 2.0 + std::sin(2.0 * std::numbers::pi * x[0]);
  }
  return 1.0;
}

CoefKind coef_from_name(const std::string& name) {
  if (name == "one") return CoefKind::one;
  if (name == "two_plus_sin") return CoefKind::two_plus_sin;
  throw std::invalid_argument("unknown coefficient '" + name + "'");
}

DensityF DensityF::dirichlet() {
  DensityF f;
  f.kind_ = Kind::isotropic;
  f.coef_ = CoefKind::one;
  f.name_ = "dirichlet";
  return f;
}

DensityF DensityF::weighted_dirichlet(CoefKind coef) {
  DensityF f;
  f.kind_ = Kind::isotropic;
  f.coef_ = coef;
  f.name_ = "weighted_dirichlet";
  return f;
}

DensityF DensityF::abs_grad() {
  DensityF f;
  f.kind_ = Kind::abs_grad;
  f.name_ = "abs_grad";
  return f;
}

DensityF DensityF::constant_tensor(std::vector<double> sym, int K) {
  if (static_cast<int>(sym.size()) != K * K)
    throw std::invalid_argument("constant_tensor: need K*K entries");
  DensityF f;
  f.kind_ = Kind::tensor;
  f.name_ = "tensor";
  f.K_ = K;
  // symmetrize; only the symmetric part enters A:P(x)P
  f.A_.resize(sym.size());
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) f.A_[i * K + j] = 0.5 * (sym[i * K + j] + sym[j * K + i]);
  return f;
}

double DensityF::value(const double* x, const double* P, int N, int dim) const {
  const int K = N * dim;
  switch (kind_) {
    case Kind::isotropic: {
      double s = 0.0;
      for (int k = 0; k < K; ++k) s += P[k] * P[k];
      return coef_value(coef_, x) * s;
    }
    case Kind::abs_grad: {
      double s = 0.0;
      for (int k = 0; k < K; ++k) s += P[k] * P[k];
      return std::sqrt(s);
    }
    case Kind::tensor: {
      if (K != K_) throw std::invalid_argument("tensor density: wrong P size");
      double s = 0.0;
      for (int i = 0; i < K; ++i) {
        double r = 0.0;
        for (int j = 0; j < K; ++j) r += A_[i * K + j] * P[j];
        s += P[i] * r;
      }
      return s;
    }
  }
  return 0.0;
}

void DensityF::dP(const double* x, const double* P, int N, int dim, double* out) const {
  const int K = N * dim;
  switch (kind_) {
    case Kind::isotropic: {
      const double a2 = 2.0 * coef_value(coef_, x);
      for (int k = 0; k < K; ++k) out[k] = a2 * P[k];
      return;
    }
    case Kind::abs_grad: {
      double s = 0.0;
      for (int k = 0; k < K; ++k) s += P[k] * P[k];
      const double r = std::sqrt(s);
      if (r == 0.0) {
        for (int k = 0; k < K; ++k) out[k] = 0.0;
      } else {
        for (int k = 0; k < K; ++k) out[k] = P[k] / r;
      }
      return;
    }
    case Kind::tensor: {
      if (K != K_) throw std::invalid_argument("tensor density: wrong P size");
      for (int i = 0; i < K; ++i) {
        double r = 0.0;
        for (int j = 0; j < K; ++j) r += A_[i * K + j] * P[j];
        out[i] = 2.0 * r;
      }
      return;
    }
  }
}

double DensityF::min_ellipticity(const Mesh& mesh) const {
  double a0 = kInf;
  switch (kind_) {
    case Kind::abs_grad:
      throw std::logic_error("min_ellipticity: density is not quadratic");
    case Kind::isotropic: {
      if (coef_ == CoefKind::one) return 1.0;
      // dense sampling along each axis plus the quadrature points
      const int n_dense = mesh.dim == 1 ? 8192 : 256;
      double x[2] = {0.0, 0.0};
      if (mesh.dim == 1) {
        for (int i = 0; i <= n_dense; ++i) {
          x[0] = mesh.lo[0] + (mesh.hi[0] - mesh.lo[0]) * i / n_dense;
          a0 = std::min(a0, coef_value(coef_, x));
        }
      } else {
        for (int i = 0; i <= n_dense; ++i)
          for (int j = 0; j <= n_dense; ++j) {
            x[0] = mesh.lo[0] + (mesh.hi[0] - mesh.lo[0]) * i / n_dense;
            x[1] = mesh.lo[1] + (mesh.hi[1] - mesh.lo[1]) * j / n_dense;
            a0 = std::min(a0, coef_value(coef_, x));
          }
      }
      for (int q = 0; q < mesh.quad_count(); ++q) {
        const auto xq = mesh.quad_point(q);
        a0 = std::min(a0, coef_value(coef_, xq.data()));
      }
      break;
    }
    case Kind::tensor: {
      Eigen::MatrixXd M(K_, K_);
      for (int i = 0; i < K_; ++i)
        for (int j = 0; j < K_; ++j) M(i, j) = A_[i * K_ + j];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
      a0 = es.eigenvalues().minCoeff();
      break;
    }
  }
  if (!(a0 > 0.0)) throw std::runtime_error("min_ellipticity: tensor is not positive");
  return a0;
}

DensityG DensityG::abs() {
  DensityG g;
  g.kind_ = Kind::abs;
  g.name_ = "abs";
  return g;
}

DensityG DensityG::quad() {
  DensityG g;
  g.kind_ = Kind::quad;
  g.name_ = "quad";
  return g;
}

DensityG DensityG::constant(double c) {
  if (c < 0.0) throw std::invalid_argument("constant density must be nonnegative");
  DensityG g;
  g.kind_ = Kind::constant;
  g.name_ = "const";
  g.c_ = c;
  return g;
}

double DensityG::value(const double* /*x*/, const double* eta, int N) const {
  switch (kind_) {
    case Kind::abs: {
      double s = 0.0;
      for (int c = 0; c < N; ++c) s += eta[c] * eta[c];
      return std::sqrt(s);
    }
    case Kind::quad: {
      double s = 0.0;
      for (int c = 0; c < N; ++c) s += eta[c] * eta[c];
      return s;
    }
    case Kind::constant: return c_;
  }
  return 0.0;
}

void DensityG::deta(const double* /*x*/, const double* eta, int N, double* out) const {
  switch (kind_) {
    case Kind::abs: {
      double s = 0.0;
      for (int c = 0; c < N; ++c) s += eta[c] * eta[c];
      const double r = std::sqrt(s);
      for (int c = 0; c < N; ++c) out[c] = r == 0.0 ? 0.0 : eta[c] / r;
      return;
    }
    case Kind::quad:
      for (int c = 0; c < N; ++c) out[c] = 2.0 * eta[c];
      return;
    case Kind::constant:
      for (int c = 0; c < N; ++c) out[c] = 0.0;
      return;
  }
}

void f_values_into(const DensityF& f, const Samples& s, const Mesh& mesh,
                   std::vector<double>& out) {
  out.resize(s.n_q);
  const int N = s.components, dim = s.dim;
  for (int q = 0; q < s.n_q; ++q) {
    const auto x = mesh.quad_point(q);
    out[q] = f.value(x.data(), &s.du[static_cast<std::size_t>(q) * N * dim], N, dim);
  }
}

void g_values_into(const DensityG& g, const Samples& s, const Mesh& mesh,
                   std::vector<double>& out) {
  out.resize(s.n_q);
  const int N = s.components;
  for (int q = 0; q < s.n_q; ++q) {
    const auto x = mesh.quad_point(q);
    const double v = g.value(x.data(), &s.u[static_cast<std::size_t>(q) * N], N);
    if (v < 0.0) throw std::runtime_error("density g is negative at a quadrature point");
    out[q] = v;
  }
}

LpValue eval_Lp(std::span<const double> density, const Mesh& mesh, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("eval_Lp: p must be >= 1");
  const std::size_t n = density.size();
  if (n != static_cast<std::size_t>(mesh.quad_count()))
    throw std::invalid_argument("eval_Lp: density size does not match quadrature");
  for (double d : density)
    if (d < 0.0) throw std::runtime_error("eval_Lp: negative density value");
  const double dmax = kernels::max_val(density.data(), n);
  if (dmax == 0.0) return {p, 0.0};
  const double s = kernels::powsum(density.data(), n, p, 1.0 / dmax);
  return {p, dmax * std::pow(s / static_cast<double>(n), 1.0 / p)};
}

LpValue eval_Linf(std::span<const double> density, const Mesh& mesh) {
  const std::size_t n = density.size();
  if (n != static_cast<std::size_t>(mesh.quad_count()))
    throw std::invalid_argument("eval_Linf: density size does not match quadrature");
  if (n == 0) return {kInf, 0.0};
  return {kInf, kernels::max_val(density.data(), n)};
}

LpValue eval_Lp(const DensityF& f, const Field& u, const Mesh& mesh, double p) {
  const Samples s = sample(u, mesh);
  std::vector<double> vals;
  f_values_into(f, s, mesh, vals);
  return eval_Lp(vals, mesh, p);
}

LpValue eval_Lp(const DensityG& g, const Field& u, const Mesh& mesh, double p) {
  const Samples s = sample(u, mesh);
  std::vector<double> vals;
  g_values_into(g, s, mesh, vals);
  return eval_Lp(vals, mesh, p);
}

LpValue eval_Linf(const DensityF& f, const Field& u, const Mesh& mesh) {
  const Samples s = sample(u, mesh);
  std::vector<double> vals;
  f_values_into(f, s, mesh, vals);
  return eval_Linf(vals, mesh);
}

LpValue eval_Linf(const DensityG& g, const Field& u, const Mesh& mesh) {
  const Samples s = sample(u, mesh);
  std::vector<double> vals;
  g_values_into(g, s, mesh, vals);
  return eval_Linf(vals, mesh);
}

Field grad_scaled_objective(const DensityF& f, const Field& u, const Mesh& mesh, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("grad_scaled_objective: p must be >= 1");
  const Samples s = sample(u, mesh);
  std::vector<double> fvals;
  f_values_into(f, s, mesh, fvals);

  Field out = zero_field(mesh, u.components);
  const int N = s.components, dim = s.dim;
  const double wq = 1.0 / static_cast<double>(mesh.quad_count());  // w_q/|Omega|
  double fP[kMaxComp * 2];
  double coefP[kMaxComp * 2];
  for (int q = 0; q < s.n_q; ++q) {
    const double t = wq * std::pow(fvals[q], p - 1.0);
    if (t == 0.0) continue;
    const auto x = mesh.quad_point(q);
    f.dP(x.data(), &s.du[static_cast<std::size_t>(q) * N * dim], N, dim, fP);
    for (int k = 0; k < N * dim; ++k) coefP[k] = t * fP[k];
    scatter_quad(mesh, q, nullptr, coefP, out);
  }
  zero_boundary(out, mesh);
  return out;
}

Field grad_scaled_constraint_g(const DensityG& g, const Field& u, const Mesh& mesh, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("grad_scaled_constraint_g: p must be >= 1");
  const Samples s = sample(u, mesh);
  std::vector<double> gvals;
  g_values_into(g, s, mesh, gvals);

  Field out = zero_field(mesh, u.components);
  const int N = s.components;
  const double wq = 1.0 / static_cast<double>(mesh.quad_count());
  double geta[kMaxComp];
  double coefU[kMaxComp];
  for (int q = 0; q < s.n_q; ++q) {
    const double t = wq * std::pow(gvals[q], p - 1.0);
    if (t == 0.0) continue;
    const auto x = mesh.quad_point(q);
    g.deta(x.data(), &s.u[static_cast<std::size_t>(q) * N], N, geta);
    for (int c = 0; c < N; ++c) coefU[c] = t * geta[c];
    scatter_quad(mesh, q, coefU, nullptr, out);
  }
  zero_boundary(out, mesh);
  return out;
}

void grad_Lp_norm_f_into(const DensityF& f, const Mesh& mesh, const Samples& s,
                         std::span<const double> fvals, double p, double norm_value,
                         Field& out) {
  std::fill(out.values.begin(), out.values.end(), 0.0);
  if (norm_value <= 0.0) return;
  const int N = s.components, dim = s.dim;
  const std::size_t n = fvals.size();
  static thread_local std::vector<double> ratio;
  ratio.resize(n);
  kernels::powstore(fvals.data(), ratio.data(), n, p - 1.0, 1.0 / norm_value);
  const double wq = 1.0 / static_cast<double>(mesh.quad_count());
  double fP[kMaxComp * 2];
  double coefP[kMaxComp * 2];
  for (int q = 0; q < s.n_q; ++q) {
    const double t = wq * ratio[q];
    if (t == 0.0) continue;
    const auto x = mesh.quad_point(q);
    f.dP(x.data(), &s.du[static_cast<std::size_t>(q) * N * dim], N, dim, fP);
    for (int k = 0; k < N * dim; ++k) coefP[k] = t * fP[k];
    scatter_quad(mesh, q, nullptr, coefP, out);
  }
  zero_boundary(out, mesh);
}

void grad_Lp_norm_g_into(const DensityG& g, const Mesh& mesh, const Samples& s,
                         std::span<const double> gvals, double p, double norm_value,
                         Field& out) {
  std::fill(out.values.begin(), out.values.end(), 0.0);
  if (norm_value <= 0.0) return;
  const int N = s.components;
  const std::size_t n = gvals.size();
  static thread_local std::vector<double> ratio;
  ratio.resize(n);
  kernels::powstore(gvals.data(), ratio.data(), n, p - 1.0, 1.0 / norm_value);
  const double wq = 1.0 / static_cast<double>(mesh.quad_count());
  double geta[kMaxComp];
  double coefU[kMaxComp];
  for (int q = 0; q < s.n_q; ++q) {
    const double t = wq * ratio[q];
    if (t == 0.0) continue;
    const auto x = mesh.quad_point(q);
    g.deta(x.data(), &s.u[static_cast<std::size_t>(q) * N], N, geta);
    for (int c = 0; c < N; ++c) coefU[c] = t * geta[c];
    scatter_quad(mesh, q, coefU, nullptr, out);
  }
  zero_boundary(out, mesh);
}

}  // namespace supinf
