#include "supinf/kkt.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "supinf/kernels.hpp"

namespace supinf {

namespace {
constexpr int kMaxComp = 4;
}

DiscreteMeasure build_measure(std::span<const double> density, double norm_value, double p,
                              const Mesh& mesh) {
  DiscreteMeasure m;
  m.weights.assign(density.size(), 0.0);
  if (norm_value <= 0.0) return m;  // zero measure when the energy vanishes
  kernels::powstore(density.data(), m.weights.data(), density.size(), p - 1.0, 1.0 / norm_value);
  const double wq = 1.0 / static_cast<double>(mesh.quad_count());
  kernels::scal(wq, m.weights.data(), m.weights.size());
  m.mass = kernels::sum(m.weights.data(), m.weights.size());
  return m;
}

std::pair<DiscreteMeasure, DiscreteMeasure> build_measures(const SolveState& st,
                                                           const Problem& prob) {
  const Samples s = sample(st.u, prob.mesh);
  std::vector<double> fvals, gvals;
  f_values_into(prob.f, s, prob.mesh, fvals);
  g_values_into(prob.g, s, prob.mesh, gvals);
  return {build_measure(fvals, st.F_p, st.p, prob.mesh),
          build_measure(gvals, st.G_p, st.p, prob.mesh)};
}

RescaledMultipliers rescale(const RawMultipliers& raw, double F_p, double G_p, double p) {
  (void)G_p;  // cancels exactly in the norm-form conversion
  if (raw.lambda < 0.0 || raw.mu < 0.0)
    throw std::invalid_argument("rescale: lambda and mu must be nonnegative");
  const double psi_sup = raw.psi.sup_norm();
  const double denom = raw.lambda + raw.mu + psi_sup;
  if (denom == 0.0)
    throw std::runtime_error("rescale: all multipliers vanish (R_p = 0, broken solve)");

  RescaledMultipliers out;
  out.Lambda = raw.lambda / denom;
  out.M = raw.mu / denom;
  out.psi_sup = psi_sup / denom;
  out.Psi = raw.psi;
  // the first-order system carries the dual pairing on the right-hand
  // side, opposite to the solver's gradient-side multiplier
  const double scale = -1.0 / denom;
  for (auto& v : out.Psi.pointwise) v *= scale;
  for (auto& v : out.Psi.scalars) v *= scale;

  // power scaling: lambda_hat, mu_hat, |psi_hat| all carry F_p^{p-1}
  out.log_R = (F_p > 0.0 ? (p - 1.0) * std::log(F_p) : 0.0) + std::log(denom);
  out.R = std::exp(out.log_R);
  return out;
}

double slackness(const SolveState& st, double G) {
  return std::fabs(st.mults.mu * (st.G_p - G));
}

double slackness_limit(double M_tail, double G_inf_last, double G) {
  return std::fabs(M_tail * (G_inf_last - G));
}

double kkt_residual_p(const SolveState& st, const Problem& prob, int max_basis, unsigned seed) {
  const Mesh& mesh = prob.mesh;
  const int N = prob.components;
  const auto [sigma, tau] = build_measures(st, prob);
  const RescaledMultipliers rm = rescale(st.mults, st.F_p, st.G_p, st.p);

  const Samples su = sample(st.u, mesh);

  // per-point f_P and g_eta at the state
  std::vector<double> fP(static_cast<std::size_t>(su.n_q) * N * mesh.dim);
  std::vector<double> geta(static_cast<std::size_t>(su.n_q) * N);
  for (int q = 0; q < su.n_q; ++q) {
    const auto x = mesh.quad_point(q);
    prob.f.dP(x.data(), &su.du[static_cast<std::size_t>(q) * N * mesh.dim], N, mesh.dim,
              &fP[static_cast<std::size_t>(q) * N * mesh.dim]);
    prob.g.deta(x.data(), &su.u[static_cast<std::size_t>(q) * N], N,
                &geta[static_cast<std::size_t>(q) * N]);
  }

  std::vector<int> nodes = interior_nodes(mesh);
  std::vector<std::pair<int, int>> basis;
  basis.reserve(nodes.size() * N);
  for (int node : nodes)
    for (int c = 0; c < N; ++c) basis.emplace_back(node, c);
  const int want = std::max(32, max_basis);
  if (static_cast<int>(basis.size()) > want) {
    std::mt19937 rng(seed);
    std::shuffle(basis.begin(), basis.end(), rng);
    basis.resize(want);
  }

  Field phi = zero_field(mesh, N);
  Samples sphi;
  double worst = 0.0;
  for (auto [node, comp] : basis) {
    phi.at(node, comp) = 1.0;
    sample_into(phi, mesh, sphi);

    double lhs = 0.0;
    if (rm.Lambda != 0.0) {
      double acc = 0.0;
      for (int q = 0; q < su.n_q; ++q) {
        if (sigma.weights[q] == 0.0) continue;
        const double* fq = &fP[static_cast<std::size_t>(q) * N * mesh.dim];
        const double* dphi = &sphi.du[static_cast<std::size_t>(q) * N * mesh.dim];
        double t = 0.0;
        for (int k = 0; k < N * mesh.dim; ++k) t += fq[k] * dphi[k];
        acc += sigma.weights[q] * t;
      }
      lhs += rm.Lambda * acc;
    }
    if (rm.M != 0.0) {
      double acc = 0.0;
      for (int q = 0; q < su.n_q; ++q) {
        if (tau.weights[q] == 0.0) continue;
        const double* gq = &geta[static_cast<std::size_t>(q) * N];
        const double* uphi = &sphi.u[static_cast<std::size_t>(q) * N];
        double t = 0.0;
        for (int c = 0; c < N; ++c) t += gq[c] * uphi[c];
        acc += tau.weights[q] * t;
      }
      lhs += rm.M * acc;
    }

    double rhs = 0.0;
    if (prob.constraint.kind != ConstraintKind::none && rm.psi_sup != 0.0)
      rhs = pairing(rm.Psi, apply_dQ(prob.constraint, st.u, phi, mesh), mesh);

    const double w1inf =
        std::max(kernels::max_abs(sphi.u.data(), sphi.u.size()),
                 kernels::max_abs(sphi.du.data(), sphi.du.size()));
    worst = std::max(worst, std::fabs(lhs - rhs) / (1.0 + w1inf));

    phi.at(node, comp) = 0.0;
  }
  return worst;
}

double quadratic_identity_gap(const Field& u, const Field& v, const DiscreteMeasure& sigma,
                              const DensityF& f, const Mesh& mesh) {
  if (!f.quadratic())
    throw std::logic_error("quadratic_identity_gap: density is not quadratic in P");
  const Samples su = sample(u, mesh);
  const Samples sv = sample(v, mesh);
  const int N = su.components, dim = su.dim;
  if (sigma.weights.size() != static_cast<std::size_t>(su.n_q))
    throw std::invalid_argument("quadratic_identity_gap: measure size mismatch");

  double lhs = 0.0, rhs = 0.0;
  double diff[kMaxComp * 2], fP[kMaxComp * 2];
  for (int q = 0; q < su.n_q; ++q) {
    const double w = sigma.weights[q];
    if (w == 0.0) continue;
    const auto x = mesh.quad_point(q);
    const double* Du = &su.du[static_cast<std::size_t>(q) * N * dim];
    const double* Dv = &sv.du[static_cast<std::size_t>(q) * N * dim];
    for (int k = 0; k < N * dim; ++k) diff[k] = Dv[k] - Du[k];
    lhs += w * f.value(x.data(), diff, N, dim);
    f.dP(x.data(), Du, N, dim, fP);
    double cross = 0.0;
    for (int k = 0; k < N * dim; ++k) cross += fP[k] * (Du[k] - Dv[k]);
    rhs += w * (f.value(x.data(), Dv, N, dim) - f.value(x.data(), Du, N, dim) + cross);
  }
  return std::fabs(lhs - rhs);
}

std::pair<double, double> energy_measure_identity(const SolveState& st, const Problem& prob,
                                                  const DiscreteMeasure& sigma) {
  const Samples s = sample(st.u, prob.mesh);
  std::vector<double> fvals;
  f_values_into(prob.f, s, prob.mesh, fvals);
  if (sigma.weights.size() != fvals.size())
    throw std::invalid_argument("energy_measure_identity: measure size mismatch");
  const double lhs = kernels::dot(sigma.weights.data(), fvals.data(), fvals.size());
  return {lhs, st.F_p};
}

}  // namespace supinf
