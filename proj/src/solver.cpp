#include "supinf/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "supinf/kernels.hpp"

namespace supinf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double q_l2sq(const ConstraintValue& q, const Mesh& mesh) {
  double acc = 0.0;
  if (!q.pointwise.empty())
    acc += mesh.cell_volume() * kernels::nrm2sq(q.pointwise.data(), q.pointwise.size());
  for (double v : q.scalars) acc += v * v;
  return acc;
}

struct Packing {
  const Mesh* mesh = nullptr;
  int N = 1;
  std::vector<int> interior;

  void init(const Mesh& m, int components) {
    mesh = &m;
    N = components;
    interior = interior_nodes(m);
  }
  std::size_t size() const { return interior.size() * N; }
  void pack(const Field& f, std::vector<double>& x) const {
    x.resize(size());
    std::size_t k = 0;
    for (int node : interior)
      for (int c = 0; c < N; ++c) x[k++] = f.at(node, c);
  }
  void unpack(std::span<const double> x, Field& f) const {
    std::size_t k = 0;
    for (int node : interior)
      for (int c = 0; c < N; ++c) f.at(node, c) = x[k++];
  }
  void pack_grad(const Field& g, std::span<double> out) const {
    std::size_t k = 0;
    for (int node : interior)
      for (int c = 0; c < N; ++c) out[k++] = g.at(node, c);
  }
};

// Shared evaluation scratch for one (problem, p) pair. The inner loop
// minimizes a 2-homogeneous transform of the objective norm: F_p itself
// when f is quadratic in P, (1/2) F_p^2 when f = |P| (the norm is then a
// cone and quasi-Newton curvature degenerates along rays). obj_scale(F)
// is the conversion factor between the transformed and the norm-form
// multipliers.
struct Ctx {
  const Problem* prob;
  double p;
  bool square_objective;
  Packing pk;
  Field u, gF, gG, gQ;
  Samples s;
  std::vector<double> fvals, gvals;
  ConstraintValue omega;

  Ctx(const Problem& pr, double p_)
      : prob(&pr), p(p_), square_objective(!pr.f.quadratic()) {
    pk.init(pr.mesh, pr.components);
    u = zero_field(pr.mesh, pr.components);
    gF = u;
    gG = u;
    gQ = u;
    omega = zero_value(pr.constraint, pr.mesh);
  }

  double obj_scale(double F) const { return square_objective ? F : 1.0; }

  void load(std::span<const double> x) {
    pk.unpack(x, u);
    sample_into(u, prob->mesh, s);
    f_values_into(prob->f, s, prob->mesh, fvals);
    g_values_into(prob->g, s, prob->mesh, gvals);
  }

  double F() const { return eval_Lp(fvals, prob->mesh, p).value; }
  double Gp() const { return eval_Lp(gvals, prob->mesh, p).value; }
  ConstraintValue Q() const { return eval_Q(prob->constraint, prob->mesh, s); }
};

void add_omega(ConstraintValue& omega, const ConstraintValue& psi, const ConstraintValue& q,
               double rho) {
  for (std::size_t i = 0; i < omega.pointwise.size(); ++i)
    omega.pointwise[i] = psi.pointwise[i] + rho * q.pointwise[i];
  for (std::size_t i = 0; i < omega.scalars.size(); ++i)
    omega.scalars[i] = psi.scalars[i] + rho * q.scalars[i];
}

// Augmented Lagrangian of the norm-form problem
//   min F_p(u)  s.t.  G_p(u) - G <= 0,  Q(u) = 0,
// stated through the 2-homogeneous objective transform. The multipliers
// mu/psi here are in the transformed scaling; the conversion to the
// norm-form triple divides by obj_scale(F_p) at the exit point.
struct ALObjective {
  Ctx* ctx;
  double mu = 0.0;
  const ConstraintValue* psi = nullptr;
  double rho_g = 1.0, rho_q = 1.0;

  double operator()(std::span<const double> x, std::span<double> grad) {
    Ctx& c = *ctx;
    const Problem& prob = *c.prob;
    c.load(x);
    const double F = c.F();
    const double Gp = c.Gp();
    const ConstraintValue q = c.Q();

    const double cval = Gp - prob.G;
    const double nu = std::max(0.0, mu + rho_g * cval);
    double val = c.square_objective ? 0.5 * F * F : F;
    val += (nu * nu - mu * mu) / (2.0 * rho_g);
    if (prob.constraint.kind != ConstraintKind::none) {
      val += pairing(*psi, q, prob.mesh) + 0.5 * rho_q * q_l2sq(q, prob.mesh);
    }

    const double dJdF = c.square_objective ? F : 1.0;
    grad_Lp_norm_f_into(prob.f, prob.mesh, c.s, c.fvals, ctx->p, F, c.gF);
    if (nu != 0.0)
      grad_Lp_norm_g_into(prob.g, prob.mesh, c.s, c.gvals, ctx->p, Gp, c.gG);
    if (prob.constraint.kind != ConstraintKind::none) {
      add_omega(c.omega, *psi, q, rho_q);
      dQ_adjoint_into(prob.constraint, prob.mesh, c.s, c.omega, c.gQ);
    }

    std::size_t k = 0;
    for (int node : c.pk.interior)
      for (int cc = 0; cc < c.pk.N; ++cc) {
        double gv = dJdF * c.gF.at(node, cc);
        if (nu != 0.0) gv += nu * c.gG.at(node, cc);
        if (prob.constraint.kind != ConstraintKind::none) gv += c.gQ.at(node, cc);
        grad[k++] = gv;
      }
    return val;
  }
};

// Smooth violation merit for the compatibility phase: L1 of the pi-relaxed
// residual (already quadratic in the violation), L2-squared for the signed
// holonomic residual, plus the squared hinge of the sublevel constraint.
struct ViolationObjective {
  Ctx* ctx;

  double operator()(std::span<const double> x, std::span<double> grad) {
    Ctx& c = *ctx;
    const Problem& prob = *c.prob;
    c.load(x);
    const double Gp = c.Gp();
    const ConstraintValue q = c.Q();
    const bool signed_residual = prob.constraint.kind == ConstraintKind::holonomic;

    double val = 0.0;
    const double hinge = std::max(0.0, Gp - prob.G);
    val += 0.5 * hinge * hinge;
    if (prob.constraint.kind != ConstraintKind::none) {
      if (signed_residual) {
        val += 0.5 * q_l2sq(q, prob.mesh);
        c.omega = q;
      } else {
        const double w = prob.mesh.cell_volume();
        for (double v : q.pointwise) val += w * v;
        for (double v : q.scalars) val += v;
        for (auto& v : c.omega.pointwise) v = 1.0;
        for (auto& v : c.omega.scalars) v = 1.0;
      }
      dQ_adjoint_into(prob.constraint, prob.mesh, c.s, c.omega, c.gQ);
    }
    if (hinge > 0.0)
      grad_Lp_norm_g_into(prob.g, prob.mesh, c.s, c.gvals, ctx->p, Gp, c.gG);

    std::size_t k = 0;
    for (int node : c.pk.interior)
      for (int cc = 0; cc < c.pk.N; ++cc) {
        double gv = 0.0;
        if (prob.constraint.kind != ConstraintKind::none) gv += c.gQ.at(node, cc);
        if (hinge > 0.0) gv += hinge * c.gG.at(node, cc);
        grad[k++] = gv;
      }
    return val;
  }
};

void validate_problem(const Problem& prob, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("solve_p: p must be >= 1");
  if (prob.components < 1 || prob.components > 4)
    throw std::invalid_argument("solve_p: components must be in [1,4]");
  if (prob.G < 0.0) throw std::invalid_argument("solve_p: G must be nonnegative");
}

}  // namespace

double scaled_lagrangian(const Field& u, double p, const Problem& prob,
                         const RawMultipliers& mults, double penalty) {
  if (penalty < 0.0) throw std::invalid_argument("scaled_lagrangian: penalty must be >= 0");
  const double F = eval_Lp(prob.f, u, prob.mesh, p).value;
  const double Gp = eval_Lp(prob.g, u, prob.mesh, p).value;
  const ConstraintValue q = eval_Q(prob.constraint, u, prob.mesh);

  const double c = (std::pow(Gp, p) - std::pow(prob.G, p)) / p;
  double ineq;
  if (penalty > 0.0) {
    const double nu = std::max(0.0, mults.mu + penalty * c);
    ineq = (nu * nu - mults.mu * mults.mu) / (2.0 * penalty);
  } else {
    ineq = mults.mu * c;
  }
  double val = std::pow(F, p) / p + ineq;
  if (prob.constraint.kind != ConstraintKind::none)
    val += pairing(mults.psi, q, prob.mesh) + 0.5 * penalty * q_l2sq(q, prob.mesh);
  return val;
}

InnerResult inner_minimize(const Objective& fg, std::vector<double> x0, double tol, int max_iter) {
  const std::size_t n = x0.size();
  InnerResult res;
  res.x = std::move(x0);
  if (n == 0) {
    res.converged = true;
    return res;
  }

  constexpr int kHistory = 25;
  constexpr double kArmijo = 1e-4;
  std::vector<double> g(n), gnew(n), d(n), xnew(n), svec(n), yvec(n);
  std::vector<std::vector<double>> S, Y;
  std::vector<double> rho_hist;

  double f = fg(res.x, g);
  double gn = std::sqrt(kernels::nrm2sq(g.data(), n));

  while (true) {
    if (gn <= tol * std::max(1.0, std::fabs(f))) {
      res.converged = true;
      break;
    }
    if (res.iters >= max_iter) break;

    // two-loop recursion
    for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
    const int k = static_cast<int>(S.size());
    std::vector<double> alpha(k);
    for (int i = k - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * kernels::dot(S[i].data(), d.data(), n);
      kernels::axpy(-alpha[i], Y[i].data(), d.data(), n);
    }
    if (k > 0) {
      const double yy = kernels::nrm2sq(Y.back().data(), n);
      const double sy = kernels::dot(S.back().data(), Y.back().data(), n);
      if (yy > 0.0) kernels::scal(sy / yy, d.data(), n);
    } else {
      kernels::scal(1.0 / std::max(1.0, gn), d.data(), n);
    }
    for (int i = 0; i < k; ++i) {
      const double beta = rho_hist[i] * kernels::dot(Y[i].data(), d.data(), n);
      kernels::axpy(alpha[i] - beta, S[i].data(), d.data(), n);
    }

    double dirder = kernels::dot(g.data(), d.data(), n);
    if (!(dirder < 0.0)) {
      // fall back to steepest descent
      S.clear();
      Y.clear();
      rho_hist.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i] / std::max(1.0, gn);
      dirder = kernels::dot(g.data(), d.data(), n);
    }

    // Armijo with an epsilon slack: near the solution the predicted
    // decrease c1*t*g'd sinks below the rounding noise of the objective,
    // so exact monotonicity cannot be verified there. The slack bounds
    // the admissible creep per step by machine epsilon relative.
    const double feps = 10.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(f));
    double t = 1.0;
    double fnew = kInf;
    bool accepted = false;
    for (int ls = 0; ls < 48; ++ls) {
      for (std::size_t i = 0; i < n; ++i) xnew[i] = res.x[i] + t * d[i];
      fnew = fg(xnew, gnew);
      if (std::isfinite(fnew) && fnew <= f + kArmijo * t * dirder + feps) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // no progress at machine scale

    for (std::size_t i = 0; i < n; ++i) {
      svec[i] = xnew[i] - res.x[i];
      yvec[i] = gnew[i] - g[i];
    }
    const double sy = kernels::dot(svec.data(), yvec.data(), n);
    const double ss = std::sqrt(kernels::nrm2sq(svec.data(), n));
    const double yy = std::sqrt(kernels::nrm2sq(yvec.data(), n));
    if (sy > 1e-12 * ss * yy) {
      S.push_back(svec);
      Y.push_back(yvec);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > kHistory) {
        S.erase(S.begin());
        Y.erase(Y.begin());
        rho_hist.erase(rho_hist.begin());
      }
    }

    res.x.swap(xnew);
    g.swap(gnew);
    f = fnew;
    gn = std::sqrt(kernels::nrm2sq(g.data(), n));
    ++res.iters;
  }

  res.value = f;
  res.grad_norm = gn;
  if (!res.converged) res.converged = gn <= tol * std::max(1.0, std::fabs(f));
  return res;
}

SolveState solve_p(const Problem& prob, double p, const SolveConfig& cfg, const WarmStart& warm) {
  validate_problem(prob, p);
  if (!(cfg.inner_tol > 0.0) || !(cfg.outer_tol > 0.0))
    throw std::invalid_argument("solve_p: tolerances must be positive");
  if (!(cfg.penalty_growth > 1.0))
    throw std::invalid_argument("solve_p: penalty_growth must exceed 1");

  const auto t0 = std::chrono::steady_clock::now();
  Ctx ctx(prob, p);
  const Mesh& mesh = prob.mesh;

  Field u = warm.u ? *warm.u : zero_field(mesh, prob.components);
  validate_field(u, mesh);

  std::vector<double> x;
  ctx.pk.pack(u, x);

  SolveState st;
  st.p = p;

  auto violation = [&](double Gp, const ConstraintValue& q) {
    return std::max(q.norm(mesh), std::max(0.0, Gp - prob.G));
  };

  // compatibility phase (Eq.-(1.13)-style): the feasible set must be
  // reachable by minimizing the constraint violation alone
  ctx.load(x);
  double viol = violation(ctx.Gp(), ctx.Q());
  if (viol > cfg.outer_tol) {
    ViolationObjective vo{&ctx};
    InnerResult r = inner_minimize(
        [&vo](std::span<const double> xx, std::span<double> gg) { return vo(xx, gg); }, x,
        std::min(1e-10, cfg.inner_tol), cfg.inner_max_iter);
    st.inner_iters += r.iters;
    x = std::move(r.x);
    ctx.load(x);
    viol = violation(ctx.Gp(), ctx.Q());
    if (viol > std::max(10.0 * cfg.outer_tol, 1e-7))
      throw InfeasibleError("compatibility check failed: minimized constraint violation " +
                            std::to_string(viol) + " exceeds tolerance (feasible set empty?)");
  }
  ctx.pk.unpack(x, st.u_ref = zero_field(mesh, prob.components));
  const double F_ref = ctx.F();

  // multipliers live in the transformed objective scaling inside the loop
  double mu = std::max(0.0, cfg.multiplier_init);
  ConstraintValue psi = zero_value(prob.constraint, mesh);
  if (warm.mults) {
    const double scale = ctx.obj_scale(std::max(ctx.F(), 1e-30));
    mu = std::max(0.0, warm.mults->mu) * scale;
    if (warm.mults->psi.pointwise.size() == psi.pointwise.size() &&
        warm.mults->psi.scalars.size() == psi.scalars.size() &&
        warm.mults->psi.kind == psi.kind) {
      psi = warm.mults->psi;
      for (auto& v : psi.pointwise) v *= scale;
      for (auto& v : psi.scalars) v *= scale;
    }
  }

  // independent penalties: the pi-relaxed Q blocks need rho_q to grow very
  // large (their restoring force is damped by pi'), while the sublevel
  // hinge would turn that same penalty into curvature rho*|grad G|^2 and
  // wreck the inner problem
  double rho_q = std::max(cfg.penalty_init, 1e-12);
  double rho_g = std::max(cfg.penalty_init, 1e-12);
  constexpr double kRhoMax = 1e22;
  const double slack_tol = cfg.slack_tol * (1.0 + prob.G);

  double F = 0.0, Gp = 0.0;
  ConstraintValue q = zero_value(prob.constraint, mesh);
  double nu = mu;
  ConstraintValue psi_next = psi;
  bool inner_ok = false;
  double viol_q_prev = kInf, viol_g_prev = kInf;

  int k = 0;
  for (; k < cfg.max_outer; ++k) {
    ALObjective al{&ctx, mu, &psi, rho_g, rho_q};
    auto fgal = [&al](std::span<const double> xx, std::span<double> gg) { return al(xx, gg); };

    // the gradient's term scale grows with the pi-block multiplier (which
    // diverges like 1/dist as the relaxed constraints tighten, the
    // Fritz-John degeneracy); the stationarity handed to the inner solver
    // is normalized accordingly, matching the scale-invariant first-order
    // residual reported by the kkt module
    const double mult_scale = 1.0 + mu + psi.sup_norm();
    const double tol_handed = cfg.inner_tol * std::max(1.0, 0.01 * mult_scale);

    // descent sanity: the inner solver must not increase the augmented
    // Lagrangian it is given
    double prev_al;
    {
      std::vector<double> gtmp(x.size());
      prev_al = al(x, gtmp);
    }
    InnerResult r = inner_minimize(fgal, x, tol_handed, cfg.inner_max_iter);
    st.inner_iters += r.iters;
    st.descent_violation = std::max(st.descent_violation, r.value - prev_al);
    x = std::move(r.x);
    inner_ok = r.converged;

    ctx.load(x);
    F = ctx.F();
    Gp = ctx.Gp();
    q = ctx.Q();
    viol = violation(Gp, q);
    const double viol_q = q.norm(mesh);
    const double viol_g = std::max(0.0, Gp - prob.G);

    if (std::getenv("SUPINF_DEBUG"))
      std::fprintf(stderr,
                   "[outer %2d] rho_q=%.2e rho_g=%.2e inner=%d ok=%d gn=%.2e F=%.10g "
                   "viol_q=%.3e viol_g=%.3e mu=%.3e psi_sup=%.3e\n",
                   k, rho_q, rho_g, r.iters, r.converged, r.grad_norm, F, viol_q, viol_g, mu,
                   psi.sup_norm());

    // first-order multiplier updates; nu is the post-update inequality
    // multiplier, consistent with the exit stationarity. The pi-block
    // update rate is capped at 4x geometric growth: a freshly grown rho_q
    // against a not-yet-equilibrated residual otherwise overshoots psi by
    // orders of magnitude, and psi never decays for one-sided residuals.
    nu = std::max(0.0, mu + rho_g * (Gp - prob.G));
    psi_next = psi;
    {
      const double q_sup = q.sup_norm();
      double rho_eff = rho_q;
      if (q_sup > 0.0)
        rho_eff = std::min(rho_q, (3.0 * psi.sup_norm() + 1.0) / q_sup);
      for (std::size_t i = 0; i < psi_next.pointwise.size(); ++i)
        psi_next.pointwise[i] += rho_eff * q.pointwise[i];
      for (std::size_t i = 0; i < psi_next.scalars.size(); ++i)
        psi_next.scalars[i] += rho_eff * q.scalars[i];
    }

    const double scale = ctx.obj_scale(std::max(F, 1e-30));
    const double slack = std::fabs(nu / scale * (Gp - prob.G));
    // scale-invariant stationarity at the post-update multipliers
    const bool stat_ok =
        inner_ok || r.grad_norm <= cfg.inner_tol * (scale + nu + psi_next.sup_norm());
    if (viol <= cfg.outer_tol && stat_ok && slack <= slack_tol) {
      st.converged = true;
      mu = nu;
      psi = psi_next;
      ++k;
      break;
    }

    // accept the multiplier steps; grow each penalty whenever its own
    // feasibility or complementarity stalls
    mu = nu;
    psi = psi_next;
    if (rho_q < kRhoMax &&
        !(viol_q <= std::max(cfg.outer_tol, 0.25 * viol_q_prev)))
      rho_q *= cfg.penalty_growth;
    const bool g_stalled = !(viol_g <= std::max(cfg.outer_tol, 0.25 * viol_g_prev));
    if (rho_g < kRhoMax && (g_stalled || (viol_g <= cfg.outer_tol && slack > slack_tol)))
      rho_g *= cfg.penalty_growth;
    viol_q_prev = viol_q;
    viol_g_prev = viol_g;
  }

  st.outer_iters = k;
  st.u = zero_field(mesh, prob.components);
  ctx.pk.unpack(x, st.u);
  st.F_p = F;
  st.G_p = Gp;
  st.F_inf = eval_Linf(ctx.fvals, mesh).value;
  st.G_inf = eval_Linf(ctx.gvals, mesh).value;
  st.q_norm = q.norm(mesh);
  st.feasibility = violation(Gp, q);

  // convert to the norm-form normalization (divide by dJ/dF at the exit)
  const double scale = ctx.obj_scale(std::max(F, 1e-30));
  st.mults.lambda = 1.0;
  st.mults.mu = mu / scale;
  st.mults.psi = psi;
  for (auto& v : st.mults.psi.pointwise) v /= scale;
  for (auto& v : st.mults.psi.scalars) v /= scale;
  st.slack = std::fabs(st.mults.mu * (Gp - prob.G));
  st.minimality_ok = st.F_p <= F_ref + 1e-8 * (1.0 + std::fabs(F_ref));
  if (!st.converged) st.flags += "not_converged;";
  if (!st.converged && !inner_ok) st.flags += "inner_not_converged;";
  if (prob.constraint.kind == ConstraintKind::holonomic &&
      !prob.constraint.degenerate_differential())
    st.flags += "nondegenerate_holonomic;";

  st.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return st;
}

}  // namespace supinf
