#include "supinf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace supinf::oracle {

namespace {

constexpr int kMaxComp = 4;

long double density_f(const Problem& prob, const double* x, const long double* P, int K) {
  const std::string& name = prob.f.name();
  if (name == "dirichlet") {
    long double s = 0.0L;
    for (int k = 0; k < K; ++k) s += P[k] * P[k];
    return s;
  }
  if (name == "weighted_dirichlet") {
    long double s = 0.0L;
    for (int k = 0; k < K; ++k) s += P[k] * P[k];
    return static_cast<long double>(coef_value(prob.f.coef_kind(), x)) * s;
  }
  if (name == "abs_grad") {
    long double s = 0.0L;
    for (int k = 0; k < K; ++k) s += P[k] * P[k];
    return sqrtl(s);
  }
  if (name == "tensor") {
    const auto& A = prob.f.tensor();
    long double s = 0.0L;
    for (int i = 0; i < K; ++i) {
      long double r = 0.0L;
      for (int j = 0; j < K; ++j) r += A[i * K + j] * P[j];
      s += P[i] * r;
    }
    return s;
  }
  throw std::logic_error("oracle: unknown f density " + name);
}

long double density_g(const Problem& prob, const long double* eta, int N) {
  const std::string& name = prob.g.name();
  if (name == "abs") {
    long double s = 0.0L;
    for (int c = 0; c < N; ++c) s += eta[c] * eta[c];
    return sqrtl(s);
  }
  if (name == "quad") {
    long double s = 0.0L;
    for (int c = 0; c < N; ++c) s += eta[c] * eta[c];
    return s;
  }
  if (name == "const") return prob.g.constant_value();
  throw std::logic_error("oracle: unknown g density " + name);
}


// Independent evaluation of one candidate: nodal values from the packed
// interior vector, midpoint samples by plain loops. raw_viol measures the
// pi-relaxed constraints by their arguments (the actual distance to the
// feasible set), not the squared residual: rejection at 1e-6 on the
// squared values would admit a sqrt(1e-6)-deep violation and bias the
// certified optimum.
struct Evaluation {
  long double F = 0.0L;
  long double Gp = 0.0L;
  long double raw_viol = 0.0L;
};

struct Workspace {
  std::vector<double> nodal;  // node-major, boundary zero
  std::vector<int> interior;

  void init(const Problem& prob) {
    nodal.assign(static_cast<std::size_t>(prob.mesh.node_count()) * prob.components, 0.0);
    interior = interior_nodes(prob.mesh);
  }
  void load(const Problem& prob, std::span<const double> x) {
    const int N = prob.components;
    std::size_t k = 0;
    for (int node : interior)
      for (int c = 0; c < N; ++c) nodal[static_cast<std::size_t>(node) * N + c] = x[k++];
  }
};

Evaluation evaluate(const Problem& prob, double p, const Workspace& w) {
  const Mesh& mesh = prob.mesh;
  const int N = prob.components;
  const int dim = mesh.dim;
  const int nq = mesh.quad_count();
  const int nx = mesh.nodes_x();

  long double sumF = 0.0L, sumG = 0.0L;
  long double h_int = 0.0L;
  long double q_acc = 0.0L;
  const long double wq = mesh.cell_volume();

  long double uq[kMaxComp], Pq[kMaxComp * 2];
  for (int q = 0; q < nq; ++q) {
    if (dim == 1) {
      const double* a = &w.nodal[static_cast<std::size_t>(q) * N];
      const double* b = &w.nodal[static_cast<std::size_t>(q + 1) * N];
      for (int c = 0; c < N; ++c) {
        uq[c] = 0.5L * (static_cast<long double>(a[c]) + b[c]);
        Pq[c] = (static_cast<long double>(b[c]) - a[c]) / mesh.h[0];
      }
    } else {
      const auto cc = mesh.cell_coords(q);
      const int n00 = mesh.node_of(cc[0], cc[1]);
      const double* v00 = &w.nodal[static_cast<std::size_t>(n00) * N];
      const double* v10 = &w.nodal[static_cast<std::size_t>(n00 + 1) * N];
      const double* v01 = &w.nodal[static_cast<std::size_t>(n00 + nx) * N];
      const double* v11 = &w.nodal[static_cast<std::size_t>(n00 + nx + 1) * N];
      for (int c = 0; c < N; ++c) {
        uq[c] = 0.25L * (static_cast<long double>(v00[c]) + v10[c] + v01[c] + v11[c]);
        Pq[2 * c] = (static_cast<long double>(v10[c]) + v11[c] - v00[c] - v01[c]) /
                    (2.0L * mesh.h[0]);
        Pq[2 * c + 1] = (static_cast<long double>(v01[c]) + v11[c] - v00[c] - v10[c]) /
                        (2.0L * mesh.h[1]);
      }
    }
    const auto x = mesh.quad_point(q);
    sumF += powl(density_f(prob, x.data(), Pq, N * dim), p);
    sumG += powl(density_g(prob, uq, N), p);

    switch (prob.constraint.kind) {
      case ConstraintKind::none:
      case ConstraintKind::isoperimetric:
      case ConstraintKind::isoperimetric_eq:
        break;
      case ConstraintKind::holonomic: {
        long double v = 0.0L;
        const ConstraintSpec& cs = prob.constraint;
        if (cs.pi == PiFn::comp0_sq) v = uq[0] * uq[0];
        else if (cs.pi == PiFn::comp_diff) v = uq[0] - uq[1];
        else if (cs.pi == PiFn::comp0_minus_c) v = uq[0] - cs.c;
        else if (cs.pi == PiFn::c_minus_comp0) v = cs.c - uq[0];
        else {
          long double s = 0.0L;
          for (int c = 0; c < N; ++c) s += uq[c] * uq[c];
          v = s - cs.c;
        }
        q_acc = std::max(q_acc, fabsl(v));
        break;
      }
      case ConstraintKind::unilateral: {
        long double v = 0.0L;
        const ConstraintSpec& cs = prob.constraint;
        if (cs.pi == PiFn::comp0_minus_c) v = uq[0] - cs.c;
        else if (cs.pi == PiFn::c_minus_comp0) v = cs.c - uq[0];
        else if (cs.pi == PiFn::comp0_sq) v = uq[0] * uq[0];
        else if (cs.pi == PiFn::comp_diff) v = uq[0] - uq[1];
        else {
          long double s = 0.0L;
          for (int c = 0; c < N; ++c) s += uq[c] * uq[c];
          v = s - cs.c;
        }
        if (v > q_acc) q_acc = v;
        break;
      }
      case ConstraintKind::inclusion_ball: {
        long double s = 0.0L;
        for (int c = 0; c < N; ++c) s += uq[c] * uq[c];
        const long double v = sqrtl(s) - prob.constraint.radius;
        if (v > q_acc) q_acc = v;
        break;
      }
      case ConstraintKind::inclusion_box: {
        for (int c = 0; c < N; ++c) {
          const long double vh = uq[c] - prob.constraint.box_hi[c];
          const long double vl = prob.constraint.box_lo[c] - uq[c];
          if (vh > q_acc) q_acc = vh;
          if (vl > q_acc) q_acc = vl;
        }
        break;
      }
    }

    if (prob.constraint.kind == ConstraintKind::isoperimetric ||
        prob.constraint.kind == ConstraintKind::isoperimetric_eq) {
      const ConstraintSpec& cs = prob.constraint;
      long double hv = 0.0L;
      if (cs.h == HFn::neg_component_0) hv = -uq[0];
      else if (cs.h == HFn::mass) hv = uq[0];
      else {
        for (int k = 0; k < N * dim; ++k) hv += Pq[k] * Pq[k];
      }
      h_int += wq * hv;
    }
  }

  Evaluation ev;
  ev.F = powl(sumF / nq, 1.0L / p);
  ev.Gp = powl(sumG / nq, 1.0L / p);
  if (prob.constraint.kind == ConstraintKind::isoperimetric)
    ev.raw_viol = std::max<long double>(0.0L, h_int - prob.constraint.H);
  else if (prob.constraint.kind == ConstraintKind::isoperimetric_eq)
    ev.raw_viol = fabsl(h_int - prob.constraint.H);
  else
    ev.raw_viol = std::max<long double>(0.0L, q_acc);
  return ev;
}

}  // namespace

double lp_norm(std::span<const double> density, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("oracle::lp_norm: p >= 1 required");
  long double acc = 0.0L;
  for (double d : density) acc += powl(d, p);
  return static_cast<double>(powl(acc / density.size(), 1.0L / p));
}

double linf_norm(std::span<const double> density) {
  long double m = 0.0L;
  for (double d : density) m = std::max<long double>(m, d);
  return static_cast<double>(m);
}

ParabolaLp parabola_lp(double p, int panels) {
  ParabolaLp out;
  out.closed_form = std::pow(2.0 * p + 1.0, -1.0 / p);
  // Simpson on |1-2x|^{2p} over (0,1)
  const long double h = 1.0L / panels;
  long double acc = 0.0L;
  auto f = [p](long double x) { return powl(fabsl(1.0L - 2.0L * x), 2.0L * p); };
  for (int i = 0; i < panels; ++i) {
    const long double a = i * h;
    acc += h / 6.0L * (f(a) + 4.0L * f(a + 0.5L * h) + f(a + h));
  }
  out.fine_quadrature = static_cast<double>(powl(acc, 1.0L / static_cast<long double>(p)));
  return out;
}

double iso_slope(double V, double G) {
  if (V < 0.0) throw std::invalid_argument("iso_slope: V must be nonnegative");
  if (!(V < G))
    throw InfeasibleError("iso_slope: V >= G is incompatible (the integral of u is at most G)");
  if (V == 0.0) return 0.0;
  const double s_triangle = 4.0 * V;
  if (s_triangle / 2.0 <= G) return s_triangle;
  return G * G / (G - V);
}

double iso_slope_area_residual(double V, double G) {
  const double s = iso_slope(V, G);
  if (s == 0.0) return V;
  if (s / 2.0 <= G) return std::fabs(s / 4.0 - V);  // triangle area
  return std::fabs((G - G * G / s) - V);            // trapezoid area
}

std::vector<double> iso_profile_nodal(double V, double G, const Mesh& mesh1d) {
  if (mesh1d.dim != 1) throw std::invalid_argument("iso_profile_nodal: 1d mesh required");
  const double s = iso_slope(V, G);
  const double height = std::min(s / 2.0, G);
  std::vector<double> u(mesh1d.node_count(), 0.0);
  for (int i = 0; i < mesh1d.node_count(); ++i) {
    const double x = mesh1d.lo[0] + i * mesh1d.h[0];
    const double L = mesh1d.hi[0] - mesh1d.lo[0];
    const double t = (x - mesh1d.lo[0]) / L;
    u[i] = std::min({s * t, s * (1.0 - t), height});
  }
  return u;
}

double p2_value(double V) { return 2.0 * std::sqrt(3.0) * std::fabs(V); }

std::vector<double> p2_profile_nodal(double V, const Mesh& mesh1d) {
  if (mesh1d.dim != 1) throw std::invalid_argument("p2_profile_nodal: 1d mesh required");
  std::vector<double> u(mesh1d.node_count(), 0.0);
  for (int i = 0; i < mesh1d.node_count(); ++i) {
    const double t = static_cast<double>(i) / mesh1d.cells[0];
    u[i] = 6.0 * V * t * (1.0 - t);
  }
  return u;
}

namespace {

// quadratic-penalty merit for the simplex polish
double penalized_value(const Problem& prob, double p, Workspace& w,
                       std::span<const double> x, double weight) {
  w.load(prob, x);
  const Evaluation ev = evaluate(prob, p, w);
  const long double hinge = std::max<long double>(0.0L, ev.Gp - prob.G);
  return static_cast<double>(ev.F + weight * (ev.raw_viol * ev.raw_viol + hinge * hinge));
}

// Deterministic Nelder-Mead (standard reflection/expansion/contraction
// coefficients); returns the best vertex once the simplex diameter or the
// value spread collapses.
std::vector<double> nelder_mead(const std::function<double(std::span<const double>)>& fn,
                                std::vector<double> x0, double init_step, int max_iter) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> vx(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i < n; ++i) vx[i + 1][i] += init_step;
  for (std::size_t i = 0; i <= n; ++i) fv[i] = fn(vx[i]);

  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  for (int it = 0; it < max_iter; ++it) {
    // order vertices (stable: ties keep insertion order)
    std::vector<std::size_t> idx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&fv](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    {
      std::vector<std::vector<double>> vx2(n + 1);
      std::vector<double> fv2(n + 1);
      for (std::size_t i = 0; i <= n; ++i) {
        vx2[i] = vx[idx[i]];
        fv2[i] = fv[idx[i]];
      }
      vx.swap(vx2);
      fv.swap(fv2);
    }

    double diam = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        diam = std::max(diam, std::fabs(vx[i][k] - vx[0][k]));
    if (diam < 1e-10 && std::fabs(fv[n] - fv[0]) < 1e-13 * (1.0 + std::fabs(fv[0]))) break;

    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += vx[i][k];
      centroid[k] = s / n;
    }
    for (std::size_t k = 0; k < n; ++k) xr[k] = centroid[k] + (centroid[k] - vx[n][k]);
    const double fr = fn(xr);
    if (fr < fv[0]) {
      for (std::size_t k = 0; k < n; ++k) xe[k] = centroid[k] + 2.0 * (centroid[k] - vx[n][k]);
      const double fe = fn(xe);
      if (fe < fr) {
        vx[n] = xe;
        fv[n] = fe;
      } else {
        vx[n] = xr;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      vx[n] = xr;
      fv[n] = fr;
    } else {
      const bool outside = fr < fv[n];
      for (std::size_t k = 0; k < n; ++k)
        xc[k] = outside ? centroid[k] + 0.5 * (xr[k] - centroid[k])
                        : centroid[k] - 0.5 * (centroid[k] - vx[n][k]);
      const double fc = fn(xc);
      if (fc < std::min(fr, fv[n])) {
        vx[n] = xc;
        fv[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t k = 0; k < n; ++k) vx[i][k] = vx[0][k] + 0.5 * (vx[i][k] - vx[0][k]);
          fv[i] = fn(vx[i]);
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (fv[i] < fv[best]) best = i;
  return vx[best];
}

}  // namespace

double objective_at(const Problem& prob, double p, std::span<const double> interior) {
  Workspace w;
  w.init(prob);
  w.load(prob, interior);
  return static_cast<double>(evaluate(prob, p, w).F);
}

bool feasible_at(const Problem& prob, double p, std::span<const double> interior,
                 double feas_tol) {
  Workspace w;
  w.init(prob);
  w.load(prob, interior);
  const Evaluation ev = evaluate(prob, p, w);
  return ev.raw_viol <= feas_tol && ev.Gp <= prob.G + feas_tol;
}

BruteForceResult brute_force(const Problem& prob, double p, const BruteForceConfig& cfg) {
  Workspace w;
  w.init(prob);
  const int N = prob.components;
  const int ndof = static_cast<int>(w.interior.size()) * N;

  // exact elimination of the last dof for the linear equality constraint
  const bool linear_eq =
      prob.constraint.kind == ConstraintKind::isoperimetric_eq &&
      (prob.constraint.h == HFn::mass || prob.constraint.h == HFn::neg_component_0) &&
      N == 1 && prob.mesh.dim == 1;
  const int nfree = linear_eq ? ndof - 1 : ndof;
  if (nfree < 0) throw std::invalid_argument("brute_force: no free dofs");

  double total = 1.0;
  for (int i = 0; i < nfree; ++i) total *= cfg.values_per_node;
  if (total > static_cast<double>(cfg.max_points))
    throw std::invalid_argument("brute_force: search space exceeds the point budget");

  const double delta =
      cfg.values_per_node > 1 ? (cfg.hi - cfg.lo) / (cfg.values_per_node - 1) : 0.0;
  const double h = prob.mesh.h[0];
  // integral of u = h * sum(interior) for P1 zero-trace fields in 1d
  const double eq_target = prob.constraint.h == HFn::mass ? prob.constraint.H / h
                                                          : -prob.constraint.H / h;

  std::vector<double> x(ndof, 0.0);
  std::vector<int> idx(nfree, 0);

  BruteForceResult best;
  best.value = std::numeric_limits<double>::infinity();

  auto consider = [&](const std::vector<double>& cand) {
    ++best.evaluated;
    if (!feasible_at(prob, p, cand, cfg.feas_tol)) return;
    const double v = objective_at(prob, p, cand);
    if (v < best.value - 1e-15 ||
        (std::fabs(v - best.value) <= 1e-15 &&
         std::lexicographical_compare(cand.begin(), cand.end(), best.interior.begin(),
                                      best.interior.end()))) {
      best.value = v;
      best.interior = cand;
      best.feasible_found = true;
    }
  };

  bool carry = false;
  while (!carry) {
    double sum = 0.0;
    for (int i = 0; i < nfree; ++i) {
      x[i] = cfg.lo + idx[i] * delta;
      sum += x[i];
    }
    bool usable = true;
    if (linear_eq) {
      const double last = eq_target - sum;
      if (last < cfg.lo - 1e-12 || last > cfg.hi + 1e-12) usable = false;
      x[ndof - 1] = last;
    }
    if (usable) consider(x);

    int d = 0;
    for (; d < nfree; ++d) {
      if (++idx[d] < cfg.values_per_node) break;
      idx[d] = 0;
    }
    carry = d == nfree || nfree == 0;
    if (nfree == 0) {
      consider(x);
      break;
    }
  }

  if (!best.feasible_found || !cfg.polish) return best;

  // Deterministic pattern-search refinement from the grid optimum. The
  // move set contains single-coordinate steps plus all pairwise exchange
  // moves (+step on one dof, -step on another): the exchanges stay on
  // active mass-type constraint surfaces, where single-coordinate moves
  // are always rejected.
  std::vector<double> cur = best.interior;
  auto try_move = [&](std::vector<double> cand) {
    if (linear_eq) {
      double sum = 0.0;
      for (int j = 0; j < nfree; ++j) sum += cand[j];
      cand[ndof - 1] = eq_target - sum;
    }
    ++best.evaluated;
    if (!feasible_at(prob, p, cand, cfg.feas_tol)) return false;
    const double v = objective_at(prob, p, cand);
    if (v < best.value - 1e-14) {
      best.value = v;
      best.interior = cand;
      cur = cand;
      return true;
    }
    return false;
  };
  double step = std::max(delta, 1e-3);
  while (step > 1e-8) {
    bool improved = false;
    for (int i = 0; i < nfree; ++i)
      for (double sgn : {1.0, -1.0}) {
        std::vector<double> cand = cur;
        cand[i] += sgn * step;
        improved |= try_move(std::move(cand));
      }
    for (int i = 0; i < nfree; ++i)
      for (int j = 0; j < nfree; ++j) {
        if (i == j) continue;
        std::vector<double> cand = cur;
        cand[i] += step;
        cand[j] -= step;
        improved |= try_move(std::move(cand));
      }
    if (!improved) step *= 0.5;
  }

  // Pattern moves cannot follow two curved active surfaces at once (a
  // binding sublevel cap on top of an active integral constraint), so
  // finish with a simplex search on the quadratic-penalty merit,
  // continued over increasing weights; the full vector (including any
  // eliminated dof) is re-optimized here.
  {
    Workspace w;
    w.init(prob);
    std::vector<double> cand = best.interior;
    double init_step = std::max(0.25 * delta, 1e-4);
    for (double weight : {1e4, 1e7, 1e10}) {
      auto fn = [&](std::span<const double> x) {
        ++best.evaluated;
        return penalized_value(prob, p, w, x, weight);
      };
      cand = nelder_mead(fn, cand, init_step, 6000);
      init_step = 1e-5;
    }
    ++best.evaluated;
    if (feasible_at(prob, p, cand, cfg.feas_tol)) {
      const double v = objective_at(prob, p, cand);
      if (v < best.value - 1e-14) {
        best.value = v;
        best.interior = cand;
      }
    }
  }
  return best;
}

double fd_check(const std::function<double(const Field&)>& functional,
                const Field& analytic_grad, const Field& at, const Mesh& mesh, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_check: step must be positive");
  double gmax = 0.0;
  for (int node = 0; node < mesh.node_count(); ++node) {
    if (mesh.is_boundary_node(node)) continue;
    for (int c = 0; c < analytic_grad.components; ++c)
      gmax = std::max(gmax, std::fabs(analytic_grad.at(node, c)));
  }
  const double denom = std::max(gmax, 1e-12);

  Field work = at;
  double err = 0.0;
  for (int node = 0; node < mesh.node_count(); ++node) {
    if (mesh.is_boundary_node(node)) continue;
    for (int c = 0; c < at.components; ++c) {
      const double orig = work.at(node, c);
      work.at(node, c) = orig + step;
      const double fp = functional(work);
      work.at(node, c) = orig - step;
      const double fm = functional(work);
      work.at(node, c) = orig;
      const double gfd = (fp - fm) / (2.0 * step);
      err = std::max(err, std::fabs(gfd - analytic_grad.at(node, c)) / denom);
    }
  }
  return err;
}

}  // namespace supinf::oracle
