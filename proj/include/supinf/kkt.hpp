#pragma once

#include <span>
#include <utility>

#include "supinf/solver.hpp"

namespace supinf {

// Discretized absolutely-continuous Radon measure: one atom per
// quadrature point, weight (w_q/|Omega|)(density/norm)^{p-1}. Mass is
// bounded by 1 up to rounding.
struct DiscreteMeasure {
  std::vector<double> weights;
  double mass = 0.0;
};

DiscreteMeasure build_measure(std::span<const double> density, double norm_value, double p,
                              const Mesh& mesh);
// (sigma_p, tau_p) for a converged state.
std::pair<DiscreteMeasure, DiscreteMeasure> build_measures(const SolveState& st,
                                                           const Problem& prob);

// Power-scaled and normalized multipliers. Lambda + M + |Psi| = 1 by
// construction; R is the power-scaled normalizer lambda_hat + mu_hat +
// |psi_hat| (it can overflow double range at extreme p, log_R is always
// finite). Psi carries the sign convention of the first-order system
// written with the dual pairing on the right-hand side.
struct RescaledMultipliers {
  double Lambda = 1.0;
  double M = 0.0;
  double psi_sup = 0.0;
  ConstraintValue Psi;
  double R = 1.0;
  double log_R = 0.0;
};

// Exact rescaling of the stored norm-form multipliers to the power-scaled
// quantities; throws std::runtime_error when the triple vanishes.
RescaledMultipliers rescale(const RawMultipliers& raw, double F_p, double G_p, double p);

// Max over interior nodal hat test functions (a seeded subset of at least
// 32 when there are many) of the normalized first-order residual
//   |Lambda int f_P:Dphi dsigma + M int g_eta.phi dtau - <Psi, dQ(phi)>|
//     / (1 + ||phi||_{W1,inf}).
double kkt_residual_p(const SolveState& st, const Problem& prob, int max_basis = 64,
                      unsigned seed = 0);

// |mu (G_p(u_p) - G)| with the state's multiplier.
double slackness(const SolveState& st, double G);
// |M_inf (G_inf(u_inf) - G)| for the limit diagnostics.
double slackness_limit(double M_tail, double G_inf_last, double G);

// Step-2 differential identity for quadratic densities: the absolute gap
// between int f(.,Dv-Du) dsigma and
// int f(.,Dv) dsigma - int f(.,Du) dsigma + int f_P(.,Du):(Du-Dv) dsigma.
double quadratic_identity_gap(const Field& u, const Field& v, const DiscreteMeasure& sigma,
                              const DensityF& f, const Mesh& mesh);

// Step-5 relation: returns (int f(.,Du_p) dsigma_p, F_p(u_p)).
std::pair<double, double> energy_measure_identity(const SolveState& st, const Problem& prob,
                                                  const DiscreteMeasure& sigma);

}  // namespace supinf
