#ifndef TVFLOW_JKO_HPP
#define TVFLOW_JKO_HPP

#include "tvflow/grid.hpp"
#include "tvflow/ot.hpp"
#include "tvflow/rof.hpp"
#include "tvflow/tv.hpp"

namespace tvflow {

/// Interior penalty eps * sum f(rho_i) h^d with f(s) = 1/(s - c) on s > c.
/// eps == 0 disables the barrier (plain nonnegativity).
struct PenaltyBarrier {
  double eps = 0.0;
  double c = 0.0;

  double f(double s) const;    // 1/(s-c), +inf at s <= c
  double fp(double s) const;   // -1/(s-c)^2
  double fpp(double s) const;  // 2/(s-c)^3

  /// eps * sum f(rho_i) h^dim; +inf if any cell violates the barrier.
  double value(const Density& rho) const;
};

struct JkoConfig {
  double tau = 1e-2;
  PenaltyBarrier barrier{};
  TransportSpec transport{};

  // outer loop: proximal gradient on the transport term with an adaptive
  // step (grows on accepted candidates, halves on rejected ones)
  int max_outer = 400;
  double sigma0 = 0.0;         // 0 -> tau
  double sigma_grow = 1.5;     // growth factor after an accepted candidate
  double sigma_cap_over_tau = 1e4;
  int max_backtracks = 40;     // consecutive rejections before giving up
  // stop when residual_dev <= residual_tol * (1 + ||div z||_2)
  double residual_tol = 1e-5;

  // inner TV-prox solve
  double inner_gap_tol = 1e-11;
  double inner_kkt_tol = 1e-9;
  int inner_max_iters = 20000;
};

/// Cross-call state: TV dual, Sinkhorn potentials and the accepted outer
/// step size survive between steps.
struct JkoWarm {
  VectorField z;
  bool has_z = false;
  double sigma = 0.0;  // last accepted outer step, 0 when unset
  SinkhornState sink{};
};

struct JkoStepResult {
  Density rho_next;
  VectorField z;    // TV certificate at rho_next
  ScalarField phi;  // transport potential on rho_next's side, zero-meaned
  double w2_squared = 0.0;
  double objective = 0.0;        // w2/(2 tau) + J + penalty at rho_next
  double j_value = 0.0;          // J(rho_next)
  double penalty_value = 0.0;    // eps sum f(rho_next) h^d
  double energy_decrease = 0.0;  // F(prev) - [F(next) + w2/(2 tau)]
  double residual_dev = 0.0;     // stddev of phi/tau - div z + eps f'(rho)
  double el_constant = 0.0;      // mean of that field
  double cert_gap = 0.0;         // J(rho_next) + <rho_next, div z>
  int outer_iters = 0;
  int inner_iters_total = 0;
  bool converged = false;
};

/// One minimizing-movement step from rho_prev.  Throws BarrierViolation when
/// the barrier is active and rho_prev touches the bound c.
JkoStepResult jko_step(const Density& rho_prev, const JkoConfig& cfg,
                       JkoWarm* warm = nullptr);

/// F(rho) = J(rho) + eps sum f(rho) h^d, the driving energy.
double flow_energy(const Density& rho, const PenaltyBarrier& barrier);

struct MaximumPrincipleReport {
  double min_prev = 0.0, max_prev = 0.0;
  double min_next = 0.0, max_next = 0.0;
  double tol = 0.0;
  bool pass = false;
};

/// min rho_next >= min rho_prev - tol, max rho_next <= max rho_prev + tol
/// with tol = rel * (1 + max rho_prev).
MaximumPrincipleReport maximum_principle_check(const Density& prev,
                                               const Density& next,
                                               double rel = 1e-8);

struct RegularityEstimates {
  // rhs = || grad(eps f'(rho) - div z) ||_2, the Euler-Lagrange gradient
  double rhs = 0.0;
  EstimateCheck penalty_gradient;   // ||grad(eps f'(rho))||_2 <= rhs
  EstimateCheck curvature;          // ||grad(div z)||_2 <= rhs
  EstimateCheck density_gradient;   // ||grad rho||_2 <= rhs/(eps min f'')
  bool barrier_active = false;      // penalty_gradient/density_gradient only
  bool pass = false;                // all applicable checks
};

/// A-posteriori bounds extracted from one converged step.
RegularityEstimates step_regularity_estimates(const JkoStepResult& step,
                                              const PenaltyBarrier& barrier,
                                              double rel_slack = 1e-3);

}  // namespace tvflow

#endif
