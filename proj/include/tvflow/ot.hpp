#ifndef TVFLOW_OT_HPP
#define TVFLOW_OT_HPP

#include <vector>

#include "tvflow/grid.hpp"

namespace tvflow {

enum class OtMethod { exact_1d, entropic, lp_oracle, exact_1d_cells };

/// Result of a squared-W2 computation between densities mu and nu on the
/// same grid.  Conventions:
///  * w2_squared is the plan cost with ground cost d_T(x,y)^2 (no 1/2);
///    the 1/2 of the scheme lives in the JKO objective.
///  * phi is the Kantorovich potential on nu's side for cost d_T^2/2,
///    zero-meaned, so the backward map nu -> mu is T = id - grad(phi) and
///    phi is the first variation of (1/2) W2^2(mu, .) at nu.
struct TransportResult {
  double w2_squared = 0.0;
  ScalarField phi;
  double marginal_error = 0.0;  // L1 marginal violation (0 for exact methods)
  OtMethod method = OtMethod::exact_1d;
};

/// Exact circle transport in 1D: monotone (quantile) coupling on the line
/// opened at the best of the n cut positions.  O(n^2).
TransportResult w2_exact_1d(const Density& mu, const Density& nu);

/// Exact circle transport in 1D with each cell's mass spread uniformly over
/// the cell instead of concentrated at its center.  Requires strictly
/// positive densities.  The monotone coupling cost is strictly convex in the
/// circular shift (its second derivative is 2 int Qa' Qb' > 0), so the
/// optimal shift, map and potential are unique and vary smoothly with the
/// densities; that smoothness is what iterative schemes differentiating
/// W2^2 need.  Values differ from w2_exact_1d by the O(h^2) quadrature gap
/// between the two cell interpretations.  O(n log n).
TransportResult w2_exact_1d_cells(const Density& mu, const Density& nu);

/// Dual potentials of the entropic solver, kept for warm starts.
struct SinkhornState {
  std::vector<double> f, g;          // potentials for the (mu, nu) problem
  std::vector<double> fmu, gmu;      // potentials for (mu, mu) when debiasing
  std::vector<double> fnu, gnu;      // potentials for (nu, nu)
  double eps = 0.0;                  // eps the potentials correspond to
};

struct EntropicConfig {
  double eps = 5e-4;        // target regularization
  double eps_start = 1e-2;  // continuation start (halved down to eps)
  double tol = 1e-9;        // L1 marginal error target
  int max_iters = 50000;    // per continuation level
  bool debias = true;       // Sinkhorn-divergence value
};

/// Log-domain Sinkhorn with eps continuation; in 2D the softmin passes use
/// the separability of the torus cost.  With debias on, w2_squared is the
/// Sinkhorn-divergence estimate (clamped at 0).
TransportResult w2_entropic(const Density& mu, const Density& nu,
                            const EntropicConfig& cfg = {},
                            SinkhornState* warm = nullptr);

/// Sparse optimal plan entry (used by the LP oracle).
struct PlanEntry {
  int i, j;
  double mass;
};

struct LpDetail {
  TransportResult result;
  std::vector<PlanEntry> plan;
  double duality_gap = 0.0;
  int pivots = 0;
};

/// Exact discrete OT by the transportation simplex.  Refuses grids with more
/// than 4096 cells (TooLarge).  Exposes the optimal plan and duals.
LpDetail w2_lp_detail(const Density& mu, const Density& nu);
TransportResult w2_lp_oracle(const Density& mu, const Density& nu);

/// Velocity field of the step: v = grad(phi)/tau, the forward velocity
/// matching the backward map T = id - grad(phi).
VectorField potential_gradient_velocity(const TransportResult& res,
                                        double tau);

/// c-transform of phi with cost d_T^2/2 restricted to the support of mu:
/// psi(x_i) = min_{j: nu_j > 0} [ d_T(x_i, x_j)^2 / 2 - phi(x_j) ].
/// Used by duality checks.
ScalarField c_transform(const ScalarField& phi, const Density& support_side);

/// Method selection for a JKO step's transport solve.  exact_1d and
/// exact_1d_cells only work on one-dimensional grids; entropic works in any
/// dimension; lp_oracle is for small cross-validation instances.
struct TransportSpec {
  OtMethod method = OtMethod::exact_1d;
  EntropicConfig entropic{};
};

/// exact_1d_cells on 1D grids, entropic otherwise.  The cell-uniform variant
/// is the 1D default because the atomic potential is set-valued at matching
/// ties, which breaks the convergence of outer loops that differentiate the
/// transport term.
TransportSpec default_transport(const TorusGrid& grid);

TransportResult solve_transport(const Density& mu, const Density& nu,
                                const TransportSpec& spec,
                                SinkhornState* warm = nullptr);

}  // namespace tvflow

#endif
