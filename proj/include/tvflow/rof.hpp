#ifndef TVFLOW_ROF_HPP
#define TVFLOW_ROF_HPP

#include <vector>

#include "tvflow/grid.hpp"
#include "tvflow/tv.hpp"

namespace tvflow {

/// Solver parameters for
///   min_u J(u) + (fidelity/2) * sum_i (u_i - g_i)^2 h^dim.
struct RofConfig {
  double gap_tol = 1e-10;       // stop when primal-dual gap <= gap_tol
  int max_iters = 400000;       // hard cap, throws NoConvergence beyond
  double fidelity = 1.0;        // weight of the quadratic data term
  int check_every = 25;         // gap evaluation cadence
  int restart_every = 2000;     // acceleration restart cadence; the plain
                                // schedule decays the gap like 1/N^2, with
                                // restarts it contracts per segment
};

struct RofSolution {
  ScalarField u;
  VectorField z;          // dual certificate, |z(i)| <= 1
  double gap = 0.0;       // final primal-dual gap
  double el_residual = 0.0;  // sup_i |fidelity*(u - g) - div z|
  double j_value = 0.0;   // J(u)
  double fidelity = 1.0;  // weight the solve used (div z = fidelity*(u - g))
  int iters = 0;
};

/// Accelerated primal-dual solve (strongly convex data term).  The returned
/// z is admissible by construction; the certificate gap of (u, z) is bounded
/// by the primal-dual gap.
RofSolution rof_solve(const ScalarField& g, const RofConfig& cfg = {});
RofSolution rof_solve(const Density& g, const RofConfig& cfg = {});

/// Exact minimizer of the 1D (circular) discrete ROF objective by the taut
/// string construction.  The interval taut string is run once per cut
/// position and wall sign with the cut edge's dual pinned there, plus the
/// constant candidate; the best circular objective among these candidates is
/// the exact optimum.  O(n^2) total.  2D input throws DimensionError.
ScalarField taut_string_1d(const ScalarField& g, double fidelity = 1.0);

/// Taut string through the tube lo_k <= R_k <= hi_k, k = 0..m, with both
/// endpoints pinned (lo = hi there).  Exposed for direct testing.
std::vector<double> taut_string_tube(const std::vector<double>& lo,
                                     const std::vector<double>& hi);

/// Value of the discrete ROF objective (used by tests and the cut scan).
double rof_objective(const ScalarField& u, const ScalarField& g,
                     double fidelity);

struct EstimateCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// Gradient contraction of the denoiser: ||grad u||_2 <= ||grad g||_2,
/// checked with relative slack 1e-6 plus absolute 1e-9.
EstimateCheck rof_h1_estimate(const RofSolution& sol, const ScalarField& g);

/// Smoothness transfer to the certificate: since div z = fidelity*(u - g)
/// and the residual map contracts gradients, ||grad div z||_2 <=
/// fidelity * ||grad g||_2, checked with relative slack 1e-4 plus absolute
/// 1e-6.  Requires a solve with gap below 1e-8.
EstimateCheck rof_div_estimate(const RofSolution& sol, const ScalarField& g);

}  // namespace tvflow

#endif
