#ifndef TVFLOW_FLOW_HPP
#define TVFLOW_FLOW_HPP

#include <string>
#include <vector>

#include "tvflow/jko.hpp"

namespace tvflow {

/// Per-step record, one row of trajectory.csv.
struct FlowRecord {
  int k = 0;            // step index, 1-based
  double t = 0.0;       // k * tau
  double j = 0.0;       // J(rho_k)
  double penalty = 0.0; // eps sum f(rho_k) h^d
  double min = 0.0;
  double max = 0.0;
  double w2_step = 0.0;       // W2 distance of the step
  double residual_dev = 0.0;
  double dissipation = 0.0;   // sum rho_k |grad(div z_k)|^2 h^d
};

struct Trajectory {
  TorusGrid grid;
  JkoConfig cfg;
  double f0 = 0.0;  // flow energy of the datum
  int steps_completed = 0;
  bool completed = false;
  std::string error;

  std::vector<Density> snapshots;    // rho_0 .. rho_K
  std::vector<VectorField> certs;    // z_k,   k = 1..K
  std::vector<ScalarField> phis;     // phi_k, k = 1..K
  std::vector<FlowRecord> records;   // k = 1..K
};

/// Runs num_steps minimizing-movement steps with warm starts.  A step that
/// fails to converge or throws stops the flow; the partial trajectory is
/// returned with `completed == false` and the message in `error`.
Trajectory run_flow(const Density& rho0, const JkoConfig& cfg, int num_steps);

struct MetricDerivativeReport {
  double sum_tau_est_sq = 0.0;  // sum_k tau * (w2_k / tau)^2
  double half_sum = 0.0;        // sum_k w2_k^2 / (2 tau)
  double f0 = 0.0;
  double f_end = 0.0;
  bool half_pass = false;  // half_sum <= f0 - f_end + tol (by construction)
  bool pass = false;       // sum_tau_est_sq <= f0 - f_end + tol
};

/// Squared metric-derivative estimates against the total energy drop.
MetricDerivativeReport metric_derivative_estimate(const Trajectory& traj,
                                                  double tol = 1e-6);

struct EpsContinuationReport {
  std::vector<double> eps_levels;    // decreasing
  std::vector<double> pairwise_l2;   // max-over-time L2 between consecutive
                                     // levels' flows (size = levels - 1)
  std::vector<double> penalty_flux;  // per level: max_k eps sum rho f''(rho)
                                     // |grad rho| h^d
  bool distances_decreasing = false;
  bool flux_decreasing = false;
};

/// Runs the same flow at several penalty strengths and compares.
EpsContinuationReport eps_continuation(const Density& rho0, JkoConfig base,
                                       int num_steps,
                                       const std::vector<double>& eps_levels);

}  // namespace tvflow

#endif
