#include "tvflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tvflow {

Trajectory run_flow(const Density& rho0, const JkoConfig& cfg,
                    int num_steps) {
  if (num_steps < 1) throw ValidationError("steps must be >= 1");
  Trajectory traj;
  traj.grid = rho0.grid();
  traj.cfg = cfg;
  traj.f0 = flow_energy(rho0, cfg.barrier);
  traj.snapshots.push_back(rho0);

  JkoWarm warm;
  for (int k = 1; k <= num_steps; ++k) {
    JkoStepResult step;
    try {
      step = jko_step(traj.snapshots.back(), cfg, &warm);
    } catch (const Error& e) {
      traj.error = std::string(e.kind()) + ": " + e.what();
      return traj;
    }
    if (!step.converged) {
      traj.error = "step " + std::to_string(k) +
                   " did not converge (residual_dev = " +
                   std::to_string(step.residual_dev) + ")";
      return traj;
    }

    FlowRecord rec;
    rec.k = k;
    rec.t = k * cfg.tau;
    rec.j = step.j_value;
    rec.penalty = step.penalty_value;
    MinMax mm = minmax(step.rho_next);
    rec.min = mm.min;
    rec.max = mm.max;
    rec.w2_step = std::sqrt(std::max(0.0, step.w2_squared));
    rec.residual_dev = step.residual_dev;
    // dissipation integrand of the TV flow: sum rho |grad(div z)|^2 h^dim
    VectorField gdz = grad(div(step.z));
    const TorusGrid& g = traj.grid;
    double dint = 0.0;
    for (std::size_t i = 0; i < g.cells(); ++i) {
      double m2 = 0.0;
      for (int a = 0; a < g.dim; ++a) m2 += gdz[a][i] * gdz[a][i];
      dint += step.rho_next[i] * m2;
    }
    rec.dissipation = dint * g.cell_volume();

    traj.snapshots.push_back(step.rho_next);
    traj.certs.push_back(step.z);
    traj.phis.push_back(step.phi);
    traj.records.push_back(rec);
    traj.steps_completed = k;

    warm.z = step.z;
    warm.has_z = true;
  }
  traj.completed = true;
  return traj;
}

MetricDerivativeReport metric_derivative_estimate(const Trajectory& traj,
                                                  double tol) {
  MetricDerivativeReport rep;
  rep.f0 = traj.f0;
  double tau = traj.cfg.tau;
  for (const FlowRecord& rec : traj.records) {
    double w2sq = rec.w2_step * rec.w2_step;
    rep.sum_tau_est_sq += w2sq / tau;
    rep.half_sum += w2sq / (2.0 * tau);
  }
  if (traj.records.empty())
    rep.f_end = traj.f0;
  else
    rep.f_end = traj.records.back().j + traj.records.back().penalty;
  double drop = rep.f0 - rep.f_end;
  rep.half_pass = rep.half_sum <= drop + tol;
  rep.pass = rep.sum_tau_est_sq <= drop + tol;
  return rep;
}

EpsContinuationReport eps_continuation(const Density& rho0, JkoConfig base,
                                       int num_steps,
                                       const std::vector<double>& eps_levels) {
  if (eps_levels.size() < 2)
    throw ValidationError("eps_continuation needs at least two levels");
  for (std::size_t i = 1; i < eps_levels.size(); ++i)
    if (!(eps_levels[i] < eps_levels[i - 1]))
      throw ValidationError("eps levels must be strictly decreasing");

  EpsContinuationReport rep;
  rep.eps_levels = eps_levels;
  std::vector<Trajectory> runs;
  for (double eps : eps_levels) {
    base.barrier.eps = eps;
    Trajectory t = run_flow(rho0, base, num_steps);
    if (!t.completed)
      throw NoConvergence("eps_continuation: flow at eps = " +
                              std::to_string(eps) + " stopped early",
                          t.error);
    runs.push_back(std::move(t));
  }

  const double vol = rho0.grid().cell_volume();
  for (const Trajectory& t : runs) {
    double worst = 0.0;
    for (std::size_t k = 1; k < t.snapshots.size(); ++k) {
      const Density& rho = t.snapshots[k];
      VectorField g = grad(rho.field());
      double flux = 0.0;
      for (std::size_t i = 0; i < rho.size(); ++i) {
        double m = std::fabs(g.comp[0][i]);
        if (rho.grid().dim == 2) m = std::hypot(m, g.comp[1][i]);
        flux += rho[i] * t.cfg.barrier.fpp(rho[i]) * m;
      }
      worst = std::max(worst, t.cfg.barrier.eps * flux * vol);
    }
    rep.penalty_flux.push_back(worst);
  }

  for (std::size_t l = 1; l < runs.size(); ++l) {
    double worst = 0.0;
    std::size_t common =
        std::min(runs[l - 1].snapshots.size(), runs[l].snapshots.size());
    for (std::size_t k = 0; k < common; ++k) {
      const Density& a = runs[l - 1].snapshots[k];
      const Density& b = runs[l].snapshots[k];
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - b[i]) * (a[i] - b[i]);
      worst = std::max(worst, std::sqrt(s * vol));
    }
    rep.pairwise_l2.push_back(worst);
  }

  rep.distances_decreasing = true;
  for (std::size_t i = 1; i < rep.pairwise_l2.size(); ++i)
    if (rep.pairwise_l2[i] > rep.pairwise_l2[i - 1])
      rep.distances_decreasing = false;
  rep.flux_decreasing = true;
  for (std::size_t i = 1; i < rep.penalty_flux.size(); ++i)
    if (rep.penalty_flux[i] > rep.penalty_flux[i - 1])
      rep.flux_decreasing = false;
  return rep;
}

}  // namespace tvflow
