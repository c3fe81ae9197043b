#include "tvflow/jko.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

namespace tvflow {

double PenaltyBarrier::f(double s) const {
  if (s <= c) return std::numeric_limits<double>::infinity();
  return 1.0 / (s - c);
}

double PenaltyBarrier::fp(double s) const {
  double d = s - c;
  return -1.0 / (d * d);
}

double PenaltyBarrier::fpp(double s) const {
  double d = s - c;
  return 2.0 / (d * d * d);
}

double PenaltyBarrier::value(const Density& rho) const {
  if (eps <= 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho[i] <= c) return std::numeric_limits<double>::infinity();
    sum += 1.0 / (rho[i] - c);
  }
  return eps * sum * rho.grid().cell_volume();
}

double flow_energy(const Density& rho, const PenaltyBarrier& barrier) {
  return total_variation(rho) + barrier.value(rho);
}

namespace {

void project_cell_ball(VectorField& z) {
  const TorusGrid& g = z.grid;
  if (g.dim == 1) {
    for (double& x : z.comp[0]) x = std::clamp(x, -1.0, 1.0);
    return;
  }
  for (std::size_t i = 0; i < g.cells(); ++i) {
    double m = std::hypot(z.comp[0][i], z.comp[1][i]);
    if (m > 1.0) {
      z.comp[0][i] /= m;
      z.comp[1][i] /= m;
    }
  }
}

// Root of -A/(s-c)^2 + q s - b = 0 on (c, inf); strictly increasing there.
double barrier_cell_root(double A, double c, double q, double b, double s0) {
  auto val = [&](double s) {
    double d = s - c;
    return q * s - b - A / (d * d);
  };
  double lo = c;
  double hi = std::max(c, b / q) + 1.0;
  while (val(hi) < 0.0) hi = c + 2.0 * (hi - c);
  double s = (s0 > lo && s0 < hi) ? s0 : 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    double d = s - c;
    double gs = q * s - b - A / (d * d);
    if (gs > 0.0)
      hi = s;
    else
      lo = s;
    double gp = q + 2.0 * A / (d * d * d);
    double sn = s - gs / gp;
    if (!(sn > lo && sn < hi)) sn = 0.5 * (lo + hi);
    if (std::fabs(sn - s) <= 1e-16 * (1.0 + std::fabs(sn))) return sn;
    s = sn;
  }
  return s;
}

// Cellwise proximal subproblem of the inner solve at multiplier mu:
//   eps*sp*f'(s) + q*s - (b0_i - sp*mu) = 0   (or clamp at 0 when eps == 0).
// eval() refreshes s in place (warm across mu trials) and returns mass - 1.
struct ProxCells {
  const std::vector<double>* b0;
  std::vector<double>* s;
  double q, A, c, sp, vol;

  double eval(double mu) const {
    double m = 0.0;
    const std::size_t N = b0->size();
    for (std::size_t i = 0; i < N; ++i) {
      double b = (*b0)[i] - sp * mu;
      double si = A > 0.0 ? barrier_cell_root(A, c, q, b, (*s)[i])
                          : std::max(0.0, b / q);
      (*s)[i] = si;
      m += si;
    }
    return m * vol - 1.0;
  }

  double deriv() const {
    double d = 0.0;
    for (double si : *s) {
      if (A > 0.0) {
        double e = si - c;
        d -= sp / (q + 2.0 * A / (e * e * e));
      } else if (si > 0.0) {
        d -= sp / q;
      }
    }
    return d * vol;
  }
};

// Scalar solve for the mass multiplier; mass(mu) is strictly decreasing.
double solve_mass_multiplier(const ProxCells& pc, double mu0) {
  double mu = mu0;
  double M = pc.eval(mu);
  if (std::fabs(M) <= 1e-14) return mu;
  double lo, hi, step = 1.0 + std::fabs(mu);
  if (M > 0.0) {
    lo = mu;
    hi = mu + step;
    while (pc.eval(hi) >= 0.0) {
      lo = hi;
      step *= 2.0;
      hi += step;
    }
  } else {
    hi = mu;
    lo = mu - step;
    while (pc.eval(lo) <= 0.0) {
      hi = lo;
      step *= 2.0;
      lo -= step;
    }
  }
  mu = 0.5 * (lo + hi);
  M = pc.eval(mu);
  for (int it = 0; it < 200; ++it) {
    if (std::fabs(M) <= 1e-14) break;
    if (M > 0.0)
      lo = mu;
    else
      hi = mu;
    double d = pc.deriv();
    double mn = d < 0.0 ? mu - M / d : 0.5 * (lo + hi);
    if (!(mn > lo && mn < hi)) mn = 0.5 * (lo + hi);
    if (std::fabs(mn - mu) <= 1e-18 * (1.0 + std::fabs(mn))) {
      mu = mn;
      M = pc.eval(mu);
      break;
    }
    mu = mn;
    M = pc.eval(mu);
  }
  return mu;
}

struct InnerResult {
  std::vector<double> s;
  VectorField z;
  double mu = 0.0;
  double gap = 0.0;
  double kkt = 0.0;
  int iters = 0;
};

// Accelerated primal-dual solve of
//   min_s J(s) + eps sum f(s) h^d + (1/(2 sigma)) ||s - v||_h^2,
//   sum s h^d = 1
// with the mass constraint handled inside the primal prox.
InnerResult inner_prox(const ScalarField& v, double sigma,
                       const PenaltyBarrier& barrier, const JkoConfig& cfg,
                       std::vector<double> s_init, VectorField z_init,
                       double mu_init) {
  const TorusGrid& grid = v.grid;
  const std::size_t N = grid.cells();
  const double L2 = 4.0 * grid.dim / (grid.h() * grid.h());
  const double gamma = 1.0 / sigma;

  double sp = 1.0 / std::sqrt(L2), sd = sp;
  InnerResult res;
  res.s = std::move(s_init);
  res.z = std::move(z_init);
  res.mu = mu_init;
  project_cell_ball(res.z);

  ScalarField sbar(grid);
  sbar.v = res.s;
  std::vector<double> s_old(N), b0(N);
  ScalarField dz(grid);

  for (int t = 1; t <= cfg.inner_max_iters; ++t) {
    VectorField gb = grad(sbar);
    for (int a = 0; a < grid.dim; ++a)
      for (std::size_t i = 0; i < N; ++i) res.z.comp[a][i] += sd * gb.comp[a][i];
    project_cell_ball(res.z);
    dz = div(res.z);

    double r = sp / sigma;
    ProxCells pc{&b0, &res.s, 1.0 + r, barrier.eps * sp, barrier.c, sp,
                 grid.cell_volume()};
    s_old = res.s;
    for (std::size_t i = 0; i < N; ++i)
      b0[i] = s_old[i] + sp * dz.v[i] + r * v.v[i];
    res.mu = solve_mass_multiplier(pc, res.mu);

    double theta = 1.0 / std::sqrt(1.0 + 2.0 * gamma * sp);
    for (std::size_t i = 0; i < N; ++i)
      sbar.v[i] = res.s[i] + theta * (res.s[i] - s_old[i]);
    sp *= theta;
    sd /= theta;
    res.iters = t;

    if (t % 16 == 0 || t == cfg.inner_max_iters) {
      ScalarField sf(grid);
      sf.v = res.s;
      double j = total_variation(sf);
      res.gap = j + inner(sf, dz);
      double wsum = 0.0;
      std::vector<double> w(N);
      for (std::size_t i = 0; i < N; ++i) {
        w[i] = -dz.v[i] + (res.s[i] - v.v[i]) / sigma;
        if (barrier.eps > 0.0) w[i] += barrier.eps * barrier.fp(res.s[i]);
        wsum += w[i];
      }
      double wmean = wsum / double(N);
      res.kkt = 0.0;
      for (std::size_t i = 0; i < N; ++i)
        res.kkt = std::max(res.kkt, std::fabs(w[i] - wmean));
      // the outer residual only needs the inner first-order error to sit
      // well under residual_tol, so stop there once the gap is closed
      const double kkt_enough =
          std::max(cfg.inner_kkt_tol * (1.0 + sup_norm(dz)),
                   0.2 * cfg.residual_tol * (1.0 + lp_norm(dz, 2)));
      if (res.gap <= cfg.inner_gap_tol * (1.0 + j) && res.kkt <= kkt_enough)
        break;
    }
  }
  return res;
}

}  // namespace

JkoStepResult jko_step(const Density& rho_prev, const JkoConfig& cfg,
                       JkoWarm* warm) {
  const TorusGrid& grid = rho_prev.grid();
  if (!(cfg.tau > 0.0)) throw ValidationError("tau must be positive");
  if (cfg.barrier.eps < 0.0)
    throw ValidationError("eps must be nonnegative");
  if (cfg.barrier.c < 0.0) throw ValidationError("c must be nonnegative");
  if ((cfg.transport.method == OtMethod::exact_1d ||
       cfg.transport.method == OtMethod::exact_1d_cells) &&
      grid.dim != 1)
    throw DimensionError("exact transport needs a one-dimensional grid");
  if (cfg.barrier.eps > 0.0 && minmax(rho_prev).min <= cfg.barrier.c)
    throw BarrierViolation(
        "jko_step: density touches the barrier bound c = " +
        std::to_string(cfg.barrier.c));

  const double tau = cfg.tau;
  const double F_prev = flow_energy(rho_prev, cfg.barrier);
  double sigma = cfg.sigma0 > 0.0 ? cfg.sigma0 : tau;
  if (warm && warm->sigma > 0.0) sigma = warm->sigma;

  JkoStepResult res;
  res.rho_next = rho_prev;
  res.z = (warm && warm->has_z) ? warm->z : VectorField(grid);
  project_cell_ball(res.z);
  res.phi = ScalarField(grid);
  res.j_value = total_variation(rho_prev);
  res.penalty_value = F_prev - res.j_value;
  res.objective = F_prev;

  SinkhornState* sink = warm ? &warm->sink : nullptr;
  std::vector<double> s = rho_prev.values();
  double mu = 0.0;
  int backtracks = 0;

  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    res.outer_iters = outer;

    ScalarField v(grid);
    double scale = sigma / tau;
    for (std::size_t i = 0; i < grid.cells(); ++i)
      v.v[i] = res.rho_next[i] - scale * res.phi.v[i];

    InnerResult in =
        inner_prox(v, sigma, cfg.barrier, cfg, s, res.z, mu);
    res.inner_iters_total += in.iters;

    Density cand(grid, in.s);
    TransportResult ot = solve_transport(rho_prev, cand, cfg.transport, sink);
    double F_cand = flow_energy(cand, cfg.barrier);
    double obj_cand = ot.w2_squared / (2.0 * tau) + F_cand;

    if (std::getenv("TVFLOW_JKO_TRACE")) {
      double mv = 0.0;
      for (std::size_t i = 0; i < grid.cells(); ++i)
        mv = std::max(mv, std::fabs(in.s[i] - res.rho_next[i]));
      std::fprintf(stderr,
                   "[jko] outer=%d sigma=%.3e obj=%.12e cand=%.12e moved=%.2e "
                   "inner=%d gap=%.1e kkt=%.1e resdev=%.2e\n",
                   outer, sigma, res.objective, obj_cand, mv, in.iters, in.gap,
                   in.kkt, res.residual_dev);
    }

    if (obj_cand <= res.objective + 1e-14 * (1.0 + std::fabs(res.objective))) {
      double moved = 0.0;
      for (std::size_t i = 0; i < grid.cells(); ++i)
        moved = std::max(moved, std::fabs(in.s[i] - res.rho_next[i]));

      res.rho_next = cand;
      res.z = in.z;
      res.phi = ot.phi;
      res.w2_squared = ot.w2_squared;
      res.objective = obj_cand;
      res.j_value = total_variation(cand);
      res.penalty_value = F_cand - res.j_value;
      res.cert_gap = in.gap;
      s = in.s;
      mu = in.mu;

      ScalarField dz = div(res.z);
      double esum = 0.0;
      std::vector<double> r(grid.cells());
      for (std::size_t i = 0; i < grid.cells(); ++i) {
        r[i] = res.phi.v[i] / tau - dz.v[i];
        if (cfg.barrier.eps > 0.0)
          r[i] += cfg.barrier.eps * cfg.barrier.fp(res.rho_next[i]);
        esum += r[i];
      }
      double rmean = esum / double(grid.cells());
      double var = 0.0;
      for (std::size_t i = 0; i < grid.cells(); ++i)
        var += (r[i] - rmean) * (r[i] - rmean);
      res.el_constant = rmean;
      res.residual_dev = std::sqrt(var / double(grid.cells()));

      if (res.residual_dev <= cfg.residual_tol * (1.0 + lp_norm(dz, 2)) ||
          moved <= 1e-13 * (1.0 + minmax(res.rho_next).max)) {
        res.converged = true;
        break;
      }
      backtracks = 0;
      sigma = std::min(sigma * cfg.sigma_grow, cfg.sigma_cap_over_tau * tau);
    } else {
      sigma *= 0.5;
      if (++backtracks > cfg.max_backtracks) break;
    }
  }

  res.energy_decrease = F_prev - res.objective;
  if (warm) {
    warm->z = res.z;
    warm->has_z = true;
    warm->sigma = sigma;
  }
  return res;
}

MaximumPrincipleReport maximum_principle_check(const Density& prev,
                                               const Density& next,
                                               double rel) {
  require_same_grid(prev.grid(), next.grid(), "maximum_principle_check");
  MinMax p = minmax(prev), q = minmax(next);
  MaximumPrincipleReport rep;
  rep.min_prev = p.min;
  rep.max_prev = p.max;
  rep.min_next = q.min;
  rep.max_next = q.max;
  rep.tol = rel * (1.0 + p.max);
  rep.pass = (q.min >= p.min - rep.tol) && (q.max <= p.max + rep.tol);
  return rep;
}

RegularityEstimates step_regularity_estimates(const JkoStepResult& step,
                                              const PenaltyBarrier& barrier,
                                              double rel_slack) {
  const TorusGrid& grid = step.rho_next.grid();
  const double h = grid.h();
  RegularityEstimates est;
  est.barrier_active = barrier.eps > 0.0;

  ScalarField dz = div(step.z);
  ScalarField el(grid);  // eps f'(rho) - div z, the stationary combination
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    el.v[i] = -dz.v[i];
    if (est.barrier_active)
      el.v[i] += barrier.eps * barrier.fp(step.rho_next[i]);
  }
  est.rhs = lp_norm(grad(el), 2);

  double gap = std::max(step.cert_gap, 0.0);
  double slack_gap = 2.0 * std::sqrt(grid.dim * gap) / h;

  auto check = [&](double lhs, double rhs) {
    EstimateCheck ec;
    ec.lhs = lhs;
    ec.rhs = rhs;
    ec.pass = lhs <= rhs * (1.0 + rel_slack) + slack_gap + 1e-9;
    return ec;
  };

  ScalarField dzf = dz;
  est.curvature = check(lp_norm(grad(dzf), 2), est.rhs);
  if (est.barrier_active) {
    ScalarField pf(grid);
    for (std::size_t i = 0; i < grid.cells(); ++i)
      pf.v[i] = barrier.eps * barrier.fp(step.rho_next[i]);
    est.penalty_gradient = check(lp_norm(grad(pf), 2), est.rhs);

    double min_fpp = barrier.fpp(minmax(step.rho_next).max);
    est.density_gradient = check(lp_norm(grad(step.rho_next.field()), 2),
                                 est.rhs / (barrier.eps * min_fpp));
    est.pass = est.curvature.pass && est.penalty_gradient.pass &&
               est.density_gradient.pass;
  } else {
    est.penalty_gradient = {0.0, est.rhs, true};
    est.density_gradient = {0.0, 0.0, true};
    est.pass = est.curvature.pass;
  }
  return est;
}

}  // namespace tvflow
