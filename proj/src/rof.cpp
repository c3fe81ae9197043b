#include "tvflow/rof.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tvflow {

namespace {

// Projects each cell's dual vector onto the unit ball.
void project_unit_ball(VectorField& z) {
  const TorusGrid& g = z.grid;
  if (g.dim == 1) {
    for (double& x : z.comp[0]) {
      double m = std::fabs(x);
      if (m > 1.0) x /= m;
    }
  } else {
    for (std::size_t i = 0; i < g.cells(); ++i) {
      double m = std::sqrt(z.comp[0][i] * z.comp[0][i] +
                           z.comp[1][i] * z.comp[1][i]);
      if (m > 1.0) {
        z.comp[0][i] /= m;
        z.comp[1][i] /= m;
      }
    }
  }
}

}  // namespace

double rof_objective(const ScalarField& u, const ScalarField& g,
                     double fidelity) {
  double quad = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double d = u.v[i] - g.v[i];
    quad += d * d;
  }
  quad *= 0.5 * fidelity * u.grid.cell_volume();
  return total_variation(u) + quad;
}

RofSolution rof_solve(const ScalarField& g, const RofConfig& cfg) {
  if (!(cfg.fidelity > 0.0))
    throw ValidationError("rof: fidelity must be positive");
  if (!(cfg.gap_tol > 0.0))
    throw ValidationError("rof: gap_tol must be positive");
  const TorusGrid& grid = g.grid;
  const double w = cfg.fidelity;
  const double h = grid.h();
  const double L2 = 4.0 * grid.dim / (h * h);  // ||grad||^2 upper bound

  ScalarField u = g;     // start at the datum: preserves the mean exactly
  ScalarField ubar = g;
  VectorField z(grid);

  double sp = 1.0 / std::sqrt(L2);  // primal step
  double sd = 1.0 / std::sqrt(L2);  // dual step
  const std::size_t N = grid.cells();

  RofSolution sol;
  double gap = 0.0;
  int it = 0;
  for (it = 1; it <= cfg.max_iters; ++it) {
    if (cfg.restart_every > 0 && it % cfg.restart_every == 0) {
      sp = 1.0 / std::sqrt(L2);
      sd = 1.0 / std::sqrt(L2);
      ubar = u;
    }
    // dual ascent + projection
    VectorField gu = grad(ubar);
    for (int a = 0; a < grid.dim; ++a)
      for (std::size_t i = 0; i < N; ++i)
        z.comp[a][i] += sd * gu.comp[a][i];
    project_unit_ball(z);

    // primal prox of the quadratic data term
    ScalarField dz = div(z);
    double theta = 1.0 / std::sqrt(1.0 + 2.0 * w * sp);
    for (std::size_t i = 0; i < N; ++i) {
      double prev = u.v[i];
      double cand = (u.v[i] + sp * dz.v[i] + sp * w * g.v[i]) / (1.0 + sp * w);
      u.v[i] = cand;
      ubar.v[i] = cand + theta * (cand - prev);
    }
    sp *= theta;
    sd /= theta;

    if (it % cfg.check_every == 0) {
      // primal-dual gap: P(u) - D(z) with
      // D(z) = -<g, div z> - ||div z||^2 / (2w); dz is still div of the
      // current z here.
      double ip = inner(g, dz);
      double nn = inner(dz, dz);
      gap = rof_objective(u, g, w) + ip + nn / (2.0 * w);
      if (gap <= cfg.gap_tol) break;
    }
  }
  if (it > cfg.max_iters)
    throw NoConvergence(
        "rof: gap " + std::to_string(gap) + " above tolerance " +
            std::to_string(cfg.gap_tol) + " after " +
            std::to_string(cfg.max_iters) + " iterations",
        "n=" + std::to_string(grid.n) + " dim=" + std::to_string(grid.dim));

  sol.u = u;
  sol.z = z;
  sol.gap = gap;
  sol.fidelity = w;
  sol.j_value = total_variation(u);
  ScalarField dz = div(z);
  double res = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    res = std::max(res, std::fabs(w * (u.v[i] - g.v[i]) - dz.v[i]));
  sol.el_residual = res;
  sol.iters = std::min(it, cfg.max_iters);
  return sol;
}

RofSolution rof_solve(const Density& g, const RofConfig& cfg) {
  return rof_solve(g.field(), cfg);
}

// ---------------------------------------------------------------------------
// Taut string machinery
// ---------------------------------------------------------------------------

namespace {

struct Knot {
  int x;
  double y;
};

double slope(const Knot& a, const Knot& b) {
  return (b.y - a.y) / double(b.x - a.x);
}

}  // namespace

std::vector<double> taut_string_tube(const std::vector<double>& lo,
                                     const std::vector<double>& hi) {
  const int m = int(lo.size()) - 1;
  if (m < 1 || hi.size() != lo.size())
    throw ValidationError("taut_string_tube: bad tube size");
  for (int k = 0; k <= m; ++k)
    if (!(lo[k] <= hi[k]))
      throw ValidationError("taut_string_tube: lo > hi at k=" +
                            std::to_string(k));

  std::vector<Knot> knots;
  knots.push_back({0, lo[0]});

  Knot anchor{0, lo[0]};
  std::vector<Knot> U;  // convex chain through ceiling points
  std::vector<Knot> Lw; // concave chain through floor points

  auto push_ceiling = [&](Knot p) {
    while (!U.empty()) {
      const Knot& q = U.back();
      const Knot& r = (U.size() >= 2) ? U[U.size() - 2] : anchor;
      if (slope(r, q) >= slope(q, p))
        U.pop_back();
      else
        break;
    }
    U.push_back(p);
  };
  auto push_floor = [&](Knot p) {
    while (!Lw.empty()) {
      const Knot& q = Lw.back();
      const Knot& r = (Lw.size() >= 2) ? Lw[Lw.size() - 2] : anchor;
      if (slope(r, q) <= slope(q, p))
        Lw.pop_back();
      else
        break;
    }
    Lw.push_back(p);
  };

  while (anchor.x < m) {
    U.clear();
    Lw.clear();
    bool bent = false;
    for (int k = anchor.x + 1; k <= m && !bent; ++k) {
      push_ceiling({k, hi[k]});
      // A ceiling that undercuts the steepest floor chord forces a bend on
      // the floor at the first vertex of the concave chain.
      if (!Lw.empty() && slope(anchor, U.front()) < slope(anchor, Lw.front())) {
        anchor = Lw.front();
        knots.push_back(anchor);
        bent = true;
        break;
      }
      push_floor({k, lo[k]});
      if (slope(anchor, U.front()) < slope(anchor, Lw.front())) {
        anchor = U.front();
        knots.push_back(anchor);
        bent = true;
        break;
      }
    }
    if (bent) continue;

    // Reached the pinned end without a forced bend.  The end point sits in
    // both chains, so the remaining string is the convex chain if the
    // straight run to the end would poke above a ceiling, the concave chain
    // if it would dip below a floor, and the straight segment otherwise.
    Knot end{m, lo[m]};
    double s_end = slope(anchor, end);
    double sU = slope(anchor, U.front());
    double sL = slope(anchor, Lw.front());
    if (sU < s_end - 1e-300) {
      for (const Knot& p : U) knots.push_back(p);
    } else if (sL > s_end + 1e-300) {
      for (const Knot& p : Lw) knots.push_back(p);
    } else {
      knots.push_back(end);
    }
    anchor = end;
  }

  // Fill in the path by linear interpolation between knots.
  std::vector<double> R(m + 1, 0.0);
  for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
    const Knot& a = knots[s];
    const Knot& b = knots[s + 1];
    R[a.x] = a.y;
    double sl = slope(a, b);
    for (int x = a.x + 1; x < b.x; ++x) R[x] = a.y + sl * (x - a.x);
  }
  R[m] = knots.back().y;
  return R;
}

ScalarField taut_string_1d(const ScalarField& g, double fidelity) {
  const TorusGrid& grid = g.grid;
  if (grid.dim != 1)
    throw DimensionError("taut_string_1d: input must be one-dimensional");
  if (!(fidelity > 0.0))
    throw ValidationError("taut_string_1d: fidelity must be positive");
  const int n = grid.n;
  const double lambda = double(n) / fidelity;  // jump weight in string units

  // Constant candidate (string never touches a wall).
  double mean = 0.0;
  for (double x : g.v) mean += x;
  mean /= n;
  ScalarField best(grid, mean);
  double best_obj = rof_objective(best, g, fidelity);

  std::vector<double> G(n + 1), lo(n + 1), hi(n + 1), R;
  ScalarField cand(grid);
  for (int cut = 0; cut < n; ++cut) {
    G[0] = 0.0;
    for (int j = 0; j < n; ++j) G[j + 1] = G[j] + g.v[(cut + j) % n];
    for (int sgn = -1; sgn <= 1; sgn += 2) {
      // Pin the cut edge's dual at sgn*lambda: interior tube centers shift
      // by -sgn*lambda, both endpoints exact.
      lo[0] = hi[0] = 0.0;
      lo[n] = hi[n] = G[n];
      for (int k = 1; k < n; ++k) {
        double center = G[k] - sgn * lambda;
        lo[k] = center - lambda;
        hi[k] = center + lambda;
      }
      if (lo[0] > hi[0] || lo[n] > hi[n]) continue;
      R = taut_string_tube(lo, hi);
      for (int j = 0; j < n; ++j) cand.v[(cut + j) % n] = R[j + 1] - R[j];
      double obj = rof_objective(cand, g, fidelity);
      if (obj < best_obj) {
        best_obj = obj;
        best = cand;
      }
    }
  }
  return best;
}

EstimateCheck rof_h1_estimate(const RofSolution& sol, const ScalarField& g) {
  EstimateCheck c;
  c.lhs = lp_norm(grad(sol.u), 2);
  c.rhs = lp_norm(grad(g), 2);
  c.pass = c.lhs <= c.rhs * (1.0 + 1e-6) + 1e-9;
  return c;
}

EstimateCheck rof_div_estimate(const RofSolution& sol, const ScalarField& g) {
  if (!(sol.gap <= 1e-8))
    throw ValidationError(
        "rof_div_estimate: requires a solve with gap below 1e-8, got " +
        std::to_string(sol.gap));
  EstimateCheck c;
  c.lhs = lp_norm(grad(div(sol.z)), 2);
  c.rhs = sol.fidelity * lp_norm(grad(g), 2);
  c.pass = c.lhs <= c.rhs * (1.0 + 1e-4) + 1e-6;
  return c;
}

}  // namespace tvflow
