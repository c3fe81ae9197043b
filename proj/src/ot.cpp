#include "tvflow/ot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>

namespace tvflow {

namespace {

constexpr double kNegInf = -1e300;

// ---------------------------------------------------------------------------
// Transportation simplex on support atoms.  Supplies and demands must be
// positive; the basis is a spanning tree of the bipartite graph with exactly
// R + C - 1 arcs (degenerate zero flows allowed).
// ---------------------------------------------------------------------------

struct SimplexArc {
  int i, j;
  double flow;
};

struct SimplexResult {
  double cost = 0.0;
  std::vector<double> psi, phi;  // row / column duals
  std::vector<SimplexArc> basis;
  int pivots = 0;
};

class TransportSimplex {
 public:
  TransportSimplex(std::vector<double> supply, std::vector<double> demand,
                   std::function<double(int, int)> cost)
      : a_(std::move(supply)), b_(std::move(demand)), cost_(std::move(cost)) {
    R_ = int(a_.size());
    C_ = int(b_.size());
  }

  // Northwest-corner start (used cold by the oracle).
  std::vector<SimplexArc> northwest_basis() const {
    std::vector<SimplexArc> arcs;
    arcs.reserve(R_ + C_ - 1);
    int i = 0, j = 0;
    double ra = a_[0], rb = b_[0];
    while (true) {
      double m = std::min(ra, rb);
      arcs.push_back({i, j, m});
      ra -= m;
      rb -= m;
      bool lasti = (i == R_ - 1), lastj = (j == C_ - 1);
      if (lasti && lastj) break;
      // On ties advance one side only so the arc count stays R + C - 1.
      if (ra <= rb && !lasti) {
        ++i;
        ra = a_[i];
      } else {
        ++j;
        rb = b_[j];
      }
    }
    return arcs;
  }

  SimplexResult run(std::vector<SimplexArc> basis, int max_pivots) {
    if (int(basis.size()) != R_ + C_ - 1)
      throw ValidationError("transport simplex: basis arc count " +
                            std::to_string(basis.size()) + " != " +
                            std::to_string(R_ + C_ - 1));
    SimplexResult res;
    res.basis = std::move(basis);
    std::vector<double> psi(R_), phi(C_);
    const double cscale = 1.0;  // torus costs are O(1)

    for (int pivot = 0;; ++pivot) {
      compute_duals(res.basis, psi, phi);

      // entering arc: most negative reduced cost; every 64th pivot take the
      // first negative instead (Bland-style anti-cycling fallback)
      const bool bland = (pivot > 0 && pivot % 64 == 0);
      int ei = -1, ej = -1;
      double best = -1e-13 * cscale;
      for (int i = 0; i < R_; ++i) {
        for (int j = 0; j < C_; ++j) {
          double r = cost_(i, j) - psi[i] - phi[j];
          if (r < best) {
            best = r;
            ei = i;
            ej = j;
            if (bland) break;
          }
        }
        if (bland && ei >= 0) break;
      }
      if (ei < 0) break;  // optimal
      if (pivot >= max_pivots)
        throw NoConvergence("transport simplex: pivot cap " +
                                std::to_string(max_pivots) + " reached",
                            "R=" + std::to_string(R_) +
                                " C=" + std::to_string(C_));
      apply_pivot(res.basis, ei, ej);
      res.pivots = pivot + 1;
    }

    res.psi = psi;
    res.phi = phi;
    double c = 0.0;
    for (const SimplexArc& arc : res.basis)
      if (arc.flow > 0.0) c += arc.flow * cost_(arc.i, arc.j);
    res.cost = c;
    return res;
  }

 private:
  // node ids: rows 0..R-1, columns R..R+C-1
  void build_adjacency(const std::vector<SimplexArc>& basis) {
    adj_.assign(R_ + C_, {});
    for (int t = 0; t < int(basis.size()); ++t) {
      adj_[basis[t].i].push_back(t);
      adj_[R_ + basis[t].j].push_back(t);
    }
  }

  void compute_duals(const std::vector<SimplexArc>& basis,
                     std::vector<double>& psi, std::vector<double>& phi) {
    build_adjacency(basis);
    std::vector<char> seen(R_ + C_, 0);
    std::vector<int> stack;
    psi.assign(R_, 0.0);
    phi.assign(C_, 0.0);
    for (int root = 0; root < R_ + C_; ++root) {
      if (seen[root]) continue;
      // each tree component gets gauge 0 at its root (a connected basis has
      // exactly one component)
      seen[root] = 1;
      stack.push_back(root);
      while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int t : adj_[u]) {
          const SimplexArc& arc = basis[t];
          int v = (u == arc.i) ? R_ + arc.j : arc.i;
          if (seen[v]) continue;
          seen[v] = 1;
          if (v >= R_)
            phi[v - R_] = cost_(arc.i, arc.j) - psi[arc.i];
          else
            psi[v] = cost_(arc.i, arc.j) - phi[arc.j];
          stack.push_back(v);
        }
      }
    }
  }

  void apply_pivot(std::vector<SimplexArc>& basis, int ei, int ej) {
    // unique tree path from row ei to column ej
    build_adjacency(basis);
    int nodes = R_ + C_;
    std::vector<int> par_node(nodes, -1), par_arc(nodes, -1);
    std::vector<int> stack{ei};
    par_node[ei] = ei;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      if (u == R_ + ej) break;
      for (int t : adj_[u]) {
        const SimplexArc& arc = basis[t];
        int v = (u == arc.i) ? R_ + arc.j : arc.i;
        if (par_node[v] >= 0) continue;
        par_node[v] = u;
        par_arc[v] = t;
        stack.push_back(v);
      }
    }
    if (par_node[R_ + ej] < 0)
      throw NoConvergence("transport simplex: disconnected basis", "");

    // walk back from column ej to row ei; arcs alternate -theta, +theta,
    // starting with -theta on the arc incident to the entering column
    std::vector<int> path;
    for (int v = R_ + ej; v != ei; v = par_node[v]) path.push_back(par_arc[v]);

    double theta = std::numeric_limits<double>::infinity();
    int leave_pos = -1;
    for (int t = 0; t < int(path.size()); t += 2) {
      const SimplexArc& arc = basis[path[t]];
      if (arc.flow < theta ||
          (arc.flow == theta && leave_pos >= 0 &&
           std::pair(arc.i, arc.j) <
               std::pair(basis[path[leave_pos]].i,
                         basis[path[leave_pos]].j))) {
        theta = arc.flow;
        leave_pos = t;
      }
    }
    for (int t = 0; t < int(path.size()); ++t)
      basis[path[t]].flow += (t % 2 == 0) ? -theta : theta;
    basis[path[leave_pos]] = {ei, ej, theta};
  }

  int R_, C_;
  std::vector<double> a_, b_;
  std::function<double(int, int)> cost_;
  std::vector<std::vector<int>> adj_;
};

// ---------------------------------------------------------------------------
// 1D circle helpers
// ---------------------------------------------------------------------------

// Monotone quantile matching of mu against nu whose mass axis is rotated by
// theta.  Positions unwrap by the circle period 1, the mass axis by the total
// mass.  C(theta) is convex piecewise linear; `slope` is a one-sided
// derivative, `arcs` (optional) the matching walk including zero-length ties
// so consecutive arcs always share an atom.
struct CircleArc {
  int i = 0, j = 0;   // support atom indices
  double len = 0.0;   // transported mass
  double k = 0.0;     // period offset of nu's representative
};

struct CircleEval {
  double cost = 0.0;
  double slope = 0.0;
};

CircleEval circle_matching(const std::vector<double>& xa,
                           const std::vector<double>& Aa,
                           const std::vector<double>& xb,
                           const std::vector<double>& Bb, double theta,
                           std::vector<CircleArc>* arcs) {
  const int na = int(xa.size()), nb = int(xb.size());
  const double total_a = Aa.back(), total_b = Bb.back();

  // nu atom covering mass coordinate s = -theta (start of the walk)
  double kk = std::floor(-theta / total_b);
  double sref = -theta - kk * total_b;
  int j = int(std::upper_bound(Bb.begin(), Bb.end(), sref) - Bb.begin());
  if (j == nb) {
    j = 0;
    kk += 1.0;
  }

  CircleEval ev;
  double t = 0.0;
  int i = 0;
  int guard = 2 * (na + nb) + 8;
  while (i < na && guard-- > 0) {
    const double ta = Aa[i];
    const double tb = Bb[j] + kk * total_b + theta;
    const double d = xa[i] - (xb[j] + kk);
    if (tb < ta) {
      const double len = tb - t;
      if (arcs) arcs->push_back({i, j, len, kk});
      ev.cost += len * d * d;
      int j2 = j + 1;
      double kk2 = kk;
      if (j2 == nb) {
        j2 = 0;
        kk2 += 1.0;
      }
      const double dn = xa[i] - (xb[j2] + kk2);
      ev.slope += d * d - dn * dn;
      j = j2;
      kk = kk2;
      t = tb;
    } else {
      const double len = ta - t;
      if (arcs) arcs->push_back({i, j, len, kk});
      ev.cost += len * d * d;
      ++i;
      t = ta;
    }
  }
  if (guard <= 0)
    throw NoConvergence("circle matching walk did not terminate",
                        "theta = " + std::to_string(theta));
  (void)total_a;
  return ev;
}

ScalarField fill_and_center_phi(const TorusGrid& grid,
                                const std::vector<int>& mu_cells,
                                const std::vector<double>& psi,
                                const std::vector<int>& nu_cells,
                                const std::vector<double>& phi_support) {
  ScalarField phi(grid);
  std::vector<char> have(grid.cells(), 0);
  for (std::size_t t = 0; t < nu_cells.size(); ++t) {
    phi.v[nu_cells[t]] = phi_support[t];
    have[nu_cells[t]] = 1;
  }
  // zero-mass cells: c-transform over the mu support keeps the pair feasible
  for (std::size_t cell = 0; cell < grid.cells(); ++cell) {
    if (have[cell]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < mu_cells.size(); ++t) {
      int mc = mu_cells[t];
      double d;
      if (grid.dim == 1) {
        d = torus_dist(grid.coord(int(cell)), grid.coord(mc));
        d = d * d;
      } else {
        int ci = int(cell) / grid.n, cj = int(cell) % grid.n;
        int mi = mc / grid.n, mj = mc % grid.n;
        double d0 = torus_dist(grid.coord(ci), grid.coord(mi));
        double d1 = torus_dist(grid.coord(cj), grid.coord(mj));
        d = d0 * d0 + d1 * d1;
      }
      best = std::min(best, 0.5 * d - psi[t]);
    }
    phi.v[cell] = best;
  }
  double mean = 0.0;
  for (double x : phi.v) mean += x;
  mean /= double(grid.cells());
  for (double& x : phi.v) x -= mean;
  return phi;
}

}  // namespace

TransportResult w2_exact_1d(const Density& mu, const Density& nu) {
  require_same_grid(mu.grid(), nu.grid(), "w2_exact_1d");
  const TorusGrid& grid = mu.grid();
  if (grid.dim != 1)
    throw DimensionError("w2_exact_1d: input must be one-dimensional");
  const int n = grid.n;
  const double h = grid.h();

  std::vector<int> mu_cells, nu_cells;
  std::vector<double> xa, xb, Aa, Bb;
  double ca = 0.0, cb = 0.0;
  for (int i = 0; i < n; ++i) {
    if (mu[i] > 0.0) {
      mu_cells.push_back(i);
      xa.push_back(grid.coord(i));
      ca += mu[i] * h;
      Aa.push_back(ca);
    }
    if (nu[i] > 0.0) {
      nu_cells.push_back(i);
      xb.push_back(grid.coord(i));
      cb += nu[i] * h;
      Bb.push_back(cb);
    }
  }

  // The matching cost is convex piecewise linear in the rotation theta of
  // nu's mass axis; bisect on the slope, then snap to the kink set
  // {Aa[i] - Bb[j] (mod total)} where the minimum is attained.
  double lo = -0.75, hi = 0.75;
  if (circle_matching(xa, Aa, xb, Bb, lo, nullptr).slope > 0.0) lo = -1.5;
  if (circle_matching(xa, Aa, xb, Bb, hi, nullptr).slope < 0.0) hi = 1.5;
  for (int it = 0; it < 110 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (circle_matching(xa, Aa, xb, Bb, mid, nullptr).slope < 0.0)
      lo = mid;
    else
      hi = mid;
  }

  const double total_b = Bb.back();
  double best_theta = 0.5 * (lo + hi);
  double best_cost =
      circle_matching(xa, Aa, xb, Bb, best_theta, nullptr).cost;
  for (std::size_t i = 0; i < Aa.size(); ++i)
    for (std::size_t j = 0; j < Bb.size(); ++j) {
      const double base = Aa[i] - Bb[j];
      const double kk = std::round((best_theta - base) / total_b);
      const double cand = base + kk * total_b;
      if (cand < lo - 1e-9 || cand > hi + 1e-9) continue;
      const double c = circle_matching(xa, Aa, xb, Bb, cand, nullptr).cost;
      if (c < best_cost) {
        best_cost = c;
        best_theta = cand;
      }
    }

  std::vector<CircleArc> arcs;
  best_cost = circle_matching(xa, Aa, xb, Bb, best_theta, &arcs).cost;

  // Canonical duals from the plan.  Between consecutive nu atoms of the walk
  // phi accrues 0.5 (y' - s)^2 - 0.5 (y - s)^2 with s the serving mu
  // position: unique when the transition splits a mu atom, free within the
  // two adjacent atoms at a degenerate tie.  The increments must telescope
  // to zero around the circle; the tie servers interpolated by a single
  // lambda make that closure affine, and optimality of theta brackets the
  // root in [0, 1] (the endpoint sums are the one-sided slopes).
  // Roundoff slivers would pin tie servers to one side and poison the
  // closure, so only substantial arcs shape the transition structure.
  const double sliver = 1e-12 * Aa.back();
  std::vector<CircleArc> pos;
  for (const CircleArc& arc : arcs)
    if (arc.len > sliver) pos.push_back(arc);

  struct Transition {
    int j_to = 0;
    bool assign = true;
    double y_from = 0.0, y_to = 0.0;
    double s_lo = 0.0, s_hi = 0.0;  // equal for a forced server
  };
  std::vector<Transition> trans;
  for (std::size_t k = 0; k < pos.size(); ++k) {
    const CircleArc& a = pos[k];
    const bool closing = (k + 1 == pos.size());
    const CircleArc& b = closing ? pos[0] : pos[k + 1];
    const double bump = closing ? 1.0 : 0.0;
    const double ya = xb[a.j] + a.k;
    const double yb = xb[b.j] + b.k + bump;
    if (ya == yb) continue;  // atom split across the wrap, seamless
    Transition t;
    t.j_to = b.j;
    t.assign = !closing;
    t.y_from = ya;
    t.y_to = yb;
    if (a.i == b.i && bump == 0.0) {
      t.s_lo = t.s_hi = xa[a.i];
    } else {
      t.s_lo = xa[a.i];
      t.s_hi = xa[b.i] + bump;
    }
    trans.push_back(t);
  }
  auto increment = [](const Transition& t, double lam) {
    const double s = t.s_lo + lam * (t.s_hi - t.s_lo);
    return (t.y_to - t.y_from) * (0.5 * (t.y_from + t.y_to) - s);
  };
  double sum0 = 0.0, sum1 = 0.0;
  for (const Transition& t : trans) {
    sum0 += increment(t, 0.0);
    sum1 += increment(t, 1.0);
  }
  double lam = 0.5;
  if (sum0 > 0.0 && sum1 < 0.0)
    lam = sum0 / (sum0 - sum1);
  else if (sum0 <= 0.0)
    lam = 0.0;
  else
    lam = 1.0;

  const double kUnset = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> psi(xa.size(), kUnset), phi(xb.size(), kUnset);
  if (!pos.empty()) phi[pos[0].j] = 0.0;
  double cur_phi = 0.0;
  for (const Transition& t : trans) {
    cur_phi += increment(t, lam);
    if (t.assign && std::isnan(phi[t.j_to])) phi[t.j_to] = cur_phi;
  }
  auto cost_geo = [&](int i, int j) {
    const double d = torus_dist(grid.coord(mu_cells[i]),
                                grid.coord(nu_cells[j]));
    return 0.5 * d * d;
  };
  for (const CircleArc& arc : pos)
    if (std::isnan(psi[arc.i]))
      psi[arc.i] = cost_geo(arc.i, arc.j) - phi[arc.j];
  // atoms served only by slivers: complete by c-transform, cost O(sliver)
  for (std::size_t t = 0; t < xa.size(); ++t) {
    if (!std::isnan(psi[t])) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < xb.size(); ++u)
      if (!std::isnan(phi[u]))
        best = std::min(best, cost_geo(int(t), int(u)) - phi[u]);
    psi[t] = best;
  }
  for (std::size_t u = 0; u < xb.size(); ++u) {
    if (!std::isnan(phi[u])) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < xa.size(); ++t)
      best = std::min(best, cost_geo(int(t), int(u)) - psi[t]);
    phi[u] = best;
  }

  TransportResult res;
  res.method = OtMethod::exact_1d;
  res.w2_squared = best_cost;
  res.marginal_error = 0.0;
  res.phi = fill_and_center_phi(grid, mu_cells, psi, nu_cells, phi);
  return res;
}

namespace {

// Piecewise-linear quantile function of a strictly positive density whose
// cell mass is spread uniformly over the cell: Q maps [M[i], M[i+1]] affinely
// onto [i h, (i+1) h].  The lift Q(m + k) = Q(m) + k extends it to the line.
struct CellQuantile {
  std::vector<double> M;  // cumulative masses, M[0] = 0, M[n] = 1
  double h = 0.0;
  int n = 0;

  void build(const Density& d) {
    const TorusGrid& grid = d.grid();
    n = grid.n;
    h = grid.h();
    M.assign(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
      if (d[i] <= 0.0)
        throw ValidationError(
            "cell-uniform transport needs strictly positive densities");
      M[i + 1] = M[i] + d[i] * h;
    }
    for (int i = 1; i <= n; ++i) M[i] /= M[n];
  }

  // cell holding fractional mass f, right-continuous at breakpoints
  int locate(double f) const {
    int i = int(std::upper_bound(M.begin(), M.end(), f) - M.begin()) - 1;
    return std::min(n - 1, std::max(0, i));
  }

  double eval(double w) const {
    const double k = std::floor(w);
    const double f = w - k;
    const int i = locate(f);
    return k + (i + (f - M[i]) / (M[i + 1] - M[i])) * h;
  }

  double slope(int i) const { return h / (M[i + 1] - M[i]); }
};

// Cost, derivative and curvature of the monotone coupling at shift theta:
//   C(theta) = int (Qb(m + theta) - Qa(m))^2 dm
//   C'       = 2 int (Qb(m + theta) - Qa(m)) Qb'(m + theta) dm
//   C''      = 2 int Qa'(m) Qb'(m + theta) dm  > 0,
// so the shift problem is strictly convex and the root of C' is unique up to
// the +2 growth per mass period.  One merged-breakpoint sweep evaluates all
// three exactly: the displacement is affine on each piece, so the quadratic
// cost integrates by Simpson weights and the rest by trapezoids.
struct ShiftEval {
  double cost = 0.0, slope = 0.0, curve = 0.0;
};

ShiftEval shift_eval(const CellQuantile& qa, const CellQuantile& qb,
                     double theta) {
  ShiftEval ev;
  double m = 0.0;
  int ca = 0;
  double kb = std::floor(theta);
  int cb = qb.locate(theta - kb);
  int guard = 2 * (qa.n + qb.n) + 16;
  while (m < 1.0 && guard-- > 0) {
    const double stop_a = qa.M[ca + 1];
    const double stop_b = qb.M[cb + 1] + kb - theta;
    const double m2 = std::min(1.0, std::min(stop_a, stop_b));
    if (m2 > m) {
      const double len = m2 - m;
      const double sa = qa.slope(ca), sb = qb.slope(cb);
      const double qa0 =
          (ca + (m - qa.M[ca]) / (qa.M[ca + 1] - qa.M[ca])) * qa.h;
      const double fb = m + theta - kb;
      const double qb0 =
          kb + (cb + (fb - qb.M[cb]) / (qb.M[cb + 1] - qb.M[cb])) * qb.h;
      const double d0 = qb0 - qa0;
      const double d1 = d0 + len * (sb - sa);
      ev.cost += len * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
      ev.slope += len * (d0 + d1) * sb;
      ev.curve += 2.0 * len * sa * sb;
      m = m2;
    }
    if (m >= 1.0) break;
    // advance whichever cursor's breakpoint closed the piece (both on a tie)
    if (stop_a <= stop_b && ca + 1 < qa.n) ++ca;
    if (stop_b <= stop_a) {
      if (cb + 1 < qb.n) {
        ++cb;
      } else {
        cb = 0;
        kb += 1.0;
      }
    }
  }
  if (guard <= 0)
    throw NoConvergence("cell-uniform shift sweep did not terminate",
                        "theta = " + std::to_string(theta));
  return ev;
}

}  // namespace

TransportResult w2_exact_1d_cells(const Density& mu, const Density& nu) {
  require_same_grid(mu.grid(), nu.grid(), "w2_exact_1d_cells");
  const TorusGrid& grid = mu.grid();
  if (grid.dim != 1)
    throw DimensionError("w2_exact_1d_cells: input must be one-dimensional");
  const int n = grid.n;
  const double h = grid.h();

  CellQuantile qa, qb;
  qa.build(mu);
  qb.build(nu);

  // Bracket the root of the strictly increasing C', then safeguarded Newton.
  double lo = -0.75, hi = 0.75;
  while (shift_eval(qa, qb, lo).slope > 0.0) lo -= 0.5;
  while (shift_eval(qa, qb, hi).slope < 0.0) hi += 0.5;
  double theta = 0.0;
  if (!(theta > lo && theta < hi)) theta = 0.5 * (lo + hi);
  ShiftEval ev = shift_eval(qa, qb, theta);
  for (int it = 0; it < 200 && ev.slope != 0.0; ++it) {
    if (ev.slope > 0.0)
      hi = theta;
    else
      lo = theta;
    double next = theta - ev.slope / ev.curve;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == theta || hi - lo < 1e-17) break;
    theta = next;
    ev = shift_eval(qa, qb, theta);
  }

  // Potential on nu's side for cost d^2/2: phi'(y) = y - T(y) with the
  // backward map T(y) = Qa(Fb(y) - theta).  The displacement is affine
  // between breakpoints (cell edges of nu and pullbacks of mu's mass nodes),
  // so phi is piecewise quadratic and Simpson weights integrate it exactly.
  // What goes into the result is the cell average of phi: that is the
  // L2(dx) representer of the first variation against cell-value
  // perturbations, which is the gradient an optimizer over cell values needs.
  std::vector<double> events;
  events.reserve(2 * n + 2);
  for (int j = 0; j <= n; ++j) events.push_back(j * h);
  for (int i = 0; i <= n; ++i) {
    double y = qb.eval(qa.M[i] + theta);
    y -= std::floor(y);
    events.push_back(std::min(1.0, std::max(0.0, y)));
  }
  std::sort(events.begin(), events.end());

  auto fb = [&](double y) {
    const int j = std::min(n - 1, std::max(0, int(y / h)));
    return qb.M[j] + (y - j * h) * (qb.M[j + 1] - qb.M[j]) / h;
  };
  auto disp = [&](double y) { return y - qa.eval(fb(y) - theta); };

  std::vector<double> phi(n, 0.0);
  double acc = 0.0, yprev = 0.0, dprev = disp(0.0);
  for (double y : events) {
    if (y <= yprev) continue;
    const double len = y - yprev;
    const double d = disp(y);
    const double dmid = 0.5 * (dprev + d);
    const double phi_end = acc + len * dmid;
    const double phi_mid = acc + 0.5 * len * 0.5 * (dprev + dmid);
    const int j = std::min(n - 1, int(0.5 * (yprev + y) / h));
    phi[j] += len * (acc + 4.0 * phi_mid + phi_end) / 6.0;
    acc = phi_end;
    yprev = y;
    dprev = d;
  }
  double mean = 0.0;
  for (double& x : phi) {
    x /= h;  // integral over the cell to the cell average
    mean += x;
  }
  mean /= double(n);

  TransportResult res;
  res.method = OtMethod::exact_1d_cells;
  res.w2_squared = ev.cost;
  res.marginal_error = 0.0;
  res.phi = ScalarField(grid);
  for (int j = 0; j < n; ++j) res.phi.v[j] = phi[j] - mean;
  return res;
}

LpDetail w2_lp_detail(const Density& mu, const Density& nu) {
  require_same_grid(mu.grid(), nu.grid(), "w2_lp_oracle");
  const TorusGrid& grid = mu.grid();
  if (grid.cells() > 4096)
    throw TooLarge("w2_lp_oracle: " + std::to_string(grid.cells()) +
                   " cells exceeds the 4096-cell cap");
  const double vol = grid.cell_volume();

  std::vector<int> mu_cells, nu_cells;
  std::vector<double> sa, sb;
  for (std::size_t c = 0; c < grid.cells(); ++c) {
    if (mu[c] > 0.0) {
      mu_cells.push_back(int(c));
      sa.push_back(mu[c] * vol);
    }
    if (nu[c] > 0.0) {
      nu_cells.push_back(int(c));
      sb.push_back(nu[c] * vol);
    }
  }

  auto sq_dist = [&](int ca, int cb) {
    if (grid.dim == 1) {
      double d = torus_dist(grid.coord(ca), grid.coord(cb));
      return d * d;
    }
    int ai = ca / grid.n, aj = ca % grid.n;
    int bi = cb / grid.n, bj = cb % grid.n;
    double d0 = torus_dist(grid.coord(ai), grid.coord(bi));
    double d1 = torus_dist(grid.coord(aj), grid.coord(bj));
    return d0 * d0 + d1 * d1;
  };
  auto cost = [&](int i, int j) {
    return 0.5 * sq_dist(mu_cells[i], nu_cells[j]);
  };

  TransportSimplex simplex(sa, sb, cost);
  SimplexResult sr = simplex.run(simplex.northwest_basis(),
                                 200 * (int(sa.size()) + int(sb.size())) + 2000);

  LpDetail det;
  det.pivots = sr.pivots;
  det.result.method = OtMethod::lp_oracle;
  det.result.w2_squared = 2.0 * sr.cost;
  det.result.marginal_error = 0.0;
  det.result.phi =
      fill_and_center_phi(grid, mu_cells, sr.psi, nu_cells, sr.phi);
  for (const SimplexArc& arc : sr.basis)
    if (arc.flow > 0.0)
      det.plan.push_back({mu_cells[arc.i], nu_cells[arc.j], arc.flow});

  double dual = 0.0;
  for (std::size_t t = 0; t < sa.size(); ++t) dual += sa[t] * sr.psi[t];
  for (std::size_t t = 0; t < sb.size(); ++t) dual += sb[t] * sr.phi[t];
  det.duality_gap = sr.cost - dual;
  return det;
}

TransportResult w2_lp_oracle(const Density& mu, const Density& nu) {
  return w2_lp_detail(mu, nu).result;
}

// ---------------------------------------------------------------------------
// Log-domain Sinkhorn
// ---------------------------------------------------------------------------

namespace {

struct SinkhornProblem {
  const TorusGrid* grid;
  std::vector<double> logwa, logwb;  // log cell masses (kNegInf at zeros)
  std::vector<double> c1;            // n x n torus half-cost along one axis
  int n;

  double cost1(int i, int j) const { return c1[std::size_t(i) * n + j]; }
};

SinkhornProblem make_problem(const Density& mu, const Density& nu) {
  SinkhornProblem p;
  p.grid = &mu.grid();
  p.n = p.grid->n;
  const double vol = p.grid->cell_volume();
  p.logwa.resize(mu.size());
  p.logwb.resize(nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    p.logwa[i] = mu[i] > 0.0 ? std::log(mu[i] * vol) : kNegInf;
  for (std::size_t i = 0; i < nu.size(); ++i)
    p.logwb[i] = nu[i] > 0.0 ? std::log(nu[i] * vol) : kNegInf;
  p.c1.resize(std::size_t(p.n) * p.n);
  for (int i = 0; i < p.n; ++i)
    for (int j = 0; j < p.n; ++j) {
      double d = torus_dist(p.grid->coord(i), p.grid->coord(j));
      p.c1[std::size_t(i) * p.n + j] = 0.5 * d * d;
    }
  return p;
}

double lse(const std::vector<double>& terms) {
  double m = kNegInf;
  for (double t : terms) m = std::max(m, t);
  if (m <= kNegInf) return kNegInf;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

// One half-update: given source potential fs (on the `from` side with log
// weights logw_from), computes the softmin potential on the other side.
// 1D direct O(n^2); 2D separable O(n^3).
void softmin_update(const SinkhornProblem& p, double eps,
                    const std::vector<double>& fs,
                    const std::vector<double>& logw_from,
                    std::vector<double>& out) {
  const int n = p.n;
  if (p.grid->dim == 1) {
    std::vector<double> terms(n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i)
        terms[i] = logw_from[i] > kNegInf
                       ? (fs[i] - p.cost1(i, j)) / eps + logw_from[i]
                       : kNegInf;
      out[j] = -eps * lse(terms);
    }
    return;
  }
  // 2D: cost(i1,i2;j1,j2) = c1(i1,j1) + c1(i2,j2)
  std::vector<double> M(std::size_t(n) * n);  // M(i1, j2)
  std::vector<double> terms(n);
  for (int i1 = 0; i1 < n; ++i1) {
    for (int j2 = 0; j2 < n; ++j2) {
      for (int i2 = 0; i2 < n; ++i2) {
        std::size_t c = std::size_t(i1) * n + i2;
        terms[i2] = logw_from[c] > kNegInf
                        ? (fs[c] - p.cost1(i2, j2)) / eps + logw_from[c]
                        : kNegInf;
      }
      M[std::size_t(i1) * n + j2] = lse(terms);
    }
  }
  for (int j1 = 0; j1 < n; ++j1)
    for (int j2 = 0; j2 < n; ++j2) {
      for (int i1 = 0; i1 < n; ++i1)
        terms[i1] = M[std::size_t(i1) * n + j2] - p.cost1(i1, j1) / eps;
      out[std::size_t(j1) * n + j2] = -eps * lse(terms);
    }
}

struct SinkhornRun {
  double value = 0.0;          // dual value sum wa f + sum wb g
  double marginal_error = 0.0;
  int iters = 0;
};

// Alternating updates at one eps level until the column-marginal L1 error
// drops below tol.  f, g are updated in place (warm starts).
SinkhornRun sinkhorn_level(const SinkhornProblem& p, double eps, double tol,
                           int max_iters, std::vector<double>& f,
                           std::vector<double>& g) {
  const std::size_t N = p.logwa.size();
  std::vector<double> gt(N);
  SinkhornRun run;
  double err = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iters; ++it) {
    softmin_update(p, eps, g, p.logwb, f);    // rows now exact
    softmin_update(p, eps, f, p.logwa, gt);   // fresh column potential
    err = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      if (p.logwb[j] <= kNegInf) continue;  // zero-mass column
      double w = std::exp(p.logwb[j]);
      err += w * std::fabs(std::exp((g[j] - gt[j]) / eps) - 1.0);
    }
    g = gt;
    run.iters = it + 1;
    if (err <= tol) break;
  }
  run.marginal_error = err;
  double v = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    if (p.logwa[i] > kNegInf) v += std::exp(p.logwa[i]) * f[i];
    if (p.logwb[i] > kNegInf) v += std::exp(p.logwb[i]) * g[i];
  }
  run.value = v;
  for (double x : f)
    if (!std::isfinite(x) && x != kNegInf)
      throw NumericalUnderflow("sinkhorn: potential became non-finite");
  return run;
}

// Full continuation from cfg.eps_start down to cfg.eps.
SinkhornRun sinkhorn_solve(const SinkhornProblem& p, const EntropicConfig& cfg,
                           std::vector<double>& f, std::vector<double>& g,
                           bool warm_at_target) {
  const std::size_t N = p.logwa.size();
  if (f.size() != N) f.assign(N, 0.0);
  if (g.size() != N) g.assign(N, 0.0);
  SinkhornRun run;
  if (warm_at_target) {
    run = sinkhorn_level(p, cfg.eps, cfg.tol, cfg.max_iters, f, g);
    return run;
  }
  double eps = std::max(cfg.eps, cfg.eps_start);
  while (true) {
    bool last = eps <= cfg.eps * (1.0 + 1e-12);
    double tol = last ? cfg.tol : std::max(cfg.tol, 1e-4);
    run = sinkhorn_level(p, eps, tol, cfg.max_iters, f, g);
    if (last) break;
    eps = std::max(cfg.eps, 0.5 * eps);
  }
  return run;
}

}  // namespace

TransportResult w2_entropic(const Density& mu, const Density& nu,
                            const EntropicConfig& cfg, SinkhornState* warm) {
  require_same_grid(mu.grid(), nu.grid(), "w2_entropic");
  if (!(cfg.eps > 0.0))
    throw ValidationError("w2_entropic: eps must be positive");
  const TorusGrid& grid = mu.grid();
  SinkhornProblem p = make_problem(mu, nu);
  const std::size_t N = grid.cells();

  bool have_warm = warm && warm->eps == cfg.eps && warm->f.size() == N;
  std::vector<double> f = have_warm ? warm->f : std::vector<double>();
  std::vector<double> g = have_warm ? warm->g : std::vector<double>();
  SinkhornRun main_run = sinkhorn_solve(p, cfg, f, g, have_warm);

  TransportResult res;
  res.method = OtMethod::entropic;
  res.marginal_error = main_run.marginal_error;

  std::vector<double> phi = g;
  double value = 2.0 * main_run.value;  // half-cost duals -> d^2 cost

  if (cfg.debias) {
    SinkhornProblem pmm = make_problem(mu, mu);
    SinkhornProblem pnn = make_problem(nu, nu);
    std::vector<double> fm = have_warm ? warm->fmu : std::vector<double>();
    std::vector<double> gm = have_warm ? warm->gmu : std::vector<double>();
    std::vector<double> fn = have_warm ? warm->fnu : std::vector<double>();
    std::vector<double> gn = have_warm ? warm->gnu : std::vector<double>();
    bool wmm = have_warm && fm.size() == N;
    SinkhornRun rmm = sinkhorn_solve(pmm, cfg, fm, gm, wmm);
    SinkhornRun rnn = sinkhorn_solve(pnn, cfg, fn, gn, wmm);
    value = 2.0 * (main_run.value - 0.5 * rmm.value - 0.5 * rnn.value);
    for (std::size_t i = 0; i < N; ++i) phi[i] -= gn[i];
    if (warm) {
      warm->fmu = std::move(fm);
      warm->gmu = std::move(gm);
      warm->fnu = std::move(fn);
      warm->gnu = std::move(gn);
    }
  }
  res.w2_squared = std::max(0.0, value);

  double mean = 0.0;
  for (double x : phi) mean += x;
  mean /= double(N);
  ScalarField pf(grid);
  for (std::size_t i = 0; i < N; ++i) pf.v[i] = phi[i] - mean;
  res.phi = pf;

  if (warm) {
    warm->f = std::move(f);
    warm->g = std::move(g);
    warm->eps = cfg.eps;
  }
  return res;
}

VectorField potential_gradient_velocity(const TransportResult& res,
                                        double tau) {
  if (!(tau > 0.0))
    throw ValidationError("potential_gradient_velocity: tau must be positive");
  VectorField v = grad(res.phi);
  const TorusGrid& g = res.phi.grid;
  for (int a = 0; a < g.dim; ++a)
    for (double& x : v.comp[a]) x /= tau;
  return v;
}

ScalarField c_transform(const ScalarField& phi, const Density& support_side) {
  require_same_grid(phi.grid, support_side.grid(), "c_transform");
  const TorusGrid& grid = phi.grid;
  ScalarField out(grid);
  for (std::size_t x = 0; x < grid.cells(); ++x) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < grid.cells(); ++y) {
      if (!(support_side[y] > 0.0)) continue;
      double d2;
      if (grid.dim == 1) {
        double d = torus_dist(grid.coord(int(x)), grid.coord(int(y)));
        d2 = d * d;
      } else {
        int xi = int(x) / grid.n, xj = int(x) % grid.n;
        int yi = int(y) / grid.n, yj = int(y) % grid.n;
        double d0 = torus_dist(grid.coord(xi), grid.coord(yi));
        double d1 = torus_dist(grid.coord(xj), grid.coord(yj));
        d2 = d0 * d0 + d1 * d1;
      }
      best = std::min(best, 0.5 * d2 - phi.v[y]);
    }
    out.v[x] = best;
  }
  return out;
}

}  // namespace tvflow

namespace tvflow {

TransportSpec default_transport(const TorusGrid& grid) {
  TransportSpec spec;
  spec.method = grid.dim == 1 ? OtMethod::exact_1d_cells : OtMethod::entropic;
  return spec;
}

TransportResult solve_transport(const Density& mu, const Density& nu,
                                const TransportSpec& spec,
                                SinkhornState* warm) {
  switch (spec.method) {
    case OtMethod::exact_1d:
      return w2_exact_1d(mu, nu);
    case OtMethod::exact_1d_cells:
      return w2_exact_1d_cells(mu, nu);
    case OtMethod::lp_oracle:
      return w2_lp_oracle(mu, nu);
    case OtMethod::entropic:
      return w2_entropic(mu, nu, spec.entropic, warm);
  }
  throw ValidationError("solve_transport: unknown method");
}

}  // namespace tvflow
