#include "tvflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tvflow {

TorusGrid make_grid(int dim, int n) {
  if (dim != 1 && dim != 2)
    throw DimensionError("grid dim must be 1 or 2, got " +
                         std::to_string(dim));
  if (n < 2)
    throw ValidationError("grid n must be at least 2, got " +
                          std::to_string(n));
  return TorusGrid{dim, n};
}

double torus_dist(double x, double y) {
  double d = std::fabs(x - y);
  d -= std::floor(d);
  return std::min(d, 1.0 - d);
}

void require_same_grid(const TorusGrid& a, const TorusGrid& b,
                       const char* where) {
  if (!(a == b))
    throw GridMismatch(std::string(where) + ": operands on different grids");
}

ScalarField::ScalarField(const TorusGrid& g, std::vector<double> values)
    : grid(g), v(std::move(values)) {
  if (v.size() != g.cells())
    throw ValidationError("field size does not match grid cell count");
}

Density::Density(const TorusGrid& g, std::vector<double> values)
    : field_(g, std::move(values)) {
  double m = 0.0;
  for (double s : field_.v) {
    if (!(s >= 0.0))
      throw ValidationError("density has a negative (or NaN) cell value");
    m += s;
  }
  m *= g.cell_volume();
  if (std::fabs(m - 1.0) > 1e-12)
    throw ValidationError("density mass is " + std::to_string(m) +
                          ", expected 1 within 1e-12");
}

Density Density::normalized(const TorusGrid& g, std::vector<double> values) {
  double m = 0.0;
  for (double s : values) m += s;
  m *= g.cell_volume();
  if (!(m > 0.0)) throw ValidationError("cannot normalize: total mass <= 0");
  for (double& s : values) s /= m;
  // One additive sweep kills the last bits of rounding in the scaled sum.
  double m2 = 0.0;
  for (double s : values) m2 += s;
  m2 *= g.cell_volume();
  double corr = (1.0 - m2) / (g.cells() * g.cell_volume());
  if (corr != 0.0)
    for (double& s : values) s += corr;
  return Density(g, std::move(values));
}

VectorField grad(const ScalarField& s) {
  const TorusGrid& g = s.grid;
  const double inv_h = double(g.n);
  VectorField out(g);
  if (g.dim == 1) {
    const int n = g.n;
    for (int i = 0; i < n; ++i) {
      int ip = (i + 1 == n) ? 0 : i + 1;
      out.comp[0][i] = (s.v[ip] - s.v[i]) * inv_h;
    }
  } else {
    const int n = g.n;
    for (int i = 0; i < n; ++i) {
      int ip = (i + 1 == n) ? 0 : i + 1;
      for (int j = 0; j < n; ++j) {
        int jp = (j + 1 == n) ? 0 : j + 1;
        std::size_t c = g.index(i, j);
        out.comp[0][c] = (s.v[g.index(ip, j)] - s.v[c]) * inv_h;
        out.comp[1][c] = (s.v[g.index(i, jp)] - s.v[c]) * inv_h;
      }
    }
  }
  return out;
}

ScalarField div(const VectorField& z) {
  const TorusGrid& g = z.grid;
  const double inv_h = double(g.n);
  ScalarField out(g);
  if (g.dim == 1) {
    const int n = g.n;
    for (int i = 0; i < n; ++i) {
      int im = (i == 0) ? n - 1 : i - 1;
      out.v[i] = (z.comp[0][i] - z.comp[0][im]) * inv_h;
    }
  } else {
    const int n = g.n;
    for (int i = 0; i < n; ++i) {
      int im = (i == 0) ? n - 1 : i - 1;
      for (int j = 0; j < n; ++j) {
        int jm = (j == 0) ? n - 1 : j - 1;
        out.v[g.index(i, j)] =
            (z.comp[0][g.index(i, j)] - z.comp[0][g.index(im, j)] +
             z.comp[1][g.index(i, j)] - z.comp[1][g.index(i, jm)]) *
            inv_h;
      }
    }
  }
  return out;
}

double mass(const ScalarField& s) {
  double m = 0.0;
  for (double x : s.v) m += x;
  return m * s.grid.cell_volume();
}

double mass(const Density& rho) { return mass(rho.field()); }

MinMax minmax(const ScalarField& s) {
  auto [lo, hi] = std::minmax_element(s.v.begin(), s.v.end());
  return {*lo, *hi};
}

MinMax minmax(const Density& rho) { return minmax(rho.field()); }

double lp_norm(const ScalarField& s, int p) {
  if (p != 1 && p != 2)
    throw ValidationError("lp_norm: p must be 1 or 2, got " +
                          std::to_string(p));
  double acc = 0.0;
  if (p == 1)
    for (double x : s.v) acc += std::fabs(x);
  else
    for (double x : s.v) acc += x * x;
  acc *= s.grid.cell_volume();
  return p == 1 ? acc : std::sqrt(acc);
}

double lp_norm(const VectorField& z, int p) {
  if (p != 1 && p != 2)
    throw ValidationError("lp_norm: p must be 1 or 2, got " +
                          std::to_string(p));
  const TorusGrid& g = z.grid;
  double acc = 0.0;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    double m2 = z.comp[0][i] * z.comp[0][i];
    if (g.dim == 2) m2 += z.comp[1][i] * z.comp[1][i];
    acc += (p == 1) ? std::sqrt(m2) : m2;
  }
  acc *= g.cell_volume();
  return p == 1 ? acc : std::sqrt(acc);
}

double sup_norm(const ScalarField& s) {
  double m = 0.0;
  for (double x : s.v) m = std::max(m, std::fabs(x));
  return m;
}

double sup_norm(const VectorField& z) {
  const TorusGrid& g = z.grid;
  double m = 0.0;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    double m2 = z.comp[0][i] * z.comp[0][i];
    if (g.dim == 2) m2 += z.comp[1][i] * z.comp[1][i];
    m = std::max(m, m2);
  }
  return std::sqrt(m);
}

double inner(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid, b.grid, "inner");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) acc += a.v[i] * b.v[i];
  return acc * a.grid.cell_volume();
}

double inner(const VectorField& a, const VectorField& b) {
  require_same_grid(a.grid, b.grid, "inner");
  double acc = 0.0;
  for (int c = 0; c < a.grid.dim; ++c)
    for (std::size_t i = 0; i < a.comp[c].size(); ++i)
      acc += a.comp[c][i] * b.comp[c][i];
  return acc * a.grid.cell_volume();
}

ScalarField shift(const ScalarField& s, int axis, int k) {
  const TorusGrid& g = s.grid;
  if (axis < 0 || axis >= g.dim)
    throw DimensionError("shift: axis out of range");
  ScalarField out(g);
  const int n = g.n;
  auto wrap = [n](int i) { return ((i % n) + n) % n; };
  if (g.dim == 1) {
    for (int i = 0; i < n; ++i) out.v[wrap(i + k)] = s.v[i];
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        int ii = axis == 0 ? wrap(i + k) : i;
        int jj = axis == 1 ? wrap(j + k) : j;
        out.v[g.index(ii, jj)] = s.v[g.index(i, j)];
      }
  }
  return out;
}

}  // namespace tvflow
