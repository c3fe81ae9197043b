#ifndef TVFLOW_GRID_HPP
#define TVFLOW_GRID_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "tvflow/errors.hpp"

namespace tvflow {

/// Uniform cell grid on the flat torus [0,1)^dim, dim in {1,2}.
/// Cell (i) or (i,j) has center ((i+0.5)h, (j+0.5)h), h = 1/n.
/// 2D storage is row-major: flat index = i*n + j.
struct TorusGrid {
  int dim = 1;
  int n = 0;

  double h() const { return 1.0 / n; }
  std::size_t cells() const {
    return dim == 1 ? std::size_t(n) : std::size_t(n) * std::size_t(n);
  }
  double cell_volume() const { return dim == 1 ? h() : h() * h(); }
  std::size_t index(int i, int j = 0) const {
    return dim == 1 ? std::size_t(i) : std::size_t(i) * n + j;
  }
  double coord(int i) const { return (i + 0.5) * h(); }

  bool operator==(const TorusGrid&) const = default;
};

/// Validated constructor: dim in {1,2}, n >= 2.
TorusGrid make_grid(int dim, int n);

/// Geodesic distance on the unit circle.
double torus_dist(double x, double y);

/// Plain scalar field (one value per cell).
struct ScalarField {
  TorusGrid grid;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const TorusGrid& g, double fill = 0.0)
      : grid(g), v(g.cells(), fill) {}
  ScalarField(const TorusGrid& g, std::vector<double> values);

  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  std::size_t size() const { return v.size(); }
};

/// Staggered vector field: component a at cell i lives on the forward edge
/// i -> i+e_a.  comp[1] is unused in 1D.
struct VectorField {
  TorusGrid grid;
  std::array<std::vector<double>, 2> comp;

  VectorField() = default;
  explicit VectorField(const TorusGrid& g) : grid(g) {
    for (int a = 0; a < g.dim; ++a) comp[a].assign(g.cells(), 0.0);
  }

  std::vector<double>& operator[](int a) { return comp[a]; }
  const std::vector<double>& operator[](int a) const { return comp[a]; }
};

/// Probability density: nonnegative values with unit mass (within 1e-12),
/// both enforced at construction.
class Density {
 public:
  Density() = default;
  Density(const TorusGrid& g, std::vector<double> values);

  const TorusGrid& grid() const { return field_.grid; }
  const std::vector<double>& values() const { return field_.v; }
  const ScalarField& field() const { return field_; }
  double operator[](std::size_t i) const { return field_.v[i]; }
  std::size_t size() const { return field_.v.size(); }

  /// Scales arbitrary positive data to unit mass, then validates.
  static Density normalized(const TorusGrid& g, std::vector<double> values);

 private:
  ScalarField field_;
};

/// Forward-difference gradient, component a at cell i: (s(i+e_a)-s(i))/h.
VectorField grad(const ScalarField& s);

/// Discrete divergence, the exact negative adjoint of grad:
/// sum_i div(z)(i)*s(i) = -sum_i,a z_a(i)*grad(s)_a(i) for every s.
/// Output has zero mean to machine precision.
ScalarField div(const VectorField& z);

/// Integral of the field: sum of values times cell volume.
double mass(const ScalarField& s);
double mass(const Density& rho);

struct MinMax {
  double min;
  double max;
};
MinMax minmax(const ScalarField& s);
MinMax minmax(const Density& rho);

/// L^p norm with cell-volume weights; p must be 1 or 2.  For vector fields
/// the per-cell magnitude is the Euclidean norm across components.
double lp_norm(const ScalarField& s, int p);
double lp_norm(const VectorField& z, int p);

/// Sup norm (max absolute value; max per-cell magnitude for vector fields).
double sup_norm(const ScalarField& s);
double sup_norm(const VectorField& z);

/// Weighted inner product sum_i a_i b_i h^dim.
double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);

/// Cyclic shift by k cells along the given axis (towards larger indices).
ScalarField shift(const ScalarField& s, int axis, int k);

void require_same_grid(const TorusGrid& a, const TorusGrid& b,
                       const char* where);

}  // namespace tvflow

#endif
