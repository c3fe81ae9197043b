#include "tvflow/tv.hpp"

#include <algorithm>
#include <cmath>

namespace tvflow {

double total_variation(const ScalarField& rho) {
  VectorField g = grad(rho);
  const TorusGrid& grid = rho.grid;
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    double m2 = g.comp[0][i] * g.comp[0][i];
    if (grid.dim == 2) m2 += g.comp[1][i] * g.comp[1][i];
    acc += std::sqrt(m2);
  }
  return acc * grid.cell_volume();
}

double total_variation(const Density& rho) {
  return total_variation(rho.field());
}

double certificate_gap(const ScalarField& rho, const VectorField& z) {
  require_same_grid(rho.grid, z.grid, "certificate_gap");
  return total_variation(rho) + inner(rho, div(z));
}

CertifiedPair make_certified_pair(const ScalarField& rho,
                                  const VectorField& z) {
  CertifiedPair p;
  p.rho = rho;
  p.z = z;
  p.gap = certificate_gap(rho, z);
  p.sup_norm_violation = std::max(0.0, sup_norm(z) - 1.0);
  return p;
}

CertifiedPair make_certified_pair(const Density& rho, const VectorField& z) {
  return make_certified_pair(rho.field(), z);
}

CertificateReport check_pair(const ScalarField& rho, const VectorField& z,
                             double tol_gap, double tol_z) {
  CertificateReport r;
  r.j_value = total_variation(rho);
  r.gap = r.j_value + inner(rho, div(z));
  r.sup_norm_violation = std::max(0.0, sup_norm(z) - 1.0);
  r.tol_gap = tol_gap;
  r.tol_z = tol_z;
  r.pass = (std::fabs(r.gap) <= tol_gap) && (r.sup_norm_violation <= tol_z);
  return r;
}

CertificateReport check_pair(const Density& rho, const VectorField& z,
                             double tol_gap, double tol_z) {
  return check_pair(rho.field(), z, tol_gap, tol_z);
}

CertifiedPair contrast_change(const CertifiedPair& pair,
                              const std::function<double(double)>& map) {
  MinMax mm = minmax(pair.rho);
  // Sampled strict monotonicity over the value range (widened slightly so a
  // constant field still gets a meaningful check).
  double lo = mm.min, hi = mm.max;
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const int samples = 1000;
  double prev = map(lo);
  for (int k = 1; k <= samples; ++k) {
    double s = lo + (hi - lo) * k / samples;
    double cur = map(s);
    if (!(cur > prev))
      throw NonMonotoneMap("contrast map is not strictly increasing near s=" +
                           std::to_string(s));
    prev = cur;
  }
  ScalarField mapped(pair.rho.grid);
  for (std::size_t i = 0; i < pair.rho.size(); ++i)
    mapped.v[i] = map(pair.rho.v[i]);
  return make_certified_pair(mapped, pair.z);
}

double check_drhodz(const ScalarField& rho, const VectorField& z) {
  require_same_grid(rho.grid, z.grid, "check_drhodz");
  return inner(grad(rho), grad(div(z)));
}

double check_levelsets(const ScalarField& rho, const VectorField& z,
                       const std::vector<double>& thresholds) {
  require_same_grid(rho.grid, z.grid, "check_levelsets");
  ScalarField dz = div(z);
  const double vol = rho.grid.cell_volume();
  double worst = 0.0;
  for (double t : thresholds) {
    ScalarField ind(rho.grid);
    double flux = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (rho.v[i] >= t) {
        ind.v[i] = 1.0;
        flux += dz.v[i];
      }
    }
    double per = total_variation(ind);
    worst = std::max(worst, std::fabs(per + flux * vol));
  }
  return worst;
}

}  // namespace tvflow
