#ifndef TVFLOW_TV_HPP
#define TVFLOW_TV_HPP

#include <functional>
#include <vector>

#include "tvflow/grid.hpp"

namespace tvflow {

/// Isotropic discrete total variation:
///   J(rho) = sum_i |grad(rho)(i)|_2 * h^dim
/// with the forward-difference gradient.  Nonnegative, 1-homogeneous,
/// invariant under cyclic shifts and under adding constants.
double total_variation(const ScalarField& rho);
double total_variation(const Density& rho);

/// A function together with a candidate dual certificate.  For an admissible
/// z (per-cell magnitude <= 1) the identity
///   J(rho) = max_z <grad(rho), z>
/// makes gap = J(rho) + <rho, div z> nonnegative, and gap ~ 0 certifies that
/// -div z is a subgradient of J at rho.
struct CertifiedPair {
  ScalarField rho;
  VectorField z;
  double gap = 0.0;
  double sup_norm_violation = 0.0;  // max(0, sup_i |z(i)| - 1)
};

/// gap = J(rho) + sum_i rho(i) div(z)(i) h^dim.
double certificate_gap(const ScalarField& rho, const VectorField& z);

/// Builds a pair and fills in gap / sup-norm violation.
CertifiedPair make_certified_pair(const ScalarField& rho,
                                  const VectorField& z);
CertifiedPair make_certified_pair(const Density& rho, const VectorField& z);

struct CertificateReport {
  double gap = 0.0;
  double sup_norm_violation = 0.0;
  double tol_gap = 0.0;
  double tol_z = 0.0;
  double j_value = 0.0;
  bool pass = false;
};

/// Checks admissibility of z and smallness of the certificate gap.
CertificateReport check_pair(const ScalarField& rho, const VectorField& z,
                             double tol_gap, double tol_z = 1e-12);
CertificateReport check_pair(const Density& rho, const VectorField& z,
                             double tol_gap, double tol_z = 1e-12);

/// Applies a strictly increasing map s -> g(s) to the function of a certified
/// pair, keeping the same z, and recomputes the gap.  Monotonicity is checked
/// by sampled finite differences over [min rho, max rho]; a non-increasing
/// map throws NonMonotoneMap.  In 1D the gap scales exactly with the secant
/// slopes; in 2D it may grow by O(h) times the Lipschitz constant of g.
CertifiedPair contrast_change(const CertifiedPair& pair,
                              const std::function<double(double)>& map);

/// sum_i grad(rho)(i) . grad(div z)(i) h^dim.  For a pair with small gap this
/// is <= 2 dim gap / h^2, and <= ~0 for converged certificates.
double check_drhodz(const ScalarField& rho, const VectorField& z);

/// For each threshold t: discrete perimeter of {rho >= t} (TV of the 0/1
/// indicator) compared against the divergence integral over the set.  With
/// the sign conventions of grad/div here the layer-cake identity reads
///   Per({rho >= t}) = - sum_{rho >= t} div(z)(i) h^dim,
/// so the reported mismatch is max_t |Per + sum div z h^dim|.
double check_levelsets(const ScalarField& rho, const VectorField& z,
                       const std::vector<double>& thresholds);

}  // namespace tvflow

#endif
