#ifndef TVFLOW_DIAGNOSTICS_HPP
#define TVFLOW_DIAGNOSTICS_HPP

#include <functional>
#include <string>
#include <vector>

#include "tvflow/flow.hpp"

namespace tvflow {

/// Convex integrand for internal-energy monotonicity checks.  Convexity is
/// verified at registration by sampled second differences; densities outside
/// (domain_min, inf) raise RangeViolation when the integral is evaluated.
struct ConvexTestFunction {
  std::string name;
  std::function<double(double)> h;
  double domain_min = 0.0;
};

/// Validates convexity on ~1000 sample points and returns the function.
ConvexTestFunction make_convex_test(std::string name,
                                    std::function<double(double)> h,
                                    double domain_min = 0.0);

/// Presets: "square" (s^2), "entropy" (s log s), "cube" (s^3),
/// "inverse_square" (s^-2).  Unknown names throw UnknownPreset.
ConvexTestFunction convex_preset(const std::string& name);

/// sum_i H(rho_i) h^dim; throws RangeViolation outside H's domain.
double convex_integral(const Density& rho, const ConvexTestFunction& H);

struct MonotonicityReport {
  std::string name;
  int violations = 0;
  double worst_increase = 0.0;  // most positive step increment
  double initial = 0.0, final_value = 0.0;
  bool pass = false;
};

/// Checks that sum H(rho_k) h^d is nonincreasing along the trajectory,
/// with per-step slack rel * (1 + |value|).
MonotonicityReport convex_monotonicity(const Trajectory& traj,
                                       const ConvexTestFunction& H,
                                       double rel = 1e-8);

struct DissipationReport {
  double lhs = 0.0;     // J(rho_s) - J(rho_t)
  double rhs = 0.0;     // 0.95 * alpha * tau * sum_k |grad(div z_k)|_2^2
  double margin = 0.0;  // lhs - rhs
  bool pass = false;
};

/// Energy-dissipation inequality over the snapshot window [s_idx, t_idx]
/// (index 0 is the datum):
///   J(rho_s) - J(rho_t) >= 0.95 * alpha * tau * sum_k sum |grad(div z_k)|^2 h^d
/// with alpha the smallest density value among the window's snapshots.
/// The per-step sums are recomputed from the stored certificates.
DissipationReport dissipation_check(const Trajectory& traj, int s_idx,
                                    int t_idx);

struct DissipationSweep {
  int windows = 0;
  int failures = 0;
  double worst_margin = 0.0;  // most negative lhs - rhs
  bool pass = false;
};

/// dissipation_check over every window with t - s >= min_window_steps.
DissipationSweep dissipation_sweep(const Trajectory& traj,
                                   int min_window_steps);

/// Zero-mean Poincare inequality on the torus, squared form:
///   lhs = 4 pi^2 sum (u - mean)^2 h^d,  rhs = sum |grad u|^2 h^d,
/// pass iff lhs <= rhs * (1 + 10 h).  The first Fourier mode attains
/// lhs/rhs = 1 + O(h^2).
EstimateCheck poincare_check(const ScalarField& u);

/// Quartic interpolation bound for admissible fields (|z| <= 1 scaled out):
///   sum (div z)^4 h^d <= 9 ||z||_inf^2 sum |grad(div z)|^2 h^d * (1 + 20 h).
EstimateCheck gn_check(const VectorField& z);

struct DecayReport {
  double kappa = 0.0;      // beta / alpha
  double a_const = 0.0;    // kappa / (4 pi^2)
  double b_const = 0.0;    // 3 kappa^(1/3)
  double j0 = 0.0;
  int violations = 0;
  double worst_ratio = 0.0;    // max over steps of J / envelope
  double fit_exponent = 0.0;   // log-log slope over the late half
  bool pass = false;
};

/// Envelope J(t) <= slack * min(A/t, B t^(-1/3), J(0)) with A, B built from
/// the datum's bounds alpha <= rho_0 <= beta.  Throws BoundsViolated if the
/// trajectory leaves [alpha, beta] beyond tolerance (the comparison principle
/// is the basis of the envelope).
DecayReport decay_envelope(const Trajectory& traj, double alpha, double beta,
                           double slack = 1.2);

/// Same envelope driven by raw series (times, TV values, per-step density
/// ranges), e.g. re-read from a trajectory table.  `j0` caps the envelope.
DecayReport decay_envelope_series(const std::vector<double>& times,
                                  const std::vector<double>& js,
                                  const std::vector<double>& mins,
                                  const std::vector<double>& maxs,
                                  double j0, double alpha, double beta,
                                  double slack = 1.2);

/// Explicit solution bound of the comparison ODE y' = -c y^q (q > 1):
/// any nonnegative supersolution satisfies y(t) <= [c (q-1) t]^(-1/(q-1)).
double inverse_ode_decay_oracle(double c, double q, double t);

/// Reference curve min(j0, [c (q-1) t]^(-1/(q-1))) sampled at `times`
/// (entries with t <= 0 yield j0).
std::vector<double> inverse_ode_decay_curve(double j0, double c, double q,
                                            const std::vector<double>& times);

struct HolderReport {
  double c_prime = 0.0;   // max over pairs of dist / (t_b - t_a)^exponent
  double exponent = 0.0;  // 1 - (gamma + 1) / q
  std::size_t worst_a = 0, worst_b = 0;
};

/// Holder-modulus constant of a sampled metric curve: with exponent
/// 1 - (gamma+1)/q (requires q > 1 and 0 < gamma < q - 1),
///   C' = max_{a<b} dist(a, b) / (t_b - t_a)^exponent.
/// `dist` is a distance callback on sample indices.
HolderReport holder_modulus(
    const std::vector<double>& times,
    const std::function<double(std::size_t, std::size_t)>& dist, double q,
    double gamma);

}  // namespace tvflow

#endif
