#include "tvflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tvflow {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

ConvexTestFunction make_convex_test(std::string name,
                                    std::function<double(double)> h,
                                    double domain_min) {
  // sampled second differences over a wide positive range
  const int samples = 1000;
  const double lo = std::max(domain_min * (1.0 + 1e-9) + 1e-6, 1e-3);
  const double hi = 10.0;
  const double d = (hi - lo) / samples;
  for (int i = 1; i < samples; ++i) {
    double s = lo + i * d;
    double dd = h(s - d) - 2.0 * h(s) + h(s + d);
    if (dd < -1e-10 * (1.0 + std::fabs(h(s))))
      throw ValidationError("convex test '" + name +
                            "': sampled second difference negative at s = " +
                            std::to_string(s));
  }
  ConvexTestFunction fn;
  fn.name = std::move(name);
  fn.h = std::move(h);
  fn.domain_min = domain_min;
  return fn;
}

ConvexTestFunction convex_preset(const std::string& name) {
  if (name == "square")
    return make_convex_test("square", [](double s) { return s * s; },
                            -std::numeric_limits<double>::infinity());
  if (name == "entropy")
    return make_convex_test("entropy",
                            [](double s) { return s * std::log(s); }, 0.0);
  if (name == "cube")
    return make_convex_test("cube", [](double s) { return s * s * s; }, 0.0);
  if (name == "inverse_square")
    return make_convex_test("inverse_square",
                            [](double s) { return 1.0 / (s * s); }, 0.0);
  throw UnknownPreset("convex_preset: '" + name + "'");
}

double convex_integral(const Density& rho, const ConvexTestFunction& H) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] > H.domain_min))
      throw RangeViolation("convex_integral('" + H.name + "'): value " +
                           std::to_string(rho[i]) + " outside domain");
    sum += H.h(rho[i]);
  }
  return sum * rho.grid().cell_volume();
}

MonotonicityReport convex_monotonicity(const Trajectory& traj,
                                       const ConvexTestFunction& H,
                                       double rel) {
  MonotonicityReport rep;
  rep.name = H.name;
  if (traj.snapshots.empty()) return rep;
  double prev = convex_integral(traj.snapshots.front(), H);
  rep.initial = prev;
  rep.final_value = prev;
  for (std::size_t k = 1; k < traj.snapshots.size(); ++k) {
    double cur = convex_integral(traj.snapshots[k], H);
    double inc = cur - prev;
    if (inc > rel * (1.0 + std::fabs(prev))) {
      ++rep.violations;
      rep.worst_increase = std::max(rep.worst_increase, inc);
    }
    prev = cur;
    rep.final_value = cur;
  }
  rep.pass = rep.violations == 0;
  return rep;
}

namespace {

struct DissipationSeries {
  std::vector<double> j;     // J at snapshot k, k = 0..K
  std::vector<double> mins;  // min density at snapshot k
  std::vector<double> diss;  // sum |grad(div z_k)|^2 h^d of step k, k = 1..K
};

DissipationSeries dissipation_series(const Trajectory& traj) {
  DissipationSeries ser;
  const int K = traj.steps_completed;
  ser.j.push_back(total_variation(traj.snapshots[0]));
  ser.mins.push_back(minmax(traj.snapshots[0]).min);
  ser.diss.push_back(0.0);  // unused slot for k = 0
  for (int k = 1; k <= K; ++k) {
    ser.j.push_back(traj.records[k - 1].j);
    ser.mins.push_back(minmax(traj.snapshots[k]).min);
    double g = lp_norm(grad(div(traj.certs[k - 1])), 2);
    ser.diss.push_back(g * g);
  }
  return ser;
}

DissipationReport dissipation_window(const DissipationSeries& ser, double tau,
                                     int s, int t) {
  double alpha = std::numeric_limits<double>::infinity();
  double diss = 0.0;
  for (int k = s; k <= t; ++k) alpha = std::min(alpha, ser.mins[k]);
  for (int k = s + 1; k <= t; ++k) diss += ser.diss[k];
  DissipationReport rep;
  rep.lhs = ser.j[s] - ser.j[t];
  rep.rhs = 0.95 * alpha * tau * diss;
  rep.margin = rep.lhs - rep.rhs;
  rep.pass = rep.margin >= -1e-8 - 1e-9 * (1.0 + std::fabs(rep.lhs));
  return rep;
}

}  // namespace

DissipationReport dissipation_check(const Trajectory& traj, int s_idx,
                                    int t_idx) {
  if (s_idx < 0 || t_idx <= s_idx || t_idx > traj.steps_completed)
    throw ValidationError("dissipation_check: need 0 <= s < t <= steps");
  return dissipation_window(dissipation_series(traj), traj.cfg.tau, s_idx,
                            t_idx);
}

DissipationSweep dissipation_sweep(const Trajectory& traj,
                                   int min_window_steps) {
  if (min_window_steps < 1)
    throw ValidationError("dissipation window must be >= 1 step");
  DissipationSweep rep;
  const int K = traj.steps_completed;
  DissipationSeries ser = dissipation_series(traj);
  for (int s = 0; s + min_window_steps <= K; ++s) {
    double alpha = ser.mins[s];
    double diss = 0.0;
    for (int t = s + 1; t <= K; ++t) {
      alpha = std::min(alpha, ser.mins[t]);
      diss += ser.diss[t];
      if (t - s < min_window_steps) continue;
      double lhs = ser.j[s] - ser.j[t];
      double rhs = 0.95 * alpha * traj.cfg.tau * diss;
      double margin = lhs - rhs;
      ++rep.windows;
      if (margin < -1e-8 - 1e-9 * (1.0 + std::fabs(lhs))) {
        ++rep.failures;
        rep.worst_margin = std::min(rep.worst_margin, margin);
      }
    }
  }
  rep.pass = rep.windows > 0 && rep.failures == 0;
  return rep;
}

EstimateCheck poincare_check(const ScalarField& u) {
  const double h = u.grid.h();
  double mean = 0.0;
  for (double x : u.v) mean += x;
  mean /= double(u.size());
  double var = 0.0;
  for (double x : u.v) var += (x - mean) * (x - mean);
  VectorField gu = grad(u);
  double g2 = lp_norm(gu, 2);
  EstimateCheck ec;
  ec.lhs = 4.0 * kPi * kPi * var * u.grid.cell_volume();
  ec.rhs = g2 * g2;
  ec.pass = ec.lhs <= ec.rhs * (1.0 + 10.0 * h) + 1e-12;
  return ec;
}

EstimateCheck gn_check(const VectorField& z) {
  const TorusGrid& grid = z.grid;
  const double h = grid.h();
  ScalarField w = div(z);
  double quart = 0.0;
  for (double x : w.v) quart += x * x * x * x;
  quart *= grid.cell_volume();
  double zs = sup_norm(z);
  double gw = lp_norm(grad(w), 2);
  EstimateCheck ec;
  ec.lhs = quart;
  ec.rhs = 9.0 * zs * zs * gw * gw * (1.0 + 20.0 * h);
  ec.pass = ec.lhs <= ec.rhs + 1e-12;
  return ec;
}

DecayReport decay_envelope_series(const std::vector<double>& times,
                                  const std::vector<double>& js,
                                  const std::vector<double>& mins,
                                  const std::vector<double>& maxs,
                                  double j0, double alpha, double beta,
                                  double slack) {
  if (!(alpha > 0.0) || !(beta >= alpha))
    throw ValidationError("decay_envelope needs 0 < alpha <= beta");
  if (times.size() != js.size() || times.size() != mins.size() ||
      times.size() != maxs.size())
    throw ValidationError("decay_envelope series lengths differ");
  DecayReport rep;
  rep.kappa = beta / alpha;
  rep.a_const = rep.kappa / (4.0 * kPi * kPi);
  rep.b_const = 3.0 * std::cbrt(rep.kappa);
  rep.j0 = j0;

  // the envelope rests on the comparison principle: bounds must persist
  const double btol = 1e-6 * (1.0 + beta);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (mins[i] < alpha - btol || maxs[i] > beta + btol)
      throw BoundsViolated(
          "decay_envelope: step " + std::to_string(i + 1) + " range [" +
          std::to_string(mins[i]) + ", " + std::to_string(maxs[i]) +
          "] escapes [" + std::to_string(alpha) + ", " +
          std::to_string(beta) + "]");
  }

  for (std::size_t i = 0; i < times.size(); ++i) {
    double env = slack * std::min({rep.a_const / times[i],
                                   rep.b_const * std::pow(times[i], -1.0 / 3.0),
                                   rep.j0});
    double ratio = env > 0.0 ? js[i] / env : 0.0;
    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
    if (js[i] > env) ++rep.violations;
  }

  // least-squares slope of log J against log t over the late half
  std::vector<double> xs, ys;
  for (std::size_t i = times.size() / 2; i < times.size(); ++i) {
    if (js[i] > 1e-12) {
      xs.push_back(std::log(times[i]));
      ys.push_back(std::log(js[i]));
    }
  }
  if (xs.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= double(xs.size());
    my /= double(xs.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      num += (xs[i] - mx) * (ys[i] - my);
      den += (xs[i] - mx) * (xs[i] - mx);
    }
    rep.fit_exponent = den > 0.0 ? num / den : 0.0;
  }
  rep.pass = rep.violations == 0;
  return rep;
}

DecayReport decay_envelope(const Trajectory& traj, double alpha, double beta,
                           double slack) {
  std::vector<double> ts, js, mins, maxs;
  for (const FlowRecord& rec : traj.records) {
    ts.push_back(rec.t);
    js.push_back(rec.j);
    mins.push_back(rec.min);
    maxs.push_back(rec.max);
  }
  double j0 = traj.snapshots.empty()
                  ? 0.0
                  : total_variation(traj.snapshots.front());
  return decay_envelope_series(ts, js, mins, maxs, j0, alpha, beta, slack);
}

double inverse_ode_decay_oracle(double c, double q, double t) {
  if (!(c > 0.0) || !(q > 1.0) || !(t > 0.0))
    throw ValidationError("inverse_ode_decay_oracle needs c > 0, q > 1, t > 0");
  return std::pow(c * (q - 1.0) * t, -1.0 / (q - 1.0));
}

std::vector<double> inverse_ode_decay_curve(double j0, double c, double q,
                                            const std::vector<double>& times) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times)
    out.push_back(t > 0.0 ? std::min(j0, inverse_ode_decay_oracle(c, q, t))
                          : j0);
  return out;
}

HolderReport holder_modulus(
    const std::vector<double>& times,
    const std::function<double(std::size_t, std::size_t)>& dist, double q,
    double gamma) {
  if (!(q > 1.0) || !(gamma > 0.0) || !(gamma < q - 1.0))
    throw ValidationError("holder_modulus needs q > 1 and 0 < gamma < q - 1");
  HolderReport rep;
  rep.exponent = 1.0 - (gamma + 1.0) / q;
  for (std::size_t a = 0; a < times.size(); ++a)
    for (std::size_t b = a + 1; b < times.size(); ++b) {
      double dt = times[b] - times[a];
      if (!(dt > 0.0)) continue;
      double ratio = dist(a, b) / std::pow(dt, rep.exponent);
      if (ratio > rep.c_prime) {
        rep.c_prime = ratio;
        rep.worst_a = a;
        rep.worst_b = b;
      }
    }
  return rep;
}

}  // namespace tvflow
