// End-to-end acceptance suite.  Each numbered check prints one PASS/FAIL
// line with the measured quantities; the process exits nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "pg_oracle.hpp"
#include "tvflow/diagnostics.hpp"
#include "tvflow/errors.hpp"
#include "tvflow/flow.hpp"
#include "tvflow/grid.hpp"
#include "tvflow/io.hpp"
#include "tvflow/jko.hpp"
#include "tvflow/ot.hpp"
#include "tvflow/rof.hpp"
#include "tvflow/tv.hpp"

using namespace tvflow;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kPi = 3.14159265358979323846;

// pinned tolerances, one block per numbered check
constexpr double kRofSupTol = 1e-6;        // 1: solver vs oracle, L-inf
constexpr double kRofGapTol = 1e-10;       // 1: certified duality gap
constexpr double kRofSecondsPer = 1.0;     // 1: runtime per instance
constexpr double kH1Seconds = 30.0;        // 2: runtime, whole block
constexpr double kOtCrossTol = 1e-9;       // 3: |exact - simplex|
constexpr double kOtEntropicRel = 1e-2;    // 3: entropic relative error
constexpr double kJkoObjTol = 1e-6;        // 4: objective vs oracle
constexpr double kJkoResidualRel = 1e-4;   // 4: residual_dev bound
constexpr double kJkoProbeSlack = 1e-9;    // 4: perturbation probe slack
constexpr double kMinPrincipleEps = 1e-6;  // 5: min >= min0 - (eps + 10 h)
constexpr double kFlow1dSeconds = 60.0;    // 5: 1D runtime
constexpr double kFlow2dSeconds = 600.0;   // 5: 2D runtime
constexpr double kMaxPrincipleRel = 1e-8;  // 6
constexpr double kMonotonicityRel = 1e-8;  // 7
constexpr double kDecaySlack = 1.2;        // 9
constexpr double kDecayExponent = -0.8;    // 9
constexpr double kPoincareCurvature = 2.0; // 10: |ratio-1| <= 2 h^2
constexpr double kHolderCalTol = 1e-6;     // 11
constexpr double kHolderDrift = 0.2;       // 11: tau-halving stability
constexpr double kEnergyBoundTol = 1e-6;   // 12
constexpr double kFluxDropFactor = 0.1;    // 13

int g_failures = 0;

void report(int idx, const char* name, bool pass, const std::string& detail) {
  if (!pass) ++g_failures;
  std::printf("%2d %-22s %s  %s\n", idx, name, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

ScalarField band_limited(const TorusGrid& grid, std::mt19937_64& rng,
                         int modes, double amp) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  ScalarField g(grid, 0.0);
  if (grid.dim == 1) {
    for (int m = 1; m <= modes; ++m) {
      const double a = amp * U(rng) / m, b = amp * U(rng) / m;
      for (int i = 0; i < grid.n; ++i) {
        const double x = (i + 0.5) * grid.h();
        g.v[i] += a * std::cos(2.0 * kPi * m * x) +
                  b * std::sin(2.0 * kPi * m * x);
      }
    }
  } else {
    for (int mx = 0; mx <= modes; ++mx)
      for (int my = (mx == 0) ? 1 : 0; my <= modes; ++my) {
        const double a = amp * U(rng) / (mx + my), b = amp * U(rng) / (mx + my);
        for (int i = 0; i < grid.n; ++i)
          for (int j = 0; j < grid.n; ++j) {
            const double x = (i + 0.5) * grid.h(), y = (j + 0.5) * grid.h();
            const double ph = 2.0 * kPi * (mx * x + my * y);
            g.v[std::size_t(i) * grid.n + j] +=
                a * std::cos(ph) + b * std::sin(ph);
          }
      }
  }
  return g;
}

ScalarField jumpy_1d(const TorusGrid& grid, std::mt19937_64& rng) {
  ScalarField g = band_limited(grid, rng, 6, 0.5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int cut = int(U(rng) * grid.n);
  const double height = 0.5 + U(rng);
  for (int j = 0; j < grid.n / 2; ++j)
    g.v[std::size_t((cut + j) % grid.n)] += height;
  return g;
}

struct NamedFlow {
  std::string name;
  Trajectory traj;
  double seconds = 0.0;
  MinMax range0{0.0, 0.0};
};

NamedFlow run_named(const std::string& name, const Density& rho0,
                    const JkoConfig& cfg, int steps) {
  std::fprintf(stderr, "[acceptance] running flow %s (%d steps, n=%d, dim=%d)\n",
               name.c_str(), steps, rho0.grid().n, rho0.grid().dim);
  NamedFlow nf;
  nf.name = name;
  nf.range0 = minmax(rho0);
  const auto t0 = Clock::now();
  nf.traj = run_flow(rho0, cfg, steps);
  nf.seconds = seconds_since(t0);
  std::fprintf(stderr, "[acceptance] flow %s done in %.1fs (completed=%d)\n",
               name.c_str(), nf.seconds, int(nf.traj.completed));
  return nf;
}

JkoConfig flow_config(double tau, double eps, double c) {
  JkoConfig cfg;
  cfg.tau = tau;
  cfg.barrier.eps = eps;
  cfg.barrier.c = c;
  return cfg;
}

}  // namespace

// 1 ------------------------------------------------------------------------
static void check_rof_agreement() {
  std::mt19937_64 rng(101);
  TorusGrid grid = make_grid(1, 128);
  RofConfig cfg;
  cfg.fidelity = 1.0;
  cfg.gap_tol = 1e-12;
  double worst_sup = 0.0, worst_gap = 0.0, worst_time = 0.0;
  bool ok = true;
  for (int seed = 0; seed < 50; ++seed) {
    ScalarField g = jumpy_1d(grid, rng);
    const auto t0 = Clock::now();
    RofSolution sol = rof_solve(g, cfg);
    ScalarField ts = taut_string_1d(g, cfg.fidelity);
    const double dt = seconds_since(t0);
    double sup = 0.0;
    for (int i = 0; i < grid.n; ++i)
      sup = std::max(sup, std::fabs(sol.u.v[i] - ts.v[i]));
    worst_sup = std::max(worst_sup, sup);
    worst_gap = std::max(worst_gap, sol.gap);
    worst_time = std::max(worst_time, dt);
    ok = ok && sup <= kRofSupTol && sol.gap <= kRofGapTol &&
         dt < kRofSecondsPer;
  }
  report(1, "rof_vs_taut_string", ok,
         fmt("50 instances n=128: sup|u-oracle| max %.2e (tol %.0e), gap max "
             "%.2e (tol %.0e), slowest %.2fs (limit %.0fs)",
             worst_sup, kRofSupTol, worst_gap, kRofGapTol, worst_time,
             kRofSecondsPer));
}

// 2 ------------------------------------------------------------------------
static void check_rof_h1() {
  std::mt19937_64 rng(202);
  RofConfig cfg;
  cfg.fidelity = 8.0;
  cfg.gap_tol = 1e-10;
  const auto t0 = Clock::now();
  bool ok = true;
  double worst_rel = 0.0;
  for (int dim : {1, 2}) {
    TorusGrid grid = make_grid(dim, 64);
    for (int seed = 0; seed < 20; ++seed) {
      ScalarField g = band_limited(grid, rng, dim == 1 ? 6 : 3, 0.5);
      RofSolution sol = rof_solve(g, cfg);
      EstimateCheck chk = rof_h1_estimate(sol, g);
      ok = ok && chk.pass;
      if (chk.rhs > 0.0)
        worst_rel = std::max(worst_rel, chk.lhs / chk.rhs - 1.0);
    }
  }
  const double dt = seconds_since(t0);
  ok = ok && dt < kH1Seconds;
  report(2, "rof_gradient_estimate", ok,
         fmt("20 band-limited data per dim at n=64: worst lhs/rhs-1 %.2e "
             "(slack 1e-6), total %.1fs (limit %.0fs)",
             worst_rel, dt, kH1Seconds));
}

// 3 ------------------------------------------------------------------------
static void check_ot_cross_validation() {
  std::mt19937_64 rng(303);
  TorusGrid g32 = make_grid(1, 32);
  std::uniform_real_distribution<double> U(0.2, 1.8);
  double worst_diff = 0.0;
  bool ok = true;
  for (int pair = 0; pair < 20; ++pair) {
    std::vector<double> a(g32.cells()), b(g32.cells());
    for (double& x : a) x = U(rng);
    for (double& x : b) x = U(rng);
    Density mu = Density::normalized(g32, a);
    Density nu = Density::normalized(g32, b);
    const double d =
        std::fabs(w2_exact_1d(mu, nu).w2_squared -
                  w2_lp_oracle(mu, nu).w2_squared);
    worst_diff = std::max(worst_diff, d);
    ok = ok && d <= kOtCrossTol;
  }

  TorusGrid g128 = make_grid(1, 128);
  std::vector<double> a(g128.cells(), 1.0), b(g128.cells(), 1.0);
  for (int i = 0; i < g128.n; ++i) {
    const double x = (i + 0.5) * g128.h();
    a[i] += 0.5 * std::cos(2.0 * kPi * x) + 0.2 * std::sin(4.0 * kPi * x);
    b[i] += 0.4 * std::sin(2.0 * kPi * x) - 0.2 * std::cos(6.0 * kPi * x);
  }
  Density mu = Density::normalized(g128, a);
  Density nu = Density::normalized(g128, b);
  const double exact = w2_exact_1d(mu, nu).w2_squared;
  EntropicConfig ecfg;  // eps 5e-4, debiased
  const double entropic = w2_entropic(mu, nu, ecfg).w2_squared;
  const double rel = std::fabs(entropic - exact) / exact;
  ok = ok && rel <= kOtEntropicRel;
  report(3, "ot_cross_validation", ok,
         fmt("exact vs simplex on 20 pairs n=32: max |dW2^2| %.2e (tol %.0e); "
             "entropic eps=5e-4 n=128: rel err %.2e (tol %.0e)",
             worst_diff, kOtCrossTol, rel, kOtEntropicRel));
}

// 4 ------------------------------------------------------------------------
static void check_jko_optimality() {
  JkoConfig cfg;
  cfg.tau = 0.05;
  cfg.barrier.eps = 1e-3;
  cfg.barrier.c = 0.05;

  // n = 8 reference instance vs the 50-start oracle
  TorusGrid g8 = make_grid(1, 8);
  std::vector<double> v8(8);
  for (int i = 0; i < 8; ++i) v8[i] = i < 4 ? 2.0 : 1.0;
  Density prev8 = Density::normalized(g8, v8);
  JkoStepResult step8 = jko_step(prev8, cfg);
  pg_oracle::PgResult oracle =
      pg_oracle::pg_multistart(prev8, cfg.tau, cfg.barrier, 50, 800, 9001);
  const double obj_diff = std::fabs(oracle.objective - step8.objective);
  const double dz_norm = lp_norm(div(step8.z), 2);
  const bool residual_ok =
      step8.residual_dev <= kJkoResidualRel * (dz_norm + 1.0);

  // n = 16 instance: mass-preserving random probes cannot improve
  TorusGrid g16 = make_grid(1, 16);
  std::vector<double> v16(16);
  for (int i = 0; i < 16; ++i) v16[i] = i < 8 ? 2.0 : 1.0;
  Density prev16 = Density::normalized(g16, v16);
  JkoStepResult step16 = jko_step(prev16, cfg);
  const double obj16 = pg_oracle::step_objective(
      prev16, std::vector<double>(step16.rho_next.values()), cfg.tau,
      cfg.barrier);
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> cell(0, 15);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double scales[] = {1e-4, 1e-3, 1e-2};
  int improved = 0, probes = 0;
  double best_drop = 0.0;
  while (probes < 10000) {
    std::vector<double> s(step16.rho_next.values());
    const int i = cell(rng);
    const int j = cell(rng);
    if (i == j) continue;
    const double amp = scales[probes % 3] * U(rng);
    if (s[j] - amp <= cfg.barrier.c + 1e-9) continue;
    s[i] += amp;
    s[j] -= amp;
    const double obj = pg_oracle::step_objective(prev16, s, cfg.tau,
                                                 cfg.barrier);
    if (obj < obj16 - kJkoProbeSlack * (1.0 + obj16)) {
      ++improved;
      best_drop = std::max(best_drop, obj16 - obj);
    }
    ++probes;
  }

  const bool ok = step8.converged && step16.converged &&
                  obj_diff <= kJkoObjTol && residual_ok && improved == 0;
  report(4, "jko_step_optimality", ok,
         fmt("n=8 vs 50-start oracle: |dobj| %.2e (tol %.0e); residual_dev "
             "%.2e <= %.0e*(||div z||+1)=%.2e; n=16: %d/%d probes improved",
             obj_diff, kJkoObjTol, step8.residual_dev, kJkoResidualRel,
             kJkoResidualRel * (dz_norm + 1.0), improved, probes));
}

// 5..13 share the acceptance flows -----------------------------------------
struct FlowSet {
  NamedFlow a;    // 1D step, 50 steps
  NamedFlow b;    // 2D checkerboard, 20 steps
  NamedFlow c;    // 1D squarewave n=256, 200 steps
  NamedFlow d1;   // rough datum, tau
  NamedFlow d2;   // rough datum, tau/2
  std::vector<const NamedFlow*> all() const { return {&a, &b, &c, &d1, &d2}; }
};

static void check_min_principle(const FlowSet& flows) {
  bool ok = true;
  std::string detail;
  for (const NamedFlow* nf : {&flows.a, &flows.b}) {
    const double h = nf->traj.grid.h();
    const double bound = nf->range0.min - (kMinPrincipleEps + 10.0 * h);
    double worst = nf->range0.min;
    for (const FlowRecord& r : nf->traj.records) worst = std::min(worst, r.min);
    ok = ok && nf->traj.completed && worst >= bound;
    detail += fmt("%s: min %.4f >= %.4f in %.0fs; ", nf->name.c_str(), worst,
                  bound, nf->seconds);
  }
  ok = ok && flows.a.seconds < kFlow1dSeconds &&
       flows.b.seconds < kFlow2dSeconds;
  report(5, "minimum_principle", ok,
         detail + fmt("limits %.0fs / %.0fs", kFlow1dSeconds, kFlow2dSeconds));
}

static void check_max_principle(const FlowSet& flows) {
  bool ok = true;
  double worst_rel = 0.0;
  for (const NamedFlow* nf : flows.all()) {
    const double cap = nf->range0.max * (1.0 + kMaxPrincipleRel);
    for (const FlowRecord& r : nf->traj.records) {
      worst_rel = std::max(worst_rel, r.max / nf->range0.max - 1.0);
      ok = ok && r.max <= cap;
    }
  }
  report(6, "maximum_principle", ok,
         fmt("all flows: worst max/max0-1 = %.2e (tol %.0e)", worst_rel,
             kMaxPrincipleRel));
}

static void check_convex_monotonicity(const FlowSet& flows) {
  bool ok = true;
  double worst = 0.0;
  for (const NamedFlow* nf : flows.all())
    for (const char* name : {"square", "entropy", "cube", "inverse_square"}) {
      MonotonicityReport rep =
          convex_monotonicity(nf->traj, convex_preset(name), kMonotonicityRel);
      ok = ok && rep.pass;
      worst = std::max(worst, rep.worst_increase);
    }
  report(7, "convex_monotonicity", ok,
         fmt("4 integrands x 5 flows: worst step increase %.2e (slack "
             "%.0e*scale)",
             worst, kMonotonicityRel));
}

static void check_dissipation(const FlowSet& flows) {
  DissipationSweep sweep = dissipation_sweep(flows.a.traj, 5);
  report(8, "dissipation_windows", sweep.pass,
         fmt("1D flow, all %d windows with t-s >= 5 tau: %d failures, worst "
             "margin %.2e",
             sweep.windows, sweep.failures, sweep.worst_margin));
}

static void check_decay_envelope(const FlowSet& flows) {
  bool ok = false;
  std::string detail;
  try {
    DecayReport rep = decay_envelope(flows.c.traj, 0.1, 1.9, kDecaySlack);
    ok = rep.pass && rep.fit_exponent <= kDecayExponent;
    detail = fmt("kappa=19: %d violations, worst J/envelope %.3f, late-window "
                 "slope %.3f (need <= %.1f)",
                 rep.violations, rep.worst_ratio, rep.fit_exponent,
                 kDecayExponent);
  } catch (const Error& e) {
    detail = std::string("threw ") + e.what();
  }
  report(9, "tv_decay_envelope", ok, detail);
}

static void check_appendix_inequalities(const FlowSet& flows) {
  bool gn_ok = true;
  int certs = 0;
  for (const NamedFlow* nf : flows.all())
    for (const VectorField& z : nf->traj.certs) {
      gn_ok = gn_ok && gn_check(z).pass;
      ++certs;
    }

  bool poi_ok = true;
  double worst_curv = 0.0;
  for (int n : {64, 256}) {
    TorusGrid grid = make_grid(1, n);
    ScalarField u(grid);
    for (int i = 0; i < n; ++i)
      u.v[i] = std::cos(2.0 * kPi * (i + 0.5) * grid.h());
    EstimateCheck chk = poincare_check(u);
    const double curv = std::fabs(chk.lhs / chk.rhs - 1.0) / (grid.h() * grid.h());
    worst_curv = std::max(worst_curv, curv);
    poi_ok = poi_ok && chk.pass && curv <= kPoincareCurvature;
  }
  std::mt19937_64 rng(1010);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    TorusGrid grid = make_grid(trial % 2 + 1, trial % 2 == 0 ? 64 : 16);
    ScalarField u(grid);
    double mean = 0.0;
    for (double& x : u.v) {
      x = U(rng);
      mean += x;
    }
    mean /= double(u.v.size());
    for (double& x : u.v) x -= mean;
    poi_ok = poi_ok && poincare_check(u).pass;
  }

  report(10, "appendix_inequalities", gn_ok && poi_ok,
         fmt("interpolation bound on %d certificates: %s; first-mode "
             "|ratio-1|/h^2 = %.2f (cap %.1f); 50 random fields pass: %s",
             certs, gn_ok ? "all pass" : "FAIL", worst_curv,
             kPoincareCurvature, poi_ok ? "yes" : "no"));
}

static double holder_of_flow(const Trajectory& traj) {
  std::vector<double> times;
  times.push_back(0.0);
  for (const FlowRecord& r : traj.records) times.push_back(r.t);
  auto dist = [&](std::size_t a, std::size_t b) {
    return std::sqrt(w2_exact_1d(traj.snapshots[a], traj.snapshots[b])
                         .w2_squared);
  };
  return holder_modulus(times, dist, 2.0, 1.0 / 3.0).c_prime;
}

static void check_holder(const FlowSet& flows) {
  std::vector<double> times;
  for (int k = 0; k <= 10; ++k) times.push_back(0.1 * k);
  auto omega = [&](std::size_t a, std::size_t b) {
    return std::cbrt(times[b] - times[a]);
  };
  HolderReport cal = holder_modulus(times, omega, 2.0, 1.0 / 3.0);
  const bool cal_ok = std::fabs(cal.c_prime - 1.0) <= kHolderCalTol;

  const double c1 = holder_of_flow(flows.d1.traj);
  const double c2 = holder_of_flow(flows.d2.traj);
  const double drift = std::fabs(c2 - c1) / c1;
  const bool ok = cal_ok && drift <= kHolderDrift;
  report(11, "holder_modulus", ok,
         fmt("calibration C'=%.8f (want 1 +- %.0e); rough flow C' %.4f -> "
             "%.4f under tau halving, drift %.1f%% (cap %.0f%%)",
             cal.c_prime, kHolderCalTol, c1, c2, 100.0 * drift,
             100.0 * kHolderDrift));
}

static void check_energy_bound(const FlowSet& flows) {
  bool ok = true;
  std::string detail;
  for (const NamedFlow* nf : flows.all()) {
    MetricDerivativeReport rep = metric_derivative_estimate(nf->traj);
    const bool here = rep.half_sum <= rep.f0 + kEnergyBoundTol;
    ok = ok && here;
    detail += fmt("%s %.3f<=%.3f ", nf->name.c_str(), rep.half_sum, rep.f0);
  }
  report(12, "step_energy_bound", ok,
         detail + fmt("(slack %.0e)", kEnergyBoundTol));
}

static void check_eps_continuation() {
  TorusGrid grid = make_grid(1, 64);
  Density rho0 = make_datum(grid, "step",
                            {{"lo", 0.5}, {"hi", 1.5}, {"x0", 0.25},
                             {"x1", 0.75}});
  JkoConfig base = flow_config(0.02, 1e-3, 0.1);
  std::fprintf(stderr, "[acceptance] running eps continuation flows\n");
  EpsContinuationReport rep =
      eps_continuation(rho0, base, 25, {1e-2, 1e-3, 1e-4});
  const bool flux_ok =
      rep.penalty_flux.back() <= kFluxDropFactor * rep.penalty_flux.front();
  const bool ok = rep.distances_decreasing && flux_ok;
  report(13, "eps_continuation", ok,
         fmt("L2 gaps %.3e -> %.3e (decreasing: %s); flux %.3e -> %.3e "
             "(need <= %.1fx)",
             rep.pairwise_l2.front(), rep.pairwise_l2.back(),
             rep.distances_decreasing ? "yes" : "no", rep.penalty_flux.front(),
             rep.penalty_flux.back(), kFluxDropFactor));
}

static void check_determinism(const FlowSet& flows) {
  // rerun the rough-datum flow from scratch and compare trajectory bytes
  TorusGrid grid = make_grid(1, 64);
  Density rho0 = make_datum(grid, "squarewave",
                            {{"mean", 1.0}, {"amp", 0.9}, {"m", 8.0}});
  JkoConfig cfg = flow_config(0.02, 1e-3, 0.05);
  Trajectory again = run_flow(rho0, cfg, 20);

  fs::path dir = fs::temp_directory_path() / "tvflow-acceptance";
  fs::create_directories(dir);
  const std::string p1 = (dir / "traj_first.csv").string();
  const std::string p2 = (dir / "traj_second.csv").string();
  write_trajectory_csv(p1, flows.d1.traj);
  write_trajectory_csv(p2, again);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)),
                       std::istreambuf_iterator<char>());
  const std::string b2((std::istreambuf_iterator<char>(f2)),
                       std::istreambuf_iterator<char>());
  const bool ok = !b1.empty() && b1 == b2;
  report(14, "determinism", ok,
         fmt("repeated 20-step run: trajectory tables %zu bytes, byte-equal: "
             "%s",
             b1.size(), ok ? "yes" : "no"));
}

int main() {
  std::printf("acceptance checks\n-----------------\n");
  check_rof_agreement();
  check_rof_h1();
  check_ot_cross_validation();
  check_jko_optimality();

  FlowSet flows;
  {
    TorusGrid g128 = make_grid(1, 128);
    Density step0 = make_datum(g128, "step",
                               {{"lo", 0.5}, {"hi", 1.5}, {"x0", 0.25},
                                {"x1", 0.75}});
    flows.a = run_named("1d-step", step0, flow_config(0.02, 1e-3, 0.1), 50);

    TorusGrid g32 = make_grid(2, 32);
    Density cb0 = make_datum(g32, "checkerboard",
                             {{"lo", 0.5}, {"hi", 1.5}, {"m", 4.0}});
    JkoConfig cfg2 = flow_config(0.02, 1e-3, 0.1);
    cfg2.transport = default_transport(g32);
    flows.b = run_named("2d-checker", cb0, cfg2, 20);

    TorusGrid g256 = make_grid(1, 256);
    Density sq0 = make_datum(g256, "squarewave",
                             {{"mean", 1.0}, {"amp", 0.9}, {"m", 16.0}});
    flows.c = run_named("1d-squarewave", sq0, flow_config(5e-3, 1e-3, 0.05),
                        200);

    TorusGrid g64 = make_grid(1, 64);
    Density rough = make_datum(g64, "squarewave",
                               {{"mean", 1.0}, {"amp", 0.9}, {"m", 8.0}});
    flows.d1 = run_named("rough-tau", rough, flow_config(0.02, 1e-3, 0.05), 20);
    flows.d2 =
        run_named("rough-tau/2", rough, flow_config(0.01, 1e-3, 0.05), 40);
  }
  bool flows_ok = true;
  for (const NamedFlow* nf : flows.all()) {
    if (!nf->traj.completed) {
      std::printf("!! flow %s did not complete: %s\n", nf->name.c_str(),
                  nf->traj.error.c_str());
      flows_ok = false;
    }
  }
  if (!flows_ok) ++g_failures;

  check_min_principle(flows);
  check_max_principle(flows);
  check_convex_monotonicity(flows);
  check_dissipation(flows);
  check_decay_envelope(flows);
  check_appendix_inequalities(flows);
  check_holder(flows);
  check_energy_bound(flows);
  check_eps_continuation();
  check_determinism(flows);

  std::printf("-----------------\n%s (%d failure%s)\n",
              g_failures == 0 ? "all checks passed" : "CHECKS FAILED",
              g_failures, g_failures == 1 ? "" : "s");
  return g_failures == 0 ? 0 : 1;
}
