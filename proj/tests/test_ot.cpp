#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tvflow/errors.hpp"
#include "tvflow/grid.hpp"
#include "tvflow/ot.hpp"

using namespace tvflow;

namespace {

constexpr double kPi = 3.14159265358979323846;

Density random_density(const TorusGrid& grid, std::mt19937_64& rng,
                       double spread = 0.8) {
  std::uniform_real_distribution<double> U(1.0 - spread, 1.0 + spread);
  std::vector<double> v(grid.cells());
  for (double& x : v) x = U(rng);
  return Density::normalized(grid, v);
}

Density smooth_density(const TorusGrid& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> v(grid.cells(), 1.0);
  if (grid.dim == 1) {
    for (int m = 1; m <= 3; ++m) {
      const double a = 0.3 * U(rng) / m, b = 0.3 * U(rng) / m;
      for (int i = 0; i < grid.n; ++i) {
        const double x = (i + 0.5) * grid.h();
        v[i] += a * std::cos(2.0 * kPi * m * x) + b * std::sin(2.0 * kPi * m * x);
      }
    }
  } else {
    const double a = 0.3 * U(rng), b = 0.3 * U(rng);
    for (int i = 0; i < grid.n; ++i)
      for (int j = 0; j < grid.n; ++j) {
        const double x = (i + 0.5) * grid.h(), y = (j + 0.5) * grid.h();
        v[std::size_t(i) * grid.n + j] += a * std::cos(2.0 * kPi * x) +
                                          b * std::sin(2.0 * kPi * y);
      }
  }
  return Density::normalized(grid, v);
}

// Narrow bump at center c over a small constant floor.
Density bump_density(const TorusGrid& grid, double c, double width,
                     double floor_level) {
  std::vector<double> v(grid.cells());
  for (int i = 0; i < grid.n; ++i) {
    const double x = (i + 0.5) * grid.h();
    const double d = torus_dist(x, c);
    v[i] = floor_level + std::exp(-0.5 * (d / width) * (d / width));
  }
  return Density::normalized(grid, v);
}

double dual_pairing(const Density& w, const ScalarField& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.v.size(); ++i) s += w[i] * f.v[i];
  return s * w.grid().cell_volume();
}

}  // namespace

TEST_CASE("transporting a density onto itself is free") {
  std::mt19937_64 rng(31);
  TorusGrid grid = make_grid(1, 48);
  Density mu = random_density(grid, rng);

  TransportResult ex = w2_exact_1d(mu, mu);
  CHECK(ex.w2_squared <= 1e-14);
  CHECK(ex.marginal_error == 0.0);
  CHECK(sup_norm(ex.phi) <= 1e-9);

  TransportResult lp = w2_lp_oracle(mu, mu);
  CHECK(lp.w2_squared <= 1e-12);

  TransportResult en = w2_entropic(mu, mu);
  CHECK(en.w2_squared <= 1e-8);  // debiased value vanishes on the diagonal
}

TEST_CASE("exact 1d agrees with the simplex oracle") {
  std::mt19937_64 rng(404);
  TorusGrid grid = make_grid(1, 32);
  for (int trial = 0; trial < 20; ++trial) {
    Density mu = random_density(grid, rng);
    Density nu = random_density(grid, rng);
    TransportResult ex = w2_exact_1d(mu, nu);
    LpDetail lp = w2_lp_detail(mu, nu);
    CHECK(std::fabs(ex.w2_squared - lp.result.w2_squared) <= 1e-9);
    CHECK(ex.marginal_error == 0.0);
    CHECK(lp.duality_gap <= 1e-9);

    // plan marginals reproduce the inputs
    std::vector<double> row(grid.cells(), 0.0), col(grid.cells(), 0.0);
    for (const PlanEntry& e : lp.plan) {
      REQUIRE(e.mass >= -1e-15);
      row[e.i] += e.mass;
      col[e.j] += e.mass;
    }
    const double vol = grid.cell_volume();
    for (int i = 0; i < grid.n; ++i) {
      CHECK(std::fabs(row[i] - mu[i] * vol) <= 1e-12);
      CHECK(std::fabs(col[i] - nu[i] * vol) <= 1e-12);
    }
  }
}

TEST_CASE("cell-uniform 1d transport") {
  std::mt19937_64 rng(77);

  SUBCASE("self transport is exactly free") {
    TorusGrid grid = make_grid(1, 48);
    Density mu = random_density(grid, rng);
    TransportResult r = w2_exact_1d_cells(mu, mu);
    CHECK(r.w2_squared == 0.0);
    CHECK(sup_norm(r.phi) <= 1e-15);
  }

  SUBCASE("value approaches the atomic one at rate h^2") {
    std::vector<double> gaps;
    for (int n : {32, 64, 128}) {
      TorusGrid grid = make_grid(1, n);
      std::mt19937_64 local(5);
      Density mu = smooth_density(grid, local);
      Density nu = smooth_density(grid, local);
      double wc = w2_exact_1d_cells(mu, nu).w2_squared;
      double wa = w2_exact_1d(mu, nu).w2_squared;
      gaps.push_back(std::fabs(wc - wa));
    }
    CHECK(gaps[0] <= 1e-2);
    // each refinement should cut the quadrature gap by roughly four
    CHECK(gaps[1] <= 0.35 * gaps[0]);
    CHECK(gaps[2] <= 0.35 * gaps[1]);
  }

  SUBCASE("potential is the gradient of the squared cost") {
    TorusGrid grid = make_grid(1, 64);
    Density mu = smooth_density(grid, rng);
    Density nu = smooth_density(grid, rng);
    TransportResult r = w2_exact_1d_cells(mu, nu);
    // mass-preserving central differences in the cell values:
    // d(W2^2/2)/dt along nu + t (e_j - e_k)/vol equals phi_j - phi_k
    const double t = 1e-6;
    const int k = 3;
    const std::vector<double>& base = nu.values();
    for (int j = 11; j < grid.n; j += 13) {
      std::vector<double> vp = base, vm = base;
      vp[j] += t;
      vp[k] -= t;
      vm[j] -= t;
      vm[k] += t;
      double wp = w2_exact_1d_cells(mu, Density(grid, vp)).w2_squared;
      double wm = w2_exact_1d_cells(mu, Density(grid, vm)).w2_squared;
      double fd = (wp - wm) / (4.0 * t * grid.cell_volume());
      CHECK(std::fabs(fd - (r.phi.v[j] - r.phi.v[k])) <= 1e-7);
    }
  }

  SUBCASE("matched plateaus with a tiny tilt stay quiet") {
    // the atomic matching is maximally degenerate here; the cell-uniform
    // problem keeps both the value and the potential at the scale of the tilt
    TorusGrid grid = make_grid(1, 64);
    std::vector<double> va(grid.cells(), 1.0), vb(grid.cells(), 1.0);
    for (int i = 16; i < 48; ++i) {
      va[i] = 1.5;
      vb[i] = 1.5;
    }
    for (int i = 0; i < grid.n; ++i)
      vb[i] += 1e-9 * std::sin(2.0 * kPi * (i + 0.5) * grid.h());
    Density mu = Density::normalized(grid, va);
    Density nu = Density::normalized(grid, vb);
    TransportResult r = w2_exact_1d_cells(mu, nu);
    CHECK(r.w2_squared <= 1e-16);
    CHECK(sup_norm(r.phi) <= 1e-8);
  }

  SUBCASE("positivity is required") {
    TorusGrid grid = make_grid(1, 16);
    std::vector<double> v(grid.cells(), 16.0 / 15.0);
    v[4] = 0.0;
    Density flat = Density::normalized(grid, std::vector<double>(16, 1.0));
    CHECK_THROWS_AS(w2_exact_1d_cells(Density(grid, v), flat),
                    ValidationError);
  }
}

TEST_CASE("translated bump costs the squared shift") {
  TorusGrid grid = make_grid(1, 128);
  const double width = 0.02, floor_level = 1e-3;

  SUBCASE("plain shift") {
    Density mu = bump_density(grid, 0.30, width, floor_level);
    Density nu = bump_density(grid, 0.55, width, floor_level);
    TransportResult res = w2_exact_1d(mu, nu);
    CHECK(std::fabs(res.w2_squared - 0.0625) <= 0.05 * 0.0625);
    TransportResult back = w2_exact_1d(nu, mu);
    CHECK(std::fabs(res.w2_squared - back.w2_squared) <= 1e-12);
  }
  SUBCASE("shift across the seam uses the short way around") {
    Density mu = bump_density(grid, 0.10, width, floor_level);
    Density nu = bump_density(grid, 0.85, width, floor_level);
    TransportResult res = w2_exact_1d(mu, nu);
    CHECK(std::fabs(res.w2_squared - 0.0625) <= 0.05 * 0.0625);
  }
}

TEST_CASE("shift equivariance of the exact cost") {
  std::mt19937_64 rng(77);
  TorusGrid grid = make_grid(1, 40);
  Density mu = random_density(grid, rng);
  Density nu = random_density(grid, rng);
  const double base = w2_exact_1d(mu, nu).w2_squared;
  for (int k : {1, 7, 23}) {
    Density mu_s(grid, shift(mu.field(), 0, k).v);
    Density nu_s(grid, shift(nu.field(), 0, k).v);
    CHECK(std::fabs(w2_exact_1d(mu_s, nu_s).w2_squared - base) <= 1e-12);
  }
}

TEST_CASE("potential certifies the value through duality") {
  std::mt19937_64 rng(555);
  TorusGrid grid = make_grid(1, 32);
  for (int trial = 0; trial < 5; ++trial) {
    Density mu = random_density(grid, rng);
    Density nu = random_density(grid, rng);
    TransportResult res = w2_exact_1d(mu, nu);

    double mean_phi = 0.0;
    for (double x : res.phi.v) mean_phi += x;
    CHECK(std::fabs(mean_phi / grid.n) <= 1e-12);

    ScalarField psi = c_transform(res.phi, nu);
    const double dual = dual_pairing(mu, psi) + dual_pairing(nu, res.phi);
    CHECK(std::fabs(dual - 0.5 * res.w2_squared) <=
          1e-9 * (1.0 + res.w2_squared));

    // c-concavity: transforming back loses nothing
    ScalarField phi2 = c_transform(psi, mu);
    for (int i = 0; i < grid.n; ++i) CHECK(phi2.v[i] >= res.phi.v[i] - 1e-9);
  }
}

TEST_CASE("entropic value tracks the exact one") {
  // The debiased value follows the continuum cost, so the grid has to be
  // fine enough that the cell-quadrature gap of the exact value sits well
  // inside the tolerance (it shrinks like h^2).
  std::mt19937_64 rng(808);
  TorusGrid grid = make_grid(1, 256);
  Density mu = smooth_density(grid, rng);
  Density nu = smooth_density(grid, rng);
  const double exact = w2_exact_1d(mu, nu).w2_squared;
  REQUIRE(exact > 1e-8);

  EntropicConfig cfg;
  TransportResult en = w2_entropic(mu, nu, cfg);
  CHECK(en.method == OtMethod::entropic);
  CHECK(en.marginal_error <= 1e-8);
  CHECK(std::fabs(en.w2_squared - exact) <= 1e-2 * exact);

  SUBCASE("warm started solve reproduces the value") {
    SinkhornState warm;
    TransportResult first = w2_entropic(mu, nu, cfg, &warm);
    CHECK(warm.eps == doctest::Approx(cfg.eps).epsilon(1e-12));
    TransportResult second = w2_entropic(mu, nu, cfg, &warm);
    CHECK(std::fabs(first.w2_squared - second.w2_squared) <=
          1e-8 * (1.0 + exact));
  }
}

TEST_CASE("entropic matches the simplex oracle on a small 2d instance") {
  std::mt19937_64 rng(909);
  TorusGrid grid = make_grid(2, 16);
  Density mu = smooth_density(grid, rng);
  Density nu = smooth_density(grid, rng);
  const double exact = w2_lp_oracle(mu, nu).w2_squared;
  REQUIRE(exact > 1e-8);
  // On a grid this coarse the continuum and cell-supported costs differ by
  // far more than the tolerance, so push eps into the regime where the
  // divergence resolves the actual atoms (error there shrinks like eps).
  EntropicConfig cfg;
  cfg.eps = 1e-5;
  TransportResult en = w2_entropic(mu, nu, cfg);
  CHECK(std::fabs(en.w2_squared - exact) <= 2e-2 * exact);
}

TEST_CASE("velocity scales inversely with the step length") {
  TorusGrid grid = make_grid(1, 128);
  Density mu = bump_density(grid, 0.40, 0.02, 1e-3);
  Density nu = bump_density(grid, 0.60, 0.02, 1e-3);
  TransportResult res = w2_exact_1d(mu, nu);

  const double tau = 0.1;
  VectorField v1 = potential_gradient_velocity(res, tau);
  VectorField v2 = potential_gradient_velocity(res, 2.0 * tau);
  for (std::size_t i = 0; i < v1.comp[0].size(); ++i)
    CHECK(v1.comp[0][i] == doctest::Approx(2.0 * v2.comp[0][i]).epsilon(1e-12));

  // mass-weighted displacement of nu under grad(phi) recovers the shift
  VectorField gphi = grad(res.phi);
  double mw = 0.0;
  for (int i = 0; i < grid.n; ++i) {
    const int prev = (i + grid.n - 1) % grid.n;
    mw += nu[i] * 0.5 * (gphi.comp[0][i] + gphi.comp[0][prev]);
  }
  mw *= grid.cell_volume();
  CHECK(std::fabs(mw - 0.2) <= 0.01);
}

TEST_CASE("method selection and guards") {
  TorusGrid g1 = make_grid(1, 32);
  TorusGrid g2 = make_grid(2, 8);
  CHECK(default_transport(g1).method == OtMethod::exact_1d_cells);
  CHECK(default_transport(g2).method == OtMethod::entropic);

  std::mt19937_64 rng(11);
  Density mu = random_density(g1, rng);
  Density nu = random_density(g1, rng);
  TransportSpec spec;
  spec.method = OtMethod::exact_1d;
  TransportResult a = solve_transport(mu, nu, spec);
  TransportResult b = w2_exact_1d(mu, nu);
  CHECK(a.w2_squared == b.w2_squared);
  spec.method = OtMethod::lp_oracle;
  CHECK(solve_transport(mu, nu, spec).method == OtMethod::lp_oracle);

  TorusGrid big = make_grid(2, 65);  // 4225 cells, over the oracle's limit
  Density ubig(big, std::vector<double>(big.cells(), 1.0));
  CHECK_THROWS_AS(w2_lp_oracle(ubig, ubig), TooLarge);

  TorusGrid other = make_grid(1, 48);
  Density w = random_density(other, rng);
  CHECK_THROWS_AS(w2_exact_1d(mu, w), GridMismatch);
  Density m2 = random_density(g2, rng);
  CHECK_THROWS_AS(w2_exact_1d(m2, m2), DimensionError);
}
