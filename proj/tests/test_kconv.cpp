#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dweuler/diagnostics.hpp"
#include "dweuler/ic.hpp"
#include "dweuler/kconv.hpp"

using namespace dweuler;

namespace {

const GasParams kGas(1.4);

Field random_state(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rho(0.5, 2.0), u(-1.0, 1.0), p(0.5, 3.0);
  Field f(Grid(n), kStateComponents);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const auto q = to_conservative({rho(rng), u(rng), u(rng), p(rng)}, kGas);
      for (int c = 0; c < 4; ++c) {
        f(i, j, c) = q[c];
      }
    }
  }
  return f;
}

Atom random_atom(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  return {d(rng), d(rng), d(rng), d(rng)};
}

double distance(const Atom& a, const Atom& b) {
  double s = 0.0;
  for (int c = 0; c < 4; ++c) {
    s += (a[c] - b[c]) * (a[c] - b[c]);
  }
  return std::sqrt(s);
}

// Minimum over all permutations of the mean matched distance after
// replicating both atom lists to a common length.
double brute_force_w1(const std::vector<Atom>& a, const std::vector<Atom>& b) {
  const int L = std::lcm(static_cast<int>(a.size()), static_cast<int>(b.size()));
  std::vector<Atom> x, y;
  for (int k = 0; k < L; ++k) {
    x.push_back(a[k * a.size() / L]);
    y.push_back(b[k * b.size() / L]);
  }
  std::vector<int> perm(L);
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double s = 0.0;
    for (int k = 0; k < L; ++k) {
      s += distance(x[k], y[perm[k]]);
    }
    best = std::min(best, s / L);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

} // namespace

TEST_CASE("ordered mean") {
  const std::vector<double> v{1.0, 2.0, 4.0};
  CHECK(ordered_mean(v) == doctest::Approx(7.0 / 3.0).epsilon(1e-15));
  const std::vector<double> one{3.5};
  CHECK(ordered_mean(one) == 3.5);
}

TEST_CASE("Cesaro averages") {
  const std::vector<Field> states{random_state(8, 1), random_state(16, 2), random_state(32, 3)};
  const Ensemble ens = Ensemble::build(states, kGas);
  CHECK(ens.grid().n_x() == 8);
  CHECK(ens.size() == 3);

  SUBCASE("N = 1 is the first member") {
    const CesaroFields c = cesaro(ens, 1);
    CHECK(c.rho == states[0].component(kRho));
    CHECK(c.entropy == entropy_field(states[0], kGas));
  }
  SUBCASE("direct mean of restricted members") {
    const CesaroFields c = cesaro(ens, 3);
    const Field r1 = restrict_to(states[1], Grid(8));
    const Field r2 = restrict_to(states[2], Grid(8));
    const Field s2 = restrict_to(entropy_field(states[2], kGas), Grid(8));
    const Field s1 = restrict_to(entropy_field(states[1], kGas), Grid(8));
    const Field s0 = entropy_field(states[0], kGas);
    for (int j = 0; j < 8; ++j) {
      for (int i = 0; i < 8; ++i) {
        CHECK(std::abs(c.rho(i, j, 0) -
                       (states[0](i, j, kRho) + r1(i, j, kRho) + r2(i, j, kRho)) / 3.0) < 1e-15);
        CHECK(std::abs(c.momentum(i, j, 1) -
                       (states[0](i, j, kMomY) + r1(i, j, kMomY) + r2(i, j, kMomY)) / 3.0) < 1e-15);
        CHECK(std::abs(c.entropy(i, j, 0) - (s0(i, j, 0) + s1(i, j, 0) + s2(i, j, 0)) / 3.0) <
              1e-14);
      }
    }
  }
  SUBCASE("invalid levels") {
    CHECK_THROWS_AS(cesaro(ens, 0), UsageError);
    CHECK_THROWS_AS(cesaro(ens, 4), UsageError);
  }
  CHECK_THROWS_AS(Ensemble::build({random_state(16, 1), random_state(8, 2)}, kGas), UsageError);
}

TEST_CASE("defects of two atoms with equal density and entropy") {
  // Only the momenta differ: R = dm (x) dm / (4 rho), E = |dm|^2 / (8 rho).
  const Primitive a{1.5, 0.4, -0.2, 2.0};
  const Primitive b{1.5, -0.6, 0.5, 2.0};
  const Field fa = constant_state(Grid(4), a, kGas);
  const Field fb = constant_state(Grid(4), b, kGas);
  const Ensemble ens = Ensemble::build({fa, fb}, kGas);
  const DefectField d = defects(ens, 2, kGas);
  const double dm1 = 1.5 * (0.4 + 0.6);
  const double dm2 = 1.5 * (-0.2 - 0.5);
  const double rho = 1.5;
  CHECK(d.reynolds(1, 2, 0) == doctest::Approx(dm1 * dm1 / (4 * rho)).epsilon(1e-13));
  CHECK(d.reynolds(1, 2, 1) == doctest::Approx(dm1 * dm2 / (4 * rho)).epsilon(1e-13));
  CHECK(d.reynolds(1, 2, 2) == doctest::Approx(dm2 * dm2 / (4 * rho)).epsilon(1e-13));
  CHECK(d.energy(1, 2, 0) == doctest::Approx((dm1 * dm1 + dm2 * dm2) / (8 * rho)).epsilon(1e-13));
  CHECK(d.lambda1(1, 2, 0) == doctest::Approx((dm1 * dm1 + dm2 * dm2) / (4 * rho)).epsilon(1e-13));
  CHECK(std::abs(d.lambda2(1, 2, 0)) < 1e-14);

  const DefectParts parts = defect_parts(ens, 2, kGas);
  CHECK(std::abs(parts.internal(0, 0, 0)) < 1e-14);
  CHECK(parts.kinetic(0, 0, 0) == doctest::Approx(d.energy(0, 0, 0)).epsilon(1e-13));

  const Field packed = d.packed();
  CHECK(packed.components() == 6);
  CHECK(packed(1, 2, 3) == d.energy(1, 2, 0));
}

TEST_CASE("symmetric eigenvalues") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 1000; ++k) {
    const double a = u(rng), b = u(rng), c = u(rng);
    const auto ev = symmetric_eigenvalues(a, b, c);
    CHECK(ev[0] >= ev[1]);
    CHECK(std::abs(ev[0] + ev[1] - (a + c)) < 1e-13);
    CHECK(std::abs(ev[0] * ev[1] - (a * c - b * b)) < 1e-12);
  }
  const auto diag = symmetric_eigenvalues(2.0, 0.0, -1.0);
  CHECK(diag[0] == 2.0);
  CHECK(diag[1] == -1.0);
}

TEST_CASE("trace compatibility on random ensembles") {
  const Ensemble ens = Ensemble::build({random_state(8, 11), random_state(8, 12),
                                        random_state(16, 13), random_state(32, 14)},
                                       kGas);
  for (int N = 2; N <= 4; ++N) {
    const TraceReport r = trace_compatibility(defects(ens, N, kGas), defect_parts(ens, N, kGas), kGas);
    CHECK(r.cells == 64);
    CHECK(r.passed());
    CHECK(r.min_energy_defect >= 0.0);
    CHECK(r.min_eigenvalue >= -1e-10);
  }
}

TEST_CASE("identical members have no defect") {
  const Field f = random_state(8, 21);
  const Ensemble ens = Ensemble::build({f, f, f}, kGas);
  const DefectField d = defects(ens, 3, kGas);
  for (double v : d.packed().values()) {
    CHECK(std::abs(v) < 1e-13);
  }
  for (const auto& row : cesaro_cauchy_table(ens, kGas)) {
    CHECK(row.rho < 1e-15);
    CHECK(row.momentum < 1e-15);
    CHECK(row.wasserstein1 == 0.0);
    CHECK(row.reynolds < 1e-13);
  }
}

TEST_CASE("Wasserstein distance") {
  std::mt19937_64 rng(9);
  SUBCASE("single atoms") {
    const Atom x{0, 0, 0, 0};
    const Atom y{3, 4, 0, 0};
    CHECK(wasserstein(std::vector<Atom>{x}, std::vector<Atom>{y}) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(wasserstein(std::vector<Atom>{x}, std::vector<Atom>{y}, 2.0) == doctest::Approx(5.0).epsilon(1e-15));
  }
  SUBCASE("equal counts against all permutations") {
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<Atom> a, b;
      for (int k = 0; k < 3; ++k) {
        a.push_back(random_atom(rng));
        b.push_back(random_atom(rng));
      }
      CHECK(std::abs(wasserstein(a, b) - brute_force_w1(a, b)) < 1e-13);
    }
  }
  SUBCASE("unequal counts against all permutations of the replicated atoms") {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<Atom> a{random_atom(rng), random_atom(rng)};
      std::vector<Atom> b{random_atom(rng), random_atom(rng), random_atom(rng)};
      CHECK(std::abs(wasserstein(a, b) - brute_force_w1(a, b)) < 1e-13);
    }
  }
  SUBCASE("metric axioms") {
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Atom> a{random_atom(rng), random_atom(rng)};
      std::vector<Atom> b{random_atom(rng), random_atom(rng), random_atom(rng)};
      std::vector<Atom> c{random_atom(rng), random_atom(rng), random_atom(rng), random_atom(rng)};
      CHECK(wasserstein(a, a) < 1e-15);
      CHECK(std::abs(wasserstein(a, b) - wasserstein(b, a)) < 1e-13);
      CHECK(wasserstein(a, c) <= wasserstein(a, b) + wasserstein(b, c) + 1e-12);
    }
  }
  SUBCASE("atom order does not matter") {
    std::vector<Atom> a{random_atom(rng), random_atom(rng), random_atom(rng)};
    std::vector<Atom> b{a[2], a[0], a[1]};
    CHECK(wasserstein(a, b) < 1e-15);
  }
  SUBCASE("guards") {
    CHECK_THROWS_AS(wasserstein(std::vector<Atom>{}, std::vector<Atom>{Atom{}}), UsageError);
    CHECK_THROWS_AS(wasserstein(std::vector<Atom>(9), std::vector<Atom>(1)), UsageError);
    CHECK_THROWS_AS(wasserstein(std::vector<Atom>(1), std::vector<Atom>(1), 0.5), UsageError);
  }
}

TEST_CASE("assignment solver") {
  const std::vector<double> cost{4, 1, 3, 2, 0, 5, 3, 2, 2};
  std::vector<int> assign;
  CHECK(solve_assignment(cost, 3, &assign) == 5.0);
  CHECK(assign == std::vector<int>{1, 0, 2});
  CHECK_THROWS_AS(solve_assignment(cost, 2), UsageError);
}

TEST_CASE("Cesaro-Cauchy table matches pairwise recomputation") {
  const Ensemble ens = Ensemble::build({random_state(8, 31), random_state(16, 32),
                                        random_state(32, 33)},
                                       kGas);
  const auto rows = cesaro_cauchy_table(ens, kGas);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    const CesaroFields a = cesaro(ens, row.N);
    const CesaroFields b = cesaro(ens, row.N + 1);
    CHECK(row.rho == l1_distance(a.rho, b.rho));
    CHECK(row.energy == l1_distance(a.energy, b.energy));
    CHECK(row.reynolds ==
          l1_distance(reynolds_defect(ens, row.N, kGas), reynolds_defect(ens, row.N + 1, kGas)));
    CHECK(row.energy_defect ==
          l1_distance(energy_defect(ens, row.N, kGas), energy_defect(ens, row.N + 1, kGas)));
    double w = 0.0;
    for (int j = 0; j < 8; ++j) {
      for (int i = 0; i < 8; ++i) {
        w += wasserstein(empirical_measure(ens, row.N, i, j), empirical_measure(ens, row.N + 1, i, j));
      }
    }
    CHECK(std::abs(row.wasserstein1 - w / 64.0) < 1e-13);
  }
  CHECK_THROWS_AS(cesaro_cauchy_table(Ensemble::build({random_state(8, 1), random_state(8, 2)}, kGas), kGas),
                  UsageError);
}

TEST_CASE("band fraction and entropy flux average") {
  Field f(Grid(8), 1, 0.0);
  for (int i = 0; i < 8; ++i) {
    f(i, 3, 0) = -2.0;
    f(i, 7, 0) = 2.0;
  }
  CHECK(band_fraction(f, 0.25, 0.75) == 0.5);
  CHECK(band_fraction(Field(Grid(8), 1, 0.0), 0.25, 0.75) == 1.0);

  const Field s = constant_state(Grid(4), {2.0, 0.5, -1.0, 3.0}, kGas);
  const Ensemble ens = Ensemble::build({s, s}, kGas);
  const Field flux = entropy_flux_average(ens, 2);
  const double S = entropy_from_primitive(2.0, 3.0, kGas);
  CHECK(flux(0, 0, 0) == doctest::Approx(S * 0.5).epsilon(1e-14));
  CHECK(flux(0, 0, 1) == doctest::Approx(-S).epsilon(1e-14));
}
