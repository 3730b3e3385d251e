#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "dweuler/diagnostics.hpp"
#include "dweuler/ic.hpp"

using namespace dweuler;

namespace {

const GasParams kGas(1.4);

std::vector<ModeResidual> residuals(const Field& initial, const SchemeConfig& cfg,
                                    std::vector<TestFunction> basis) {
  ConsistencyAccumulator acc(initial.grid(), kGas, cfg.t_end, std::move(basis));
  run(initial, cfg, kGas, {acc.observer()});
  return acc.finalize();
}

RunRecord record_with_steps(int count) {
  RunRecord rec{{}, Field(Grid(2), kStateComponents), 0.0};
  rec.steps.resize(count);
  return rec;
}

} // namespace

TEST_CASE("test function basis") {
  const auto basis = test_function_basis(3);
  CHECK(basis.size() == 29);
  CHECK(basis.front().is_constant());
  int constants = 0;
  for (const auto& tf : basis) {
    CHECK(tf.k1 * tf.k1 + tf.k2 * tf.k2 <= 9);
    constants += tf.is_constant() ? 1 : 0;
  }
  CHECK(constants == 1);

  const TestFunction tf{1, 2, Flavor::Sin, Flavor::Cos};
  CHECK(tf.label() == "sin1_cos2");
  CHECK(tf.psi(0.0, 2.0) == 1.0);
  CHECK(tf.psi(2.0, 2.0) == 0.0);
  CHECK(tf.dpsi(0.0, 2.0) == -1.0);
  // Gradient against centered differences.
  const double x = 0.3, y = 0.7, d = 1e-6;
  const auto g = tf.gradient(x, y);
  CHECK(g[0] == doctest::Approx((tf.spatial(x + d, y) - tf.spatial(x - d, y)) / (2 * d)).epsilon(1e-8));
  CHECK(g[1] == doctest::Approx((tf.spatial(x, y + d) - tf.spatial(x, y - d)) / (2 * d)).epsilon(1e-8));
}

TEST_CASE("mode integrals of the constant mode are the conserved totals") {
  const Field f = kelvin_helmholtz(KHConfig{}, Grid(64), kGas);
  const ModeIntegrals in = mode_integrals(f, TestFunction{}, kGas);
  const auto sums = integrate(f);
  CHECK(std::abs(in.rho_x - sums[kRho]) <= 1e-13);
  CHECK(std::abs(in.mom_x[0] - sums[kMomX]) <= 1e-13);
  CHECK(std::abs(in.mom_x[1] - sums[kMomY]) <= 1e-13);
  CHECK(std::abs(in.entropy_x - totals(f, kGas).entropy) <= 1e-13);
  CHECK(in.mass_flux == 0.0);
}

TEST_CASE("energy residual") {
  RunRecord rec = record_with_steps(3);
  rec.steps[0].totals.energy = 1.0;
  rec.steps[1].totals.energy = 1.0 + 1e-9;
  rec.steps[2].totals.energy = 0.5;
  CHECK(energy_residual(rec) == doctest::Approx(1e-9).epsilon(1e-6));
  rec.steps[1].totals.energy = 0.9;
  CHECK(energy_residual(rec) == 0.0);

  SchemeConfig cfg;
  cfg.t_end = 0.1;
  for (Scheme s : {Scheme::LaxFriedrichs, Scheme::VFV}) {
    cfg.scheme = s;
    CHECK(energy_residual(run(kelvin_helmholtz(KHConfig{}, Grid(32), kGas), cfg, kGas)) <= 1e-10);
  }
}

TEST_CASE("constant mode residuals telescope to zero") {
  SchemeConfig cfg;
  cfg.t_end = 0.1;
  const auto r = residuals(kelvin_helmholtz(KHConfig{}, Grid(32), kGas), cfg, {TestFunction{}});
  CHECK(std::abs(r[0].continuity) <= 1e-12);
  CHECK(r[0].momentum_abs() <= 1e-12);
  // Total entropy grows, so the production is non-negative.
  CHECK(r[0].entropy_production >= -1e-12);
}

TEST_CASE("a uniform flow has vanishing residuals") {
  SchemeConfig cfg;
  cfg.t_end = 0.05;
  const auto r = residuals(constant_state(Grid(32), {1.5, 0.4, -0.3, 2.0}, kGas), cfg,
                           test_function_basis(3));
  for (const auto& m : r) {
    CHECK(std::abs(m.continuity) <= 1e-12);
    CHECK(m.momentum_abs() <= 1e-12);
    CHECK(std::abs(m.entropy_production) <= 1e-12);
  }
}

TEST_CASE("residuals shrink under refinement") {
  VortexConfig vortex;
  vortex.center = {0.4, 0.45};
  SchemeConfig cfg;
  cfg.t_end = 0.02;
  const TestFunction mode{1, 1, Flavor::Cos, Flavor::Cos};
  double prev = INFINITY;
  for (int n : {32, 64, 128}) {
    const auto r = residuals(isentropic_vortex(vortex, Grid(n), kGas), cfg, {mode});
    CHECK(std::abs(r[0].continuity) < prev);
    prev = std::abs(r[0].continuity);
  }
}

TEST_CASE("accumulator guards") {
  const Field f = constant_state(Grid(8), {1.0, 0.0, 0.0, 1.0}, kGas);
  ConsistencyAccumulator acc(Grid(8), kGas, 1.0, test_function_basis(1));
  CHECK_THROWS_AS(acc.accumulate(f, f, 0.5, 0.1), UsageError);
  acc.accumulate(f, f, 0.0, 0.5);
  CHECK_FALSE(acc.complete());
  CHECK_THROWS_AS(acc.finalize(), UsageError);
  CHECK_THROWS_AS(acc.accumulate(f, f, 0.0, 0.5), UsageError);
  CHECK_THROWS_AS(acc.accumulate(f, f, 0.5, 0.6), UsageError);
  acc.accumulate(f, f, 0.5, 0.5);
  CHECK(acc.complete());
  CHECK(acc.finalize().size() == acc.basis().size());
  CHECK_THROWS_AS(acc.accumulate(constant_state(Grid(16), {1, 0, 0, 1}, kGas), f, 1.0, 0.1),
                  UsageError);
  CHECK_THROWS_AS(ConsistencyAccumulator(Grid(8), kGas, 0.0, {}), UsageError);
}

TEST_CASE("stability report") {
  SUBCASE("closed form norms of a uniform state") {
    SchemeConfig cfg;
    cfg.t_end = 0.01;
    const Primitive w{2.0, 0.5, 0.0, 1.5};
    const RunRecord rec = run(constant_state(Grid(16), w, kGas), cfg, kGas);
    const StabilityReport s = stability_report(rec);
    const double S = entropy_from_primitive(2.0, 1.5, kGas);
    CHECK(s.sup_rho_l_gamma == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(s.sup_entropy_l_gamma == doctest::Approx(std::abs(S)).epsilon(1e-13));
    CHECK(s.sup_momentum_l_p == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(s.min_density == 2.0);
    CHECK_FALSE(s.min_entropy_violated);
  }
  SUBCASE("violation flag") {
    RunRecord rec = record_with_steps(2);
    rec.steps[0].min_specific_entropy = 0.1;
    rec.steps[1].min_specific_entropy = 0.1 - 1e-9;
    CHECK(stability_report(rec).min_entropy_violated);
    CHECK_FALSE(stability_report(rec, 0.0).min_entropy_violated);
    rec.steps[1].min_specific_entropy = 0.1 - 1e-11;
    CHECK_FALSE(stability_report(rec).min_entropy_violated);
  }
  CHECK_THROWS_AS(stability_report(record_with_steps(0)), UsageError);
}

TEST_CASE("refinement errors") {
  SUBCASE("identical members give zero") {
    const Field f = kelvin_helmholtz(KHConfig{}, Grid(32), kGas);
    for (const auto& row : refinement_errors({f, f, f}, kGas)) {
      CHECK(row.rho == 0.0);
      CHECK(row.momentum == 0.0);
      CHECK(row.entropy == 0.0);
      CHECK(row.energy == 0.0);
    }
  }
  SUBCASE("point samples of a smooth field differ at second order") {
    VortexConfig vortex;
    const auto rows = refinement_errors({isentropic_vortex(vortex, Grid(64), kGas),
                                         isentropic_vortex(vortex, Grid(128), kGas),
                                         isentropic_vortex(vortex, Grid(256), kGas)},
                                        kGas);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].n_x_coarse == 64);
    CHECK(rows[1].n_x_fine == 256);
    const double ratio = rows[0].rho / rows[1].rho;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
  }
  SUBCASE("space-time variant integrates in time") {
    const Field a = constant_state(Grid(16), {1.0, 0.0, 0.0, 1.0}, kGas);
    const Field b = constant_state(Grid(32), {1.5, 0.0, 0.0, 1.0}, kGas);
    const auto rows = space_time_refinement_errors({{a, a}, {b, b}}, {0.0, 2.0}, kGas);
    CHECK(rows[0].rho == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(refinement_errors({Field(Grid(8), 4, 1.0)}, kGas), UsageError);
}
