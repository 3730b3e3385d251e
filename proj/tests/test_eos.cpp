#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "dweuler/eos.hpp"

using namespace dweuler;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST_CASE("gas parameters") {
  const GasParams gas(1.4);
  CHECK(gas.c_v() == doctest::Approx(2.5).epsilon(1e-15));
  CHECK_THROWS_AS(GasParams(1.0), std::invalid_argument);
  CHECK_THROWS_AS(GasParams(0.5), std::invalid_argument);
}

TEST_CASE("pressure law") {
  const GasParams gas(1.4);
  CHECK(pressure(PointState{1.0, {0, 0}, 0.0}, gas) == 1.0);

  const double S = entropy_from_primitive(2.0, 2.5, gas);
  CHECK(rel(pressure(PointState{2.0, {0, 0}, S}, gas), 2.5) < 1e-14);

  // c_v rho ln 2 at rho = 1: exp(ln 2) = 2.
  CHECK(rel(pressure(1.0, gas.c_v() * std::log(2.0), gas), 2.0) < 1e-15);

  CHECK_THROWS_AS(pressure(0.0, 0.0, gas), DomainError);
  CHECK_THROWS_AS(pressure(-1.0, 0.0, gas), DomainError);
}

TEST_CASE("entropy from primitive variables") {
  const GasParams gas(1.4);
  CHECK(entropy_from_primitive(1.0, 1.0, gas) == 0.0);
  // Outer Kelvin-Helmholtz state (rho, p) = (1, 2.5).
  CHECK(rel(entropy_from_primitive(1.0, 2.5, gas), gas.c_v() * std::log(2.5)) < 1e-15);
  CHECK_THROWS_AS(entropy_from_primitive(0.0, 1.0, gas), DomainError);
  CHECK_THROWS_AS(entropy_from_primitive(1.0, 0.0, gas), DomainError);
}

TEST_CASE("total energy") {
  const GasParams gas(1.4);
  CHECK(total_energy(1.0, {0, 0}, 0.4, gas) == doctest::Approx(1.0).epsilon(1e-15));
  // Inner Kelvin-Helmholtz state: 0.5 * 2 * 0.25 + 2.5 / 0.4.
  CHECK(total_energy(2.0, {-1.0, 0.0}, 2.5, gas) == doctest::Approx(6.5).epsilon(1e-15));
  CHECK(total_energy(4.0, {4.0, 0.0}, 0.0, gas) == 2.0);
  CHECK_THROWS_AS(total_energy(0.0, {0, 0}, 1.0, gas), DomainError);
}

TEST_CASE("round trip and perfect-gas identity on random samples") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> log_range(std::log(1e-3), std::log(1e3));
  for (double gamma : {1.4, 5.0 / 3.0, 1.1}) {
    const GasParams gas(gamma);
    for (int k = 0; k < 2000; ++k) {
      const double rho = std::exp(log_range(rng));
      const double p = std::exp(log_range(rng));
      const double S = entropy_from_primitive(rho, p, gas);
      CHECK(rel(pressure(rho, S, gas), p) < 1e-14);
      CHECK(rel(pressure(rho, S, gas), (gamma - 1.0) * internal_energy_density(rho, S, gas)) < 1e-14);
    }
  }
}

TEST_CASE("relative energy is a Bregman distance") {
  const GasParams gas(1.4);
  const PointState a{1.3, {0.2, -0.4}, 0.1};
  CHECK(relative_energy(a, a, gas) == 0.0);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> rho(0.5, 3.0), mom(-2.0, 2.0), ent(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const PointState s{rho(rng), {mom(rng), mom(rng)}, ent(rng)};
    const PointState r{rho(rng), {mom(rng), mom(rng)}, ent(rng)};
    worst = std::min(worst, relative_energy(s, r, gas));
  }
  CHECK(worst >= -1e-12);

  // Strictly positive away from the reference.
  CHECK(relative_energy(PointState{1.31, {0.2, -0.4}, 0.1}, a, gas) > 0.0);
  CHECK(relative_energy(PointState{1.3, {0.21, -0.4}, 0.1}, a, gas) > 0.0);
  CHECK(relative_energy(PointState{1.3, {0.2, -0.4}, 0.11}, a, gas) > 0.0);
  CHECK_THROWS_AS(relative_energy(PointState{0.0, {0, 0}, 0}, a, gas), DomainError);
}

TEST_CASE("analytic partials of rho e match centered differences") {
  const GasParams gas(1.4);
  const double rho = 1.3;
  const double S = 0.2;
  const double step = 1e-6;
  const double fd_rho = (internal_energy_density(rho + step, S, gas) -
                         internal_energy_density(rho - step, S, gas)) / (2 * step);
  const double fd_S = (internal_energy_density(rho, S + step, gas) -
                       internal_energy_density(rho, S - step, gas)) / (2 * step);
  CHECK(rel(internal_energy_drho(rho, S, gas), fd_rho) <= 1e-6);
  CHECK(rel(internal_energy_dS(rho, S, gas), fd_S) <= 1e-6);
}

TEST_CASE("sound speed") {
  const GasParams gas(1.4);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0.01, 10.0);
  for (int k = 0; k < 1000; ++k) {
    const double rho = d(rng);
    const double p = d(rng);
    const double c = sound_speed(rho, p, gas);
    CHECK(c > 0.0);
    // c^2 = gamma p / rho; scaling rho and p together leaves it unchanged.
    CHECK(rel(sound_speed(3.0 * rho, 3.0 * p, gas), c) < 1e-14);
  }
  CHECK(sound_speed(1.0, 1.0, gas) == doctest::Approx(std::sqrt(1.4)).epsilon(1e-15));
  CHECK_THROWS_AS(sound_speed(1.0, -1.0, gas), DomainError);
}

TEST_CASE("specific entropy accessor") {
  const PointState s{2.0, {0, 0}, -0.5};
  CHECK(s.specific_entropy() == -0.25);
}
