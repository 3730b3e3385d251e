#pragma once

#include <cstdint>
#include <vector>

#include "dweuler/state.hpp"

namespace dweuler {

/// Counter-based generator: the k-th draw for a seed is a pure function of
/// (seed, k). See counter_hash in ic.cpp for the exact mixing steps.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t counter) const;
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const;

private:
  std::uint64_t seed_;
};

/// Fourier coefficients of the two interface perturbations. a[j][m] sums to 1
/// over m for each interface j; b[j][m] lies in [-pi, pi].
struct InterfaceCoeffs {
  std::array<std::vector<double>, 2> a;
  std::array<std::vector<double>, 2> b;
};

InterfaceCoeffs sample_interface_coeffs(std::uint64_t seed, int modes);

struct KHConfig {
  double J1 = 0.25;
  double J2 = 0.75;
  double eps = 0.01;
  int modes = 10;
  std::uint64_t seed = 20240101;
  Primitive inner_state{2.0, -0.5, 0.0, 2.5};
  Primitive outer_state{1.0, 0.5, 0.0, 2.5};

  void validate() const;
};

/// Perturbed interface heights I_j(x1) = J_j + eps * Y_j(x1).
class KHInterfaces {
public:
  explicit KHInterfaces(const KHConfig& cfg);

  double lower(double x1) const { return cfg_.J1 + cfg_.eps * profile(0, x1); }
  double upper(double x1) const { return cfg_.J2 + cfg_.eps * profile(1, x1); }
  const InterfaceCoeffs& coeffs() const { return coeffs_; }

private:
  double profile(int j, double x1) const;

  KHConfig cfg_;
  InterfaceCoeffs coeffs_;
};

/// Piecewise-constant Kelvin-Helmholtz data; a cell takes the inner state when
/// its center lies strictly between the two interfaces.
Field kelvin_helmholtz(const KHConfig& cfg, const Grid& grid, const GasParams& gas);

/// Uniform state.
Field constant_state(const Grid& grid, const Primitive& w, const GasParams& gas);

/// Isentropic vortex on a uniform background rho = p = 1 moving with velocity
/// `background`. With r the periodic distance to the (translated) center in
/// units of `radius`:
///
///   du  = strength / (2 pi) * exp((1 - r^2) / 2) * (-dy, dx) / radius
///   T   = 1 - (gamma - 1) strength^2 / (8 gamma pi^2) * exp(1 - r^2)
///   rho = T^(1 / (gamma - 1)),  p = rho^gamma
///
/// This is a steady solution in the co-moving frame. Values are sampled at
/// cell centers. The default radius keeps the deviation from the background
/// at the periodic cell boundary below 1e-12.
struct VortexConfig {
  double strength = 5.0;
  double radius = 1.0 / 16.0;
  Vec2 center{0.5, 0.5};
  Vec2 background{1.0, 0.5};

  void validate(const GasParams& gas) const;
  /// Minimum of T over the plane, attained at the vortex center.
  double min_temperature(const GasParams& gas) const;
};

Field isentropic_vortex(const Grid& grid, const GasParams& gas, double strength);
/// Exact solution at time t: the initial vortex translated by background * t.
Field isentropic_vortex(const VortexConfig& cfg, const Grid& grid,
                        const GasParams& gas, double t = 0.0);
/// Point value of the exact vortex solution.
Primitive vortex_primitive(const VortexConfig& cfg, const GasParams& gas,
                           double x1, double x2, double t);

} // namespace dweuler
