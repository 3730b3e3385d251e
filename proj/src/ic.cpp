#include "dweuler/ic.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace dweuler {

namespace {

// k-th output for a seed:
//   z = seed + (k + 1) * 0x9E3779B97F4A7C15   (mod 2^64)
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   z =  z ^ (z >> 31)
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

} // namespace

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return counter_hash(seed_, counter);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
}

InterfaceCoeffs sample_interface_coeffs(std::uint64_t seed, int modes) {
  if (modes < 1) {
    throw UsageError("interface needs at least one Fourier mode");
  }
  // Draw order: a_1^1..a_1^M, a_2^1..a_2^M, b_1^1..b_1^M, b_2^1..b_2^M.
  const CounterRng rng(seed);
  const auto m = static_cast<std::uint64_t>(modes);
  InterfaceCoeffs out;
  for (int j = 0; j < 2; ++j) {
    auto& a = out.a[j];
    a.resize(modes);
    double sum = 0.0;
    for (std::uint64_t k = 0; k < m; ++k) {
      a[k] = rng.uniform(j * m + k);
      sum += a[k];
    }
    if (sum == 0.0) {
      // All draws exactly zero: fall back to equal weights.
      std::fill(a.begin(), a.end(), 1.0 / modes);
    } else {
      for (auto& v : a) {
        v /= sum;
      }
    }
    auto& b = out.b[j];
    b.resize(modes);
    for (std::uint64_t k = 0; k < m; ++k) {
      b[k] = std::numbers::pi * (2.0 * rng.uniform((2 + j) * m + k) - 1.0);
    }
  }
  return out;
}

void KHConfig::validate() const {
  if (modes < 1) {
    throw UsageError("KH: modes must be >= 1");
  }
  if (!(eps >= 0.0)) {
    throw UsageError("KH: eps must be non-negative");
  }
  if (!(J1 - eps > 0.0 && J1 + eps < J2 - eps && J2 + eps < 1.0)) {
    throw UsageError("KH: interfaces must stay ordered inside (0, 1)");
  }
  for (const auto& w : {inner_state, outer_state}) {
    if (!(w.rho > 0.0 && w.p > 0.0)) {
      throw UsageError("KH: states need positive density and pressure");
    }
  }
}

KHInterfaces::KHInterfaces(const KHConfig& cfg)
    : cfg_(cfg), coeffs_(sample_interface_coeffs(cfg.seed, cfg.modes)) {
  cfg_.validate();
}

double KHInterfaces::profile(int j, double x1) const {
  double y = 0.0;
  for (int m = 0; m < cfg_.modes; ++m) {
    y += coeffs_.a[j][m] *
         std::cos(coeffs_.b[j][m] + 2.0 * (m + 1) * std::numbers::pi * x1);
  }
  return y;
}

Field kelvin_helmholtz(const KHConfig& cfg, const Grid& grid, const GasParams& gas) {
  const KHInterfaces interfaces(cfg);
  const auto inner = to_conservative(cfg.inner_state, gas);
  const auto outer = to_conservative(cfg.outer_state, gas);
  const int n = grid.n_x();
  Field out(grid, kStateComponents);
  for (int i = 0; i < n; ++i) {
    const double x1 = grid.center(i);
    const double lo = interfaces.lower(x1);
    const double hi = interfaces.upper(x1);
    for (int j = 0; j < n; ++j) {
      const double x2 = grid.center(j);
      const auto& u = (lo < x2 && x2 < hi) ? inner : outer;
      for (int c = 0; c < kStateComponents; ++c) {
        out(i, j, c) = u[c];
      }
    }
  }
  return out;
}

Field constant_state(const Grid& grid, const Primitive& w, const GasParams& gas) {
  const auto u = to_conservative(w, gas);
  Field out(grid, kStateComponents);
  auto values = out.values();
  for (std::size_t k = 0; k < grid.cells(); ++k) {
    for (int c = 0; c < kStateComponents; ++c) {
      values[k * kStateComponents + c] = u[c];
    }
  }
  return out;
}

void VortexConfig::validate(const GasParams& gas) const {
  if (!(radius > 0.0 && radius <= 0.0625)) {
    throw UsageError("vortex radius must lie in (0, 1/16]");
  }
  if (!(min_temperature(gas) > 0.0)) {
    throw UsageError("vortex strength " + std::to_string(strength) +
                     " drives the core temperature non-positive");
  }
}

double VortexConfig::min_temperature(const GasParams& gas) const {
  const double g = gas.gamma();
  return 1.0 - (g - 1.0) * strength * strength /
                   (8.0 * g * std::numbers::pi * std::numbers::pi) * std::exp(1.0);
}

namespace {

// Displacement folded into [-1/2, 1/2).
double periodic_offset(double d) { return d - std::floor(d + 0.5); }

} // namespace

Primitive vortex_primitive(const VortexConfig& cfg, const GasParams& gas,
                           double x1, double x2, double t) {
  const double g = gas.gamma();
  const double dx = periodic_offset(x1 - cfg.center[0] - cfg.background[0] * t) / cfg.radius;
  const double dy = periodic_offset(x2 - cfg.center[1] - cfg.background[1] * t) / cfg.radius;
  const double r2 = dx * dx + dy * dy;
  const double pi = std::numbers::pi;
  const double swirl = cfg.strength / (2.0 * pi) * std::exp(0.5 * (1.0 - r2));
  const double temp = 1.0 - (g - 1.0) * cfg.strength * cfg.strength /
                                (8.0 * g * pi * pi) * std::exp(1.0 - r2);
  const double rho = std::pow(temp, 1.0 / (g - 1.0));
  return {rho, cfg.background[0] - swirl * dy, cfg.background[1] + swirl * dx,
          std::pow(rho, g)};
}

Field isentropic_vortex(const VortexConfig& cfg, const Grid& grid,
                        const GasParams& gas, double t) {
  cfg.validate(gas);
  const int n = grid.n_x();
  Field out(grid, kStateComponents);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const auto u = to_conservative(
          vortex_primitive(cfg, gas, grid.center(i), grid.center(j), t), gas);
      for (int c = 0; c < kStateComponents; ++c) {
        out(i, j, c) = u[c];
      }
    }
  }
  return out;
}

Field isentropic_vortex(const Grid& grid, const GasParams& gas, double strength) {
  VortexConfig cfg;
  cfg.strength = strength;
  return isentropic_vortex(cfg, grid, gas);
}

} // namespace dweuler
