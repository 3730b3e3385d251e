#pragma once

#include "dweuler/eos.hpp"
#include "dweuler/grid.hpp"

namespace dweuler {

// Conservative state fields carry four components per cell.
inline constexpr int kRho = 0;
inline constexpr int kMomX = 1;
inline constexpr int kMomY = 2;
inline constexpr int kEnergy = 3;
inline constexpr int kStateComponents = 4;

/// Primitive tuple (rho, u1, u2, p).
struct Primitive {
  double rho;
  double u1;
  double u2;
  double p;
};

std::array<double, 4> to_conservative(const Primitive& w, const GasParams& gas);

/// (rho, m, S) of one cell of a conservative field.
PointState point_state(const Field& state, int i, int j, const GasParams& gas);

/// Internal energy density E - |m|^2 / (2 rho) of one cell.
inline double internal_energy(std::span<const double> u) {
  return u[kEnergy] -
         0.5 * (u[kMomX] * u[kMomX] + u[kMomY] * u[kMomY]) / u[kRho];
}

/// Scalar field of total entropy S computed cell by cell.
Field entropy_field(const Field& state, const GasParams& gas);

/// Checks the field has the conservative layout; throws UsageError otherwise.
void require_state(const Field& state);

} // namespace dweuler
