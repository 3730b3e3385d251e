#include "dweuler/state.hpp"

namespace dweuler {

std::array<double, 4> to_conservative(const Primitive& w, const GasParams& gas) {
  const Vec2 m{w.rho * w.u1, w.rho * w.u2};
  return {w.rho, m[0], m[1], total_energy(w.rho, m, w.p, gas)};
}

PointState point_state(const Field& state, int i, int j, const GasParams& gas) {
  const auto u = state.cell(i, j);
  const Vec2 m{u[kMomX], u[kMomY]};
  return {u[kRho], m, entropy_from_conservative(u[kRho], m, u[kEnergy], gas)};
}

Field entropy_field(const Field& state, const GasParams& gas) {
  require_state(state);
  const int n = state.grid().n_x();
  Field out(state.grid(), 1);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      out(i, j, 0) = point_state(state, i, j, gas).S;
    }
  }
  return out;
}

void require_state(const Field& state) {
  if (state.components() != kStateComponents) {
    throw UsageError("expected a 4-component conservative state field");
  }
}

} // namespace dweuler
