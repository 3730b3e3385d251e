#include "dweuler/eos.hpp"

#include <cmath>
#include <string>

namespace dweuler {

namespace {

void require_positive_density(double rho) {
  if (!(rho > 0.0)) {
    throw DomainError("non-positive density " + std::to_string(rho));
  }
}

} // namespace

GasParams::GasParams(double gamma) : gamma_(gamma), c_v_(1.0 / (gamma - 1.0)) {
  if (!(gamma > 1.0)) {
    throw std::invalid_argument("adiabatic coefficient must exceed 1, got " +
                                std::to_string(gamma));
  }
}

double pressure(double rho, double S, const GasParams& gas) {
  require_positive_density(rho);
  return std::pow(rho, gas.gamma()) * std::exp(S / (gas.c_v() * rho));
}

double pressure(const PointState& state, const GasParams& gas) {
  return pressure(state.rho, state.S, gas);
}

double entropy_from_primitive(double rho, double p, const GasParams& gas) {
  require_positive_density(rho);
  if (!(p > 0.0)) {
    throw DomainError("non-positive pressure " + std::to_string(p));
  }
  // ln(p) - gamma ln(rho) keeps the round trip accurate for extreme ratios.
  return gas.c_v() * rho * (std::log(p) - gas.gamma() * std::log(rho));
}

double total_energy(double rho, const Vec2& m, double p, const GasParams& gas) {
  require_positive_density(rho);
  return 0.5 * (m[0] * m[0] + m[1] * m[1]) / rho + p / (gas.gamma() - 1.0);
}

double internal_energy_density(double rho, double S, const GasParams& gas) {
  return gas.c_v() * pressure(rho, S, gas);
}

double total_energy(const PointState& state, const GasParams& gas) {
  require_positive_density(state.rho);
  const auto& m = state.m;
  return 0.5 * (m[0] * m[0] + m[1] * m[1]) / state.rho +
         internal_energy_density(state.rho, state.S, gas);
}

double internal_energy_drho(double rho, double S, const GasParams& gas) {
  const double p = pressure(rho, S, gas);
  return (p / rho) * (gas.c_v() * gas.gamma() - S / rho);
}

double internal_energy_dS(double rho, double S, const GasParams& gas) {
  return pressure(rho, S, gas) / rho;
}

double sound_speed(double rho, double p, const GasParams& gas) {
  require_positive_density(rho);
  if (!(p > 0.0)) {
    throw DomainError("non-positive pressure " + std::to_string(p));
  }
  return std::sqrt(gas.gamma() * p / rho);
}

double relative_energy(const PointState& state, const PointState& ref,
                       const GasParams& gas) {
  require_positive_density(state.rho);
  require_positive_density(ref.rho);
  const Vec2 u = state.velocity();
  const Vec2 u_ref = ref.velocity();
  const double du0 = u[0] - u_ref[0];
  const double du1 = u[1] - u_ref[1];
  const double kinetic = 0.5 * state.rho * (du0 * du0 + du1 * du1);
  const double rho_e = internal_energy_density(state.rho, state.S, gas);
  const double rho_e_ref = internal_energy_density(ref.rho, ref.S, gas);
  const double d_rho = internal_energy_drho(ref.rho, ref.S, gas);
  const double d_S = internal_energy_dS(ref.rho, ref.S, gas);
  return kinetic + rho_e - d_rho * (state.rho - ref.rho) -
         d_S * (state.S - ref.S) - rho_e_ref;
}

double entropy_from_conservative(double rho, const Vec2& m, double E,
                                 const GasParams& gas) {
  require_positive_density(rho);
  const double rho_e = E - 0.5 * (m[0] * m[0] + m[1] * m[1]) / rho;
  if (!(rho_e > 0.0)) {
    throw DomainError("non-positive internal energy " + std::to_string(rho_e));
  }
  return entropy_from_primitive(rho, (gas.gamma() - 1.0) * rho_e, gas);
}

} // namespace dweuler
