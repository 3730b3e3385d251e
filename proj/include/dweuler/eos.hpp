#pragma once

#include <array>
#include <stdexcept>

namespace dweuler {

/// Thrown when a thermodynamic function is evaluated outside its domain
/// (non-positive density or pressure).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Perfect gas with adiabatic coefficient gamma; c_v = 1/(gamma-1).
class GasParams {
public:
  explicit GasParams(double gamma = 1.4);

  double gamma() const { return gamma_; }
  double c_v() const { return c_v_; }

private:
  double gamma_;
  double c_v_;
};

using Vec2 = std::array<double, 2>;

/// A point in (density, momentum, total entropy) space.
struct PointState {
  double rho = 1.0;
  Vec2 m{0.0, 0.0};
  double S = 0.0;

  Vec2 velocity() const { return {m[0] / rho, m[1] / rho}; }
  /// Specific entropy s = S / rho.
  double specific_entropy() const { return S / rho; }
};

// The pressure law is p(rho, S) = rho^gamma exp(S / (c_v rho)); the internal
// energy density is rho e = c_v p. None of these functions clamp.

double pressure(const PointState& state, const GasParams& gas);
double pressure(double rho, double S, const GasParams& gas);

/// S = c_v rho ln(p rho^-gamma), the inverse of the pressure law in S.
double entropy_from_primitive(double rho, double p, const GasParams& gas);

/// E = |m|^2 / (2 rho) + p / (gamma - 1).
double total_energy(double rho, const Vec2& m, double p, const GasParams& gas);

/// rho e(rho, S) = c_v rho^gamma exp(S / (c_v rho)).
double internal_energy_density(double rho, double S, const GasParams& gas);

/// Total energy of a (rho, m, S) point.
double total_energy(const PointState& state, const GasParams& gas);

/// d(rho e)/d rho at fixed S.
double internal_energy_drho(double rho, double S, const GasParams& gas);
/// d(rho e)/d S at fixed rho.
double internal_energy_dS(double rho, double S, const GasParams& gas);

double sound_speed(double rho, double p, const GasParams& gas);

/// Bregman distance of the total energy between `state` and the reference
/// `ref`. The reference enters through its velocity m/rho, density and
/// entropy. Non-negative, zero iff the two points coincide.
double relative_energy(const PointState& state, const PointState& ref,
                       const GasParams& gas);

/// Total entropy S from conservative variables (rho, m, E). Throws
/// DomainError if rho <= 0 or the internal energy is not positive.
double entropy_from_conservative(double rho, const Vec2& m, double E,
                                 const GasParams& gas);

} // namespace dweuler
