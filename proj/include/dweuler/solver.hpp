#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dweuler/state.hpp"

namespace dweuler {

enum class Scheme { LaxFriedrichs, VFV };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct SchemeConfig {
  Scheme scheme = Scheme::LaxFriedrichs;
  double cfl = 0.3;
  /// Exponent of the velocity viscosity h^alpha_u div(rho grad u).
  double vfv_alpha_velocity = 1.8;
  /// Exponent of the mass diffusion h^alpha_rho, applied to every
  /// conserved quantity.
  double vfv_alpha_density = 0.8;
  double t_end = 2.0;
  /// Use one global wave speed for every face instead of the local maximum.
  bool global_lambda = false;
  /// Dense scan (L^p norms) every this many steps; 0 disables it.
  int norms_every = 1;

  void validate() const;
};

/// Cells with density or internal energy below this bound reject the step.
inline constexpr double kPositivityFloor = 1e-12;

/// A time step produced a state outside the admissible set.
class StepRejected : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The input state has non-positive density or pressure somewhere.
class InvalidState : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The run could not continue after the allowed dt-halving retries. Carries
/// the last accepted state.
class SolverFailure : public std::runtime_error {
public:
  SolverFailure(const std::string& what, Field last_state, double time)
      : std::runtime_error(what), last_state(std::move(last_state)), time(time) {}
  Field last_state;
  double time;
};

struct Totals {
  double mass = 0.0;
  double mom_x = 0.0;
  double mom_y = 0.0;
  double energy = 0.0;
  double entropy = 0.0;
};

/// Scan of one accepted state. Step 0 describes the initial data.
struct StepReport {
  int step = 0;
  double time = 0.0;
  double dt = 0.0;
  double max_wave_speed = 0.0;
  double min_density = 0.0;
  double max_density = 0.0;
  double min_internal_energy = 0.0;
  double min_specific_entropy = 0.0;
  double max_total_energy = 0.0;
  Totals totals;
  /// L^p norms; NaN when the dense scan was skipped for this step.
  double rho_l_gamma = 0.0;
  double entropy_l_gamma = 0.0;
  double momentum_l_p = 0.0;
  int retries = 0;
};

struct RunRecord {
  std::vector<StepReport> steps;
  Field final_state;
  double final_time = 0.0;
};

/// Passed to observers after each accepted step.
struct StepEvent {
  const Field& prev;
  const Field& next;
  double t;
  double dt;
  int step;
};

using Observer = std::function<void(const StepEvent&)>;

/// max over cells and axes of |u_axis| + c.
double max_wave_speed(const Field& state, const GasParams& gas);

Field step_lax_friedrichs(const Field& state, double dt, const GasParams& gas,
                          bool global_lambda = false);

/// Central flux with artificial viscosity: mass diffusion
/// h^alpha_rho Delta_h applied to (rho, m, E) plus a velocity viscosity
/// h^alpha_u div_h(rho grad_h u) whose work is added to the energy flux.
Field step_vfv(const Field& state, double dt, const GasParams& gas,
               const SchemeConfig& cfg);

/// Viscosity coefficients (mass, velocity) used by step_vfv on this grid.
std::pair<double, double> vfv_coefficients(const Grid& grid, const SchemeConfig& cfg);

/// Largest admissible step for the configured scheme: cfl h / lambda for
/// Lax-Friedrichs; VFV additionally caps it by cfl h^2 / (4 (nu + mu)).
double stable_dt(const Field& state, const GasParams& gas, const SchemeConfig& cfg);

Field advance(const Field& state, double dt, const GasParams& gas,
              const SchemeConfig& cfg);

StepReport scan_state(const Field& state, const GasParams& gas, bool dense);

Totals totals(const Field& state, const GasParams& gas);

/// Advance to cfg.t_end. The final step is clipped to land on t_end exactly.
/// A rejected step is retried with halved dt up to kMaxRetries times.
RunRecord run(const Field& initial, const SchemeConfig& cfg, const GasParams& gas,
              const std::vector<Observer>& observers = {});

inline constexpr int kMaxRetries = 10;

} // namespace dweuler
