#pragma once

#include <string>
#include <vector>

#include "dweuler/solver.hpp"

namespace dweuler {

/// Positive part of the largest increase of total energy over the run.
double energy_residual(const RunRecord& record);

enum class Flavor { Cos, Sin };

/// phi(t, x) = psi(t) X(x) with psi(t) = (1 - t/T)^2 and
/// X(x) = f1(2 pi k1 x1) f2(2 pi k2 x2), f in {cos, sin}.
struct TestFunction {
  int k1 = 0;
  int k2 = 0;
  Flavor f1 = Flavor::Cos;
  Flavor f2 = Flavor::Cos;

  double psi(double t, double horizon) const;
  double dpsi(double t, double horizon) const;
  double spatial(double x1, double x2) const;
  Vec2 gradient(double x1, double x2) const;
  std::string label() const;
  bool is_constant() const { return k1 == 0 && k2 == 0; }
};

/// Tensor trigonometric modes with k1^2 + k2^2 <= max_k^2 (k = 0 included);
/// sin is only used along axes with a non-zero wave number.
std::vector<TestFunction> test_function_basis(int max_k = 3);

/// Space integrals of the weak-form integrands for one mode at one time.
struct ModeIntegrals {
  double rho_x = 0.0;        ///< int rho X
  double mass_flux = 0.0;    ///< int m . grad X
  Vec2 mom_x{0.0, 0.0};      ///< int m_a X
  Vec2 mom_flux{0.0, 0.0};   ///< int (m_a u + p e_a) . grad X
  double entropy_x = 0.0;    ///< int S X
  double entropy_flux = 0.0; ///< int S u . grad X
};

ModeIntegrals mode_integrals(const Field& state, const TestFunction& tf,
                             const GasParams& gas);

/// Consistency residuals of one test function. continuity and momentum are
/// signed defects of the weak equalities. entropy_production is
/// -(int int [S phi_t + S u . grad phi] + int S_0 phi(0)); for phi >= 0 an
/// entropy-stable approximation makes it non-negative.
struct ModeResidual {
  TestFunction mode;
  double continuity = 0.0;
  Vec2 momentum{0.0, 0.0};
  double entropy_production = 0.0;

  double momentum_abs() const;
};

/// Online space-time quadrature of the weak forms over [0, T]: midpoint rule
/// in time on (prev + next) / 2, cell averages in space.
class ConsistencyAccumulator {
public:
  ConsistencyAccumulator(Grid grid, GasParams gas, double horizon,
                         std::vector<TestFunction> basis);

  /// Must be called once per accepted step in time order, starting at t = 0.
  void accumulate(const Field& prev, const Field& next, double t, double dt);

  /// Observer adaptor for solver::run.
  Observer observer();

  bool complete() const;
  std::vector<ModeResidual> finalize() const;

  const std::vector<TestFunction>& basis() const { return basis_; }

private:
  struct Sums {
    double continuity = 0.0;
    Vec2 momentum{0.0, 0.0};
    double entropy = 0.0;
    double rho0 = 0.0;
    Vec2 mom0{0.0, 0.0};
    double entropy0 = 0.0;
  };

  Grid grid_;
  GasParams gas_;
  double horizon_;
  std::vector<TestFunction> basis_;
  // A 1D factor of a test function and its derivative at cell centers.
  struct Profile {
    std::vector<double> value;
    std::vector<double> slope;
  };

  std::vector<ModeIntegrals> integrate_all(const Field& state) const;

  // x1 factors are shared by all modes with the same (k1, f1).
  std::vector<Profile> x_profiles_;
  std::vector<std::size_t> x_index_;
  std::vector<Profile> y_profiles_;
  std::vector<Sums> sums_;
  double expected_t_ = 0.0;
  bool started_ = false;
};

struct StabilityReport {
  double sup_rho_l_gamma = 0.0;
  double sup_entropy_l_gamma = 0.0;
  double sup_momentum_l_p = 0.0;
  double min_specific_entropy = 0.0;
  double min_density = 0.0;
  double max_density = 0.0;
  double max_total_energy = 0.0;
  double s_lower = 0.0;
  /// True if some recorded state has S < rho s_lower beyond 1e-10.
  bool min_entropy_violated = false;
};

/// s_lower defaults to the minimum specific entropy of the initial data.
StabilityReport stability_report(const RunRecord& record);
StabilityReport stability_report(const RunRecord& record, double s_lower);

/// L1 distances between consecutive members for rho, m, S and E.
struct RefinementRow {
  int n_x_coarse = 0;
  int n_x_fine = 0;
  double rho = 0.0;
  double momentum = 0.0;
  double entropy = 0.0;
  double energy = 0.0;
};

/// Final-time snapshots ordered by resolution. All members are restricted to
/// the coarsest grid in the list before comparing.
std::vector<RefinementRow> refinement_errors(const std::vector<Field>& snapshots,
                                             const GasParams& gas);

/// Space-time variant: series[r][k] is the state of resolution r at times[k].
/// Time integration by the trapezoidal rule.
std::vector<RefinementRow> space_time_refinement_errors(
    const std::vector<std::vector<Field>>& series, const std::vector<double>& times,
    const GasParams& gas);

} // namespace dweuler
