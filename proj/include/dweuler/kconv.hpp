#pragma once

#include <array>
#include <span>
#include <vector>

#include "dweuler/state.hpp"

namespace dweuler {

/// One resolution of the sequence, restricted to the common grid. Entropy is
/// computed on the member's own grid and then restricted.
struct EnsembleMember {
  int n_x = 0;
  Field rho;
  Field momentum;
  Field entropy;
  Field energy;
};

/// Final-time states of a resolution ladder on the coarsest participating grid.
class Ensemble {
public:
  /// `states` are conservative fields ordered by increasing resolution.
  static Ensemble build(const std::vector<Field>& states, const GasParams& gas);

  const Grid& grid() const { return grid_; }
  int size() const { return static_cast<int>(members_.size()); }
  const EnsembleMember& member(int k) const { return members_.at(k); }

private:
  Ensemble(Grid grid, std::vector<EnsembleMember> members)
      : grid_(grid), members_(std::move(members)) {}

  Grid grid_;
  std::vector<EnsembleMember> members_;
};

/// Cesaro averages of the first N members.
struct CesaroFields {
  Field rho;
  Field momentum;
  Field entropy;
  Field energy;
};

CesaroFields cesaro(const Ensemble& ensemble, int N);

/// Arithmetic mean in index order; the single summation path shared by the
/// Cesaro fields and the empirical-measure moments.
double ordered_mean(std::span<const double> values);

/// Reynolds stress defect (R11, R12, R22), energy defect and the eigenvalues
/// lambda1 >= lambda2 of the Reynolds defect.
struct DefectField {
  Field reynolds;
  Field energy;
  Field lambda1;
  Field lambda2;

  /// Six components per cell: R11, R12, R22, E, lambda1, lambda2.
  Field packed() const;
};

Field reynolds_defect(const Ensemble& ensemble, int N, const GasParams& gas);
Field energy_defect(const Ensemble& ensemble, int N, const GasParams& gas);
DefectField defects(const Ensemble& ensemble, int N, const GasParams& gas);

/// Closed-form eigenvalues of [[a, b], [b, c]], largest first.
std::array<double, 2> symmetric_eigenvalues(double a, double b, double c);

/// Kinetic and internal parts of the energy defect, computed directly from
/// the atoms without going through the Reynolds defect.
struct DefectParts {
  Field kinetic;
  Field internal;
};

DefectParts defect_parts(const Ensemble& ensemble, int N, const GasParams& gas);

struct TraceReport {
  int cells = 0;
  /// Cells violating min{2, d(gamma-1)} E <= tr R <= max{2, d(gamma-1)} E.
  int lower_violations = 0;
  int upper_violations = 0;
  /// max |tr R - 2K - d(gamma-1) I|.
  double identity_error = 0.0;
  /// max |E - K - I|.
  double split_error = 0.0;
  double min_kinetic = 0.0;
  double min_internal = 0.0;
  double min_energy_defect = 0.0;
  double min_eigenvalue = 0.0;

  bool passed(double identity_tol = 1e-12) const;
};

TraceReport trace_compatibility(const DefectField& defects, const DefectParts& parts,
                                const GasParams& gas);

/// Atom (rho, m1, m2, S) of a per-cell empirical measure, weight 1/N each.
using Atom = std::array<double, 4>;

std::vector<Atom> empirical_measure(const Ensemble& ensemble, int N, int i, int j);

/// Largest atom count accepted by wasserstein().
inline constexpr int kMaxAtoms = 8;

/// Exact W_r between two uniform empirical measures: atoms are replicated to
/// lcm(N_A, N_B) equal-weight copies and the assignment problem is solved.
double wasserstein(std::span<const Atom> a, std::span<const Atom> b, double r = 1.0);

/// Minimum-cost perfect matching of a square cost matrix (row-major, n x n).
/// Returns the total cost; `assignment[row]` receives the matched column.
double solve_assignment(std::span<const double> cost, int n,
                        std::vector<int>* assignment = nullptr);

/// Distances between consecutive Cesaro levels N and N+1.
struct CesaroCauchyRow {
  int N = 0;
  double rho = 0.0;
  double momentum = 0.0;
  double entropy = 0.0;
  double energy = 0.0;
  double reynolds = 0.0;
  double energy_defect = 0.0;
  /// Cell average of W_1 between the empirical measures of N and N+1 atoms.
  double wasserstein1 = 0.0;
};

std::vector<CesaroCauchyRow> cesaro_cauchy_table(const Ensemble& ensemble,
                                                 const GasParams& gas);

/// (1/N) sum S_n m_n / rho_n, two components.
Field entropy_flux_average(const Ensemble& ensemble, int N);

/// Fraction of the L1 mass of a scalar field inside x2 in [lo, hi], using
/// cell centers.
double band_fraction(const Field& scalar, double lo, double hi);

} // namespace dweuler
