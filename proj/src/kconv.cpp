#include "dweuler/kconv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace dweuler {

namespace {

constexpr int kDim = 2;

void require_level(const Ensemble& ensemble, int N) {
  if (N < 1 || N > ensemble.size()) {
    throw UsageError("Cesaro level N=" + std::to_string(N) + " outside [1, " +
                     std::to_string(ensemble.size()) + "]");
  }
}

} // namespace

Ensemble Ensemble::build(const std::vector<Field>& states, const GasParams& gas) {
  if (states.empty()) {
    throw UsageError("ensemble needs at least one member");
  }
  Grid common = states.front().grid();
  for (std::size_t k = 0; k < states.size(); ++k) {
    require_state(states[k]);
    if (k > 0 && states[k].grid().n_x() < states[k - 1].grid().n_x()) {
      throw UsageError("ensemble members must be ordered by resolution");
    }
    if (!states[k].grid().refines(common)) {
      throw UsageError("ensemble members are not nested");
    }
  }
  std::vector<EnsembleMember> members;
  for (const auto& s : states) {
    const Field r = restrict_to(s, common);
    Field momentum(common, 2);
    for (int j = 0; j < common.n_x(); ++j) {
      for (int i = 0; i < common.n_x(); ++i) {
        if (!(r(i, j, kRho) > 0.0)) {
          throw DomainError("ensemble member with non-positive density");
        }
        momentum(i, j, 0) = r(i, j, kMomX);
        momentum(i, j, 1) = r(i, j, kMomY);
      }
    }
    members.push_back({s.grid().n_x(), r.component(kRho), std::move(momentum),
                       restrict_to(entropy_field(s, gas), common),
                       r.component(kEnergy)});
  }
  return Ensemble(common, std::move(members));
}

double ordered_mean(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  return sum / static_cast<double>(values.size());
}

namespace {

// Cesaro mean of one component of one per-member field.
template <typename Getter>
Field cesaro_component(const Ensemble& ens, int N, int components, Getter get) {
  const Grid& g = ens.grid();
  Field out(g, components);
  std::array<double, 64> buf{};
  for (int j = 0; j < g.n_x(); ++j) {
    for (int i = 0; i < g.n_x(); ++i) {
      for (int c = 0; c < components; ++c) {
        for (int n = 0; n < N; ++n) {
          buf[n] = get(ens.member(n))(i, j, c);
        }
        out(i, j, c) = ordered_mean(std::span<const double>(buf.data(), N));
      }
    }
  }
  return out;
}

} // namespace

CesaroFields cesaro(const Ensemble& ensemble, int N) {
  require_level(ensemble, N);
  if (N > 64) {
    throw UsageError("Cesaro level above 64 is not supported");
  }
  return {
      cesaro_component(ensemble, N, 1, [](const EnsembleMember& m) -> const Field& { return m.rho; }),
      cesaro_component(ensemble, N, 2, [](const EnsembleMember& m) -> const Field& { return m.momentum; }),
      cesaro_component(ensemble, N, 1, [](const EnsembleMember& m) -> const Field& { return m.entropy; }),
      cesaro_component(ensemble, N, 1, [](const EnsembleMember& m) -> const Field& { return m.energy; }),
  };
}

std::vector<Atom> empirical_measure(const Ensemble& ensemble, int N, int i, int j) {
  require_level(ensemble, N);
  std::vector<Atom> atoms;
  atoms.reserve(N);
  for (int n = 0; n < N; ++n) {
    const auto& m = ensemble.member(n);
    atoms.push_back({m.rho(i, j, 0), m.momentum(i, j, 0), m.momentum(i, j, 1),
                     m.entropy(i, j, 0)});
  }
  return atoms;
}

namespace {

// Mean over the first N atoms of f(atom) compared with f(mean atom), per cell.
struct CellDefect {
  double r11, r12, r22, energy;
};

CellDefect cell_defect(const std::vector<Atom>& atoms, const Atom& mean,
                       const GasParams& gas) {
  const int N = static_cast<int>(atoms.size());
  std::array<double, 64> f11{}, f12{}, f22{}, fe{};
  for (int n = 0; n < N; ++n) {
    const auto& a = atoms[n];
    const double p = pressure(a[0], a[3], gas);
    f11[n] = a[1] * a[1] / a[0] + p;
    f12[n] = a[1] * a[2] / a[0];
    f22[n] = a[2] * a[2] / a[0] + p;
    fe[n] = 0.5 * (a[1] * a[1] + a[2] * a[2]) / a[0] +
            internal_energy_density(a[0], a[3], gas);
  }
  const double p_mean = pressure(mean[0], mean[3], gas);
  const auto span = [N](const std::array<double, 64>& v) {
    return std::span<const double>(v.data(), N);
  };
  return {
      ordered_mean(span(f11)) - (mean[1] * mean[1] / mean[0] + p_mean),
      ordered_mean(span(f12)) - mean[1] * mean[2] / mean[0],
      ordered_mean(span(f22)) - (mean[2] * mean[2] / mean[0] + p_mean),
      ordered_mean(span(fe)) - (0.5 * (mean[1] * mean[1] + mean[2] * mean[2]) / mean[0] +
                                internal_energy_density(mean[0], mean[3], gas)),
  };
}

template <typename Visit>
void for_each_cell_defect(const Ensemble& ens, int N, const GasParams& gas, Visit visit) {
  require_level(ens, N);
  const CesaroFields avg = cesaro(ens, N);
  const int n = ens.grid().n_x();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Atom mean{avg.rho(i, j, 0), avg.momentum(i, j, 0), avg.momentum(i, j, 1),
                      avg.entropy(i, j, 0)};
      visit(i, j, cell_defect(empirical_measure(ens, N, i, j), mean, gas));
    }
  }
}

} // namespace

Field reynolds_defect(const Ensemble& ensemble, int N, const GasParams& gas) {
  Field out(ensemble.grid(), 3);
  for_each_cell_defect(ensemble, N, gas, [&](int i, int j, const CellDefect& d) {
    out(i, j, 0) = d.r11;
    out(i, j, 1) = d.r12;
    out(i, j, 2) = d.r22;
  });
  return out;
}

Field energy_defect(const Ensemble& ensemble, int N, const GasParams& gas) {
  Field out(ensemble.grid(), 1);
  for_each_cell_defect(ensemble, N, gas,
                       [&](int i, int j, const CellDefect& d) { out(i, j, 0) = d.energy; });
  return out;
}

std::array<double, 2> symmetric_eigenvalues(double a, double b, double c) {
  const double mid = 0.5 * (a + c);
  const double rad = 0.5 * std::hypot(a - c, 2.0 * b);
  return {mid + rad, mid - rad};
}

DefectField defects(const Ensemble& ensemble, int N, const GasParams& gas) {
  const Grid& g = ensemble.grid();
  DefectField out{Field(g, 3), Field(g, 1), Field(g, 1), Field(g, 1)};
  for_each_cell_defect(ensemble, N, gas, [&](int i, int j, const CellDefect& d) {
    out.reynolds(i, j, 0) = d.r11;
    out.reynolds(i, j, 1) = d.r12;
    out.reynolds(i, j, 2) = d.r22;
    out.energy(i, j, 0) = d.energy;
    const auto ev = symmetric_eigenvalues(d.r11, d.r12, d.r22);
    out.lambda1(i, j, 0) = ev[0];
    out.lambda2(i, j, 0) = ev[1];
  });
  return out;
}

Field DefectField::packed() const {
  const Grid& g = energy.grid();
  Field out(g, 6);
  for (int j = 0; j < g.n_x(); ++j) {
    for (int i = 0; i < g.n_x(); ++i) {
      out(i, j, 0) = reynolds(i, j, 0);
      out(i, j, 1) = reynolds(i, j, 1);
      out(i, j, 2) = reynolds(i, j, 2);
      out(i, j, 3) = energy(i, j, 0);
      out(i, j, 4) = lambda1(i, j, 0);
      out(i, j, 5) = lambda2(i, j, 0);
    }
  }
  return out;
}

DefectParts defect_parts(const Ensemble& ensemble, int N, const GasParams& gas) {
  require_level(ensemble, N);
  const Grid& g = ensemble.grid();
  DefectParts out{Field(g, 1), Field(g, 1)};
  for (int j = 0; j < g.n_x(); ++j) {
    for (int i = 0; i < g.n_x(); ++i) {
      double kinetic = 0.0;
      double internal = 0.0;
      double rho = 0.0;
      double m1 = 0.0;
      double m2 = 0.0;
      double S = 0.0;
      for (int n = 0; n < N; ++n) {
        const auto& mem = ensemble.member(n);
        const double r = mem.rho(i, j, 0);
        const double a = mem.momentum(i, j, 0);
        const double b = mem.momentum(i, j, 1);
        const double s = mem.entropy(i, j, 0);
        kinetic += 0.5 * (a * a + b * b) / r;
        internal += internal_energy_density(r, s, gas);
        rho += r;
        m1 += a;
        m2 += b;
        S += s;
      }
      rho /= N;
      m1 /= N;
      m2 /= N;
      S /= N;
      out.kinetic(i, j, 0) = kinetic / N - 0.5 * (m1 * m1 + m2 * m2) / rho;
      out.internal(i, j, 0) = internal / N - internal_energy_density(rho, S, gas);
    }
  }
  return out;
}

bool TraceReport::passed(double identity_tol) const {
  return lower_violations == 0 && upper_violations == 0 &&
         identity_error <= identity_tol && split_error <= identity_tol &&
         min_kinetic >= -1e-12 && min_internal >= -1e-12 &&
         min_energy_defect >= -1e-12 && min_eigenvalue >= -1e-10;
}

TraceReport trace_compatibility(const DefectField& d, const DefectParts& parts,
                                const GasParams& gas) {
  const Grid& g = d.energy.grid();
  const double dg = kDim * (gas.gamma() - 1.0);
  const double lo_factor = std::min(2.0, dg);
  const double hi_factor = std::max(2.0, dg);
  TraceReport r;
  r.cells = static_cast<int>(g.cells());
  r.min_kinetic = r.min_internal = r.min_energy_defect = r.min_eigenvalue =
      std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.n_x(); ++j) {
    for (int i = 0; i < g.n_x(); ++i) {
      const double trace = d.reynolds(i, j, 0) + d.reynolds(i, j, 2);
      const double e = d.energy(i, j, 0);
      const double k = parts.kinetic(i, j, 0);
      const double in = parts.internal(i, j, 0);
      const double tol = 1e-10 * (1.0 + std::abs(trace));
      if (lo_factor * e > trace + tol) {
        ++r.lower_violations;
      }
      if (trace > hi_factor * e + tol) {
        ++r.upper_violations;
      }
      r.identity_error = std::max(r.identity_error, std::abs(trace - 2.0 * k - dg * in));
      r.split_error = std::max(r.split_error, std::abs(e - k - in));
      r.min_kinetic = std::min(r.min_kinetic, k);
      r.min_internal = std::min(r.min_internal, in);
      r.min_energy_defect = std::min(r.min_energy_defect, e);
      r.min_eigenvalue = std::min(r.min_eigenvalue, d.lambda2(i, j, 0));
    }
  }
  return r;
}

// --- optimal transport ------------------------------------------------------

double solve_assignment(std::span<const double> cost, int n, std::vector<int>* assignment) {
  if (n < 1 || cost.size() != static_cast<std::size_t>(n) * n) {
    throw UsageError("assignment: cost matrix must be n x n");
  }
  // Shortest augmenting path with row/column potentials (1-based internally).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int row = 1; row <= n; ++row) {
    match[0] = row;
    int col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const int r0 = match[col0];
      double delta = inf;
      int col1 = 0;
      for (int col = 1; col <= n; ++col) {
        if (used[col]) {
          continue;
        }
        const double cur = cost[(r0 - 1) * n + (col - 1)] - u[r0] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (int col = 0; col <= n; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const int col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> rows(n);
  for (int col = 1; col <= n; ++col) {
    rows[match[col] - 1] = col - 1;
  }
  double total = 0.0;
  for (int row = 0; row < n; ++row) {
    total += cost[row * n + rows[row]];
  }
  if (assignment) {
    *assignment = std::move(rows);
  }
  return total;
}

double wasserstein(std::span<const Atom> a, std::span<const Atom> b, double r) {
  const int na = static_cast<int>(a.size());
  const int nb = static_cast<int>(b.size());
  if (na < 1 || nb < 1 || na > kMaxAtoms || nb > kMaxAtoms) {
    throw UsageError("wasserstein: atom counts must lie in [1, " +
                     std::to_string(kMaxAtoms) + "]");
  }
  if (!(r >= 1.0)) {
    throw UsageError("wasserstein: order r must be >= 1");
  }
  const int L = std::lcm(na, nb);
  std::vector<double> cost(static_cast<std::size_t>(L) * L);
  for (int p = 0; p < L; ++p) {
    const Atom& x = a[p / (L / na)];
    for (int q = 0; q < L; ++q) {
      const Atom& y = b[q / (L / nb)];
      double d2 = 0.0;
      for (int c = 0; c < 4; ++c) {
        d2 += (x[c] - y[c]) * (x[c] - y[c]);
      }
      const double d = std::sqrt(d2);
      cost[p * L + q] = r == 1.0 ? d : std::pow(d, r);
    }
  }
  const double total = solve_assignment(cost, L) / L;
  return r == 1.0 ? total : std::pow(total, 1.0 / r);
}

std::vector<CesaroCauchyRow> cesaro_cauchy_table(const Ensemble& ensemble,
                                                 const GasParams& gas) {
  if (ensemble.size() < 3) {
    throw UsageError("Cesaro-Cauchy table needs at least three members");
  }
  const Grid& g = ensemble.grid();
  std::vector<CesaroFields> avg;
  std::vector<DefectField> def;
  for (int N = 1; N <= ensemble.size(); ++N) {
    avg.push_back(cesaro(ensemble, N));
    def.push_back(defects(ensemble, N, gas));
  }
  std::vector<CesaroCauchyRow> rows;
  for (int N = 1; N < ensemble.size(); ++N) {
    const auto& a = avg[N - 1];
    const auto& b = avg[N];
    CesaroCauchyRow row;
    row.N = N;
    row.rho = l1_distance(a.rho, b.rho);
    row.momentum = l1_distance(a.momentum, b.momentum);
    row.entropy = l1_distance(a.entropy, b.entropy);
    row.energy = l1_distance(a.energy, b.energy);
    row.reynolds = l1_distance(def[N - 1].reynolds, def[N].reynolds);
    row.energy_defect = l1_distance(def[N - 1].energy, def[N].energy);
    double w = 0.0;
    for (int j = 0; j < g.n_x(); ++j) {
      double line = 0.0;
      for (int i = 0; i < g.n_x(); ++i) {
        line += wasserstein(empirical_measure(ensemble, N, i, j),
                            empirical_measure(ensemble, N + 1, i, j), 1.0);
      }
      w += line;
    }
    row.wasserstein1 = w * g.h() * g.h();
    rows.push_back(row);
  }
  return rows;
}

Field entropy_flux_average(const Ensemble& ensemble, int N) {
  require_level(ensemble, N);
  const Grid& g = ensemble.grid();
  Field out(g, 2);
  for (int j = 0; j < g.n_x(); ++j) {
    for (int i = 0; i < g.n_x(); ++i) {
      for (int c = 0; c < 2; ++c) {
        double sum = 0.0;
        for (int n = 0; n < N; ++n) {
          const auto& m = ensemble.member(n);
          sum += m.entropy(i, j, 0) * m.momentum(i, j, c) / m.rho(i, j, 0);
        }
        out(i, j, c) = sum / N;
      }
    }
  }
  return out;
}

double band_fraction(const Field& scalar, double lo, double hi) {
  const Grid& g = scalar.grid();
  double inside = 0.0;
  double total = 0.0;
  for (int j = 0; j < g.n_x(); ++j) {
    const double x2 = g.center(j);
    const bool in_band = x2 >= lo && x2 <= hi;
    for (int i = 0; i < g.n_x(); ++i) {
      double cell = 0.0;
      for (double v : scalar.cell(i, j)) {
        cell += std::abs(v);
      }
      total += cell;
      if (in_band) {
        inside += cell;
      }
    }
  }
  return total > 0.0 ? inside / total : 1.0;
}

} // namespace dweuler
