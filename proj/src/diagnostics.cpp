#include "dweuler/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dweuler {

double energy_residual(const RunRecord& record) {
  if (record.steps.empty()) {
    return 0.0;
  }
  const double e0 = record.steps.front().totals.energy;
  double worst = 0.0;
  for (const auto& s : record.steps) {
    worst = std::max(worst, s.totals.energy - e0);
  }
  return worst;
}

// --- test functions -------------------------------------------------------

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double trig(Flavor f, int k, double x) {
  const double arg = kTwoPi * k * x;
  return f == Flavor::Cos ? std::cos(arg) : std::sin(arg);
}

double dtrig(Flavor f, int k, double x) {
  const double arg = kTwoPi * k * x;
  return f == Flavor::Cos ? -kTwoPi * k * std::sin(arg) : kTwoPi * k * std::cos(arg);
}

} // namespace

double TestFunction::psi(double t, double horizon) const {
  const double r = 1.0 - t / horizon;
  return r * r;
}

double TestFunction::dpsi(double t, double horizon) const {
  return -2.0 * (1.0 - t / horizon) / horizon;
}

double TestFunction::spatial(double x1, double x2) const {
  return trig(f1, k1, x1) * trig(f2, k2, x2);
}

Vec2 TestFunction::gradient(double x1, double x2) const {
  return {dtrig(f1, k1, x1) * trig(f2, k2, x2), trig(f1, k1, x1) * dtrig(f2, k2, x2)};
}

std::string TestFunction::label() const {
  std::ostringstream out;
  out << (f1 == Flavor::Cos ? "cos" : "sin") << k1 << "_"
      << (f2 == Flavor::Cos ? "cos" : "sin") << k2;
  return out.str();
}

std::vector<TestFunction> test_function_basis(int max_k) {
  std::vector<TestFunction> basis;
  for (int k1 = 0; k1 <= max_k; ++k1) {
    for (int k2 = 0; k2 <= max_k; ++k2) {
      if (k1 * k1 + k2 * k2 > max_k * max_k) {
        continue;
      }
      for (Flavor f1 : {Flavor::Cos, Flavor::Sin}) {
        if (k1 == 0 && f1 == Flavor::Sin) {
          continue;
        }
        for (Flavor f2 : {Flavor::Cos, Flavor::Sin}) {
          if (k2 == 0 && f2 == Flavor::Sin) {
            continue;
          }
          basis.push_back({k1, k2, f1, f2});
        }
      }
    }
  }
  return basis;
}

double ModeResidual::momentum_abs() const {
  return std::max(std::abs(momentum[0]), std::abs(momentum[1]));
}

namespace {

// Pointwise integrands of the weak forms, computed once per state.
struct Integrands {
  std::vector<double> rho, mx, my, S;
  // Momentum flux m u + p I and entropy flux S u.
  std::vector<double> fxx, fxy, fyy, sx, sy;
};

Integrands integrands(const Field& state, const GasParams& gas) {
  require_state(state);
  const std::size_t cells = state.grid().cells();
  const auto q = state.values();
  const double gm1 = gas.gamma() - 1.0;
  Integrands out;
  for (auto* v : {&out.rho, &out.mx, &out.my, &out.S, &out.fxx, &out.fxy, &out.fyy, &out.sx,
                  &out.sy}) {
    v->resize(cells);
  }
  for (std::size_t k = 0; k < cells; ++k) {
    const auto cell = q.subspan(4 * k, 4);
    const double rho = cell[kRho];
    const double mx = cell[kMomX];
    const double my = cell[kMomY];
    const double p = gm1 * internal_energy(cell);
    const double S = entropy_from_primitive(rho, p, gas);
    const double ux = mx / rho;
    const double uy = my / rho;
    out.rho[k] = rho;
    out.mx[k] = mx;
    out.my[k] = my;
    out.S[k] = S;
    out.fxx[k] = mx * ux + p;
    out.fxy[k] = mx * uy;
    out.fyy[k] = my * uy + p;
    out.sx[k] = S * ux;
    out.sy[k] = S * uy;
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> profile(Flavor f, int k, const Grid& grid) {
  const int n = grid.n_x();
  std::vector<double> value(n);
  std::vector<double> slope(n);
  for (int i = 0; i < n; ++i) {
    value[i] = trig(f, k, grid.center(i));
    slope[i] = dtrig(f, k, grid.center(i));
  }
  return {std::move(value), std::move(slope)};
}

// Per row j, sums over i against an x1 profile f and its derivative df:
// [rho f, mx f, my f, fxy f, fyy f, S f, sy f, mx df, fxx df, fxy df, sx df].
using RowSums = std::vector<std::array<double, 11>>;

RowSums row_sums(const Integrands& in, int n, const std::vector<double>& f,
                 const std::vector<double>& df) {
  RowSums rows(n);
  for (int j = 0; j < n; ++j) {
    std::array<double, 11> r{};
    const std::size_t base = static_cast<std::size_t>(j) * n;
    for (int i = 0; i < n; ++i) {
      const std::size_t k = base + i;
      const double a = f[i];
      const double b = df[i];
      r[0] += in.rho[k] * a;
      r[1] += in.mx[k] * a;
      r[2] += in.my[k] * a;
      r[3] += in.fxy[k] * a;
      r[4] += in.fyy[k] * a;
      r[5] += in.S[k] * a;
      r[6] += in.sy[k] * a;
      r[7] += in.mx[k] * b;
      r[8] += in.fxx[k] * b;
      r[9] += in.fxy[k] * b;
      r[10] += in.sx[k] * b;
    }
    rows[j] = r;
  }
  return rows;
}

ModeIntegrals combine(const RowSums& rows, const std::vector<double>& g,
                      const std::vector<double>& dg, double area) {
  ModeIntegrals t;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const auto& r = rows[j];
    t.rho_x += r[0] * g[j];
    t.mass_flux += r[7] * g[j] + r[2] * dg[j];
    t.mom_x[0] += r[1] * g[j];
    t.mom_x[1] += r[2] * g[j];
    t.mom_flux[0] += r[8] * g[j] + r[3] * dg[j];
    t.mom_flux[1] += r[9] * g[j] + r[4] * dg[j];
    t.entropy_x += r[5] * g[j];
    t.entropy_flux += r[10] * g[j] + r[6] * dg[j];
  }
  t.rho_x *= area;
  t.mass_flux *= area;
  t.mom_x[0] *= area;
  t.mom_x[1] *= area;
  t.mom_flux[0] *= area;
  t.mom_flux[1] *= area;
  t.entropy_x *= area;
  t.entropy_flux *= area;
  return t;
}

Field midpoint(const Field& a, const Field& b) {
  Field out(a.grid(), a.components());
  auto dst = out.values();
  const auto x = a.values();
  const auto y = b.values();
  for (std::size_t k = 0; k < dst.size(); ++k) {
    dst[k] = 0.5 * (x[k] + y[k]);
  }
  return out;
}

} // namespace

ModeIntegrals mode_integrals(const Field& state, const TestFunction& tf,
                             const GasParams& gas) {
  const Grid& grid = state.grid();
  const auto [f, df] = profile(tf.f1, tf.k1, grid);
  const auto [g, dg] = profile(tf.f2, tf.k2, grid);
  return combine(row_sums(integrands(state, gas), grid.n_x(), f, df), g, dg,
                 grid.h() * grid.h());
}

ConsistencyAccumulator::ConsistencyAccumulator(Grid grid, GasParams gas,
                                               double horizon,
                                               std::vector<TestFunction> basis)
    : grid_(grid), gas_(gas), horizon_(horizon), basis_(std::move(basis)) {
  if (!(horizon > 0.0)) {
    throw UsageError("consistency horizon must be positive");
  }
  // Modes sharing (k1, f1) share their row sums.
  std::vector<std::pair<int, Flavor>> keys;
  for (const auto& tf : basis_) {
    const std::pair<int, Flavor> key{tf.k1, tf.f1};
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) {
      keys.push_back(key);
      auto [f, df] = profile(tf.f1, tf.k1, grid_);
      x_profiles_.push_back({std::move(f), std::move(df)});
      it = keys.end() - 1;
    }
    x_index_.push_back(static_cast<std::size_t>(it - keys.begin()));
    auto [g, dg] = profile(tf.f2, tf.k2, grid_);
    y_profiles_.push_back({std::move(g), std::move(dg)});
  }
  sums_.resize(basis_.size());
}

std::vector<ModeIntegrals> ConsistencyAccumulator::integrate_all(const Field& state) const {
  const Integrands in = integrands(state, gas_);
  std::vector<RowSums> rows;
  for (const auto& p : x_profiles_) {
    rows.push_back(row_sums(in, grid_.n_x(), p.value, p.slope));
  }
  const double area = grid_.h() * grid_.h();
  std::vector<ModeIntegrals> out;
  for (std::size_t m = 0; m < basis_.size(); ++m) {
    out.push_back(combine(rows[x_index_[m]], y_profiles_[m].value, y_profiles_[m].slope, area));
  }
  return out;
}

void ConsistencyAccumulator::accumulate(const Field& prev, const Field& next,
                                        double t, double dt) {
  if (!(prev.grid() == grid_) || !(next.grid() == grid_)) {
    throw UsageError("consistency accumulator: grid mismatch");
  }
  const double tol = 1e-12 * std::max(1.0, horizon_);
  if (std::abs(t - expected_t_) > tol || !(dt > 0.0)) {
    std::ostringstream msg;
    msg << "consistency accumulator: step at t=" << t << " out of order (expected t="
        << expected_t_ << ")";
    throw UsageError(msg.str());
  }
  if (t + dt > horizon_ + tol) {
    throw UsageError("consistency accumulator: step beyond the horizon");
  }
  if (!started_) {
    const auto initial = integrate_all(prev);
    for (std::size_t m = 0; m < basis_.size(); ++m) {
      sums_[m].rho0 = initial[m].rho_x;
      sums_[m].mom0 = initial[m].mom_x;
      sums_[m].entropy0 = initial[m].entropy_x;
    }
    started_ = true;
  }
  const auto mid = integrate_all(midpoint(prev, next));
  const double t_mid = t + 0.5 * dt;
  for (std::size_t m = 0; m < basis_.size(); ++m) {
    const auto& tf = basis_[m];
    const double w = tf.dpsi(t_mid, horizon_);
    const double z = tf.psi(t_mid, horizon_);
    const auto& in = mid[m];
    auto& s = sums_[m];
    s.continuity += dt * (w * in.rho_x + z * in.mass_flux);
    s.momentum[0] += dt * (w * in.mom_x[0] + z * in.mom_flux[0]);
    s.momentum[1] += dt * (w * in.mom_x[1] + z * in.mom_flux[1]);
    s.entropy += dt * (w * in.entropy_x + z * in.entropy_flux);
  }
  expected_t_ = t + dt;
}

Observer ConsistencyAccumulator::observer() {
  return [this](const StepEvent& e) { accumulate(e.prev, e.next, e.t, e.dt); };
}

bool ConsistencyAccumulator::complete() const {
  return started_ && std::abs(expected_t_ - horizon_) <= 1e-12 * std::max(1.0, horizon_);
}

std::vector<ModeResidual> ConsistencyAccumulator::finalize() const {
  if (!complete()) {
    throw UsageError("consistency accumulator: run did not reach the horizon");
  }
  std::vector<ModeResidual> out;
  out.reserve(basis_.size());
  for (std::size_t m = 0; m < basis_.size(); ++m) {
    const auto& s = sums_[m];
    // psi(0) = 1.
    ModeResidual r;
    r.mode = basis_[m];
    r.continuity = s.continuity + s.rho0;
    r.momentum = {s.momentum[0] + s.mom0[0], s.momentum[1] + s.mom0[1]};
    r.entropy_production = -(s.entropy + s.entropy0);
    out.push_back(r);
  }
  return out;
}

// --- stability ------------------------------------------------------------

StabilityReport stability_report(const RunRecord& record) {
  if (record.steps.empty()) {
    throw UsageError("stability_report: empty record");
  }
  return stability_report(record, record.steps.front().min_specific_entropy);
}

StabilityReport stability_report(const RunRecord& record, double s_lower) {
  if (record.steps.empty()) {
    throw UsageError("stability_report: empty record");
  }
  StabilityReport r;
  r.s_lower = s_lower;
  const auto& first = record.steps.front();
  r.min_specific_entropy = first.min_specific_entropy;
  r.min_density = first.min_density;
  r.max_density = first.max_density;
  r.max_total_energy = first.max_total_energy;
  for (const auto& s : record.steps) {
    if (!std::isnan(s.rho_l_gamma)) {
      r.sup_rho_l_gamma = std::max(r.sup_rho_l_gamma, s.rho_l_gamma);
      r.sup_entropy_l_gamma = std::max(r.sup_entropy_l_gamma, s.entropy_l_gamma);
      r.sup_momentum_l_p = std::max(r.sup_momentum_l_p, s.momentum_l_p);
    }
    r.min_specific_entropy = std::min(r.min_specific_entropy, s.min_specific_entropy);
    r.min_density = std::min(r.min_density, s.min_density);
    r.max_density = std::max(r.max_density, s.max_density);
    r.max_total_energy = std::max(r.max_total_energy, s.max_total_energy);
  }
  r.min_entropy_violated = r.min_specific_entropy < s_lower - 1e-10;
  return r;
}

// --- refinement errors ----------------------------------------------------

namespace {

struct Restricted {
  Field rho;
  Field momentum;
  Field entropy;
  Field energy;
};

Restricted restrict_state(const Field& state, const Grid& coarse, const GasParams& gas) {
  require_state(state);
  const Field r = restrict_to(state, coarse);
  Field momentum(coarse, 2);
  for (int j = 0; j < coarse.n_x(); ++j) {
    for (int i = 0; i < coarse.n_x(); ++i) {
      momentum(i, j, 0) = r(i, j, kMomX);
      momentum(i, j, 1) = r(i, j, kMomY);
    }
  }
  return {r.component(kRho), std::move(momentum),
          restrict_to(entropy_field(state, gas), coarse), r.component(kEnergy)};
}

Grid coarsest(const std::vector<Field>& fields) {
  if (fields.empty()) {
    throw UsageError("no fields given");
  }
  Grid g = fields.front().grid();
  for (const auto& f : fields) {
    if (f.grid().n_x() < g.n_x()) {
      g = f.grid();
    }
  }
  return g;
}

} // namespace

std::vector<RefinementRow> refinement_errors(const std::vector<Field>& snapshots,
                                             const GasParams& gas) {
  if (snapshots.size() < 2) {
    throw UsageError("refinement_errors needs at least two snapshots");
  }
  const Grid common = coarsest(snapshots);
  std::vector<Restricted> members;
  for (const auto& s : snapshots) {
    members.push_back(restrict_state(s, common, gas));
  }
  std::vector<RefinementRow> rows;
  for (std::size_t k = 0; k + 1 < members.size(); ++k) {
    const auto& a = members[k];
    const auto& b = members[k + 1];
    rows.push_back({snapshots[k].grid().n_x(), snapshots[k + 1].grid().n_x(),
                    l1_distance(a.rho, b.rho), l1_distance(a.momentum, b.momentum),
                    l1_distance(a.entropy, b.entropy), l1_distance(a.energy, b.energy)});
  }
  return rows;
}

std::vector<RefinementRow> space_time_refinement_errors(
    const std::vector<std::vector<Field>>& series, const std::vector<double>& times,
    const GasParams& gas) {
  if (series.size() < 2) {
    throw UsageError("space_time_refinement_errors needs at least two resolutions");
  }
  if (times.size() < 2) {
    throw UsageError("space_time_refinement_errors needs at least two times");
  }
  for (const auto& s : series) {
    if (s.size() != times.size()) {
      throw UsageError("every resolution needs one snapshot per time");
    }
  }
  std::vector<std::vector<RefinementRow>> per_time;
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<Field> slice;
    for (const auto& s : series) {
      slice.push_back(s[k]);
    }
    per_time.push_back(refinement_errors(slice, gas));
  }
  std::vector<RefinementRow> rows = per_time.front();
  for (auto& r : rows) {
    r.rho = r.momentum = r.entropy = r.energy = 0.0;
  }
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double w = 0.5 * (times[k + 1] - times[k]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      rows[r].rho += w * (per_time[k][r].rho + per_time[k + 1][r].rho);
      rows[r].momentum += w * (per_time[k][r].momentum + per_time[k + 1][r].momentum);
      rows[r].entropy += w * (per_time[k][r].entropy + per_time[k + 1][r].entropy);
      rows[r].energy += w * (per_time[k][r].energy + per_time[k + 1][r].energy);
    }
  }
  return rows;
}

} // namespace dweuler
