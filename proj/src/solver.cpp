#include "dweuler/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dweuler {

std::string to_string(Scheme scheme) {
  return scheme == Scheme::LaxFriedrichs ? "lf" : "vfv";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "lf" || name == "LaxFriedrichs" || name == "lax-friedrichs") {
    return Scheme::LaxFriedrichs;
  }
  if (name == "vfv" || name == "VFV") {
    return Scheme::VFV;
  }
  throw UsageError("unknown scheme '" + name + "' (expected lf or vfv)");
}

void SchemeConfig::validate() const {
  if (!(cfl > 0.0 && cfl < 1.0)) {
    throw UsageError("cfl must lie in (0, 1)");
  }
  if (!(vfv_alpha_velocity > 0.0 && vfv_alpha_velocity < 2.0) ||
      !(vfv_alpha_density > 0.0 && vfv_alpha_density < 2.0)) {
    throw UsageError("VFV exponents must lie in (0, 2)");
  }
  if (!(t_end >= 0.0)) {
    throw UsageError("t_end must be non-negative");
  }
  if (norms_every < 0) {
    throw UsageError("norms_every must be non-negative");
  }
}

namespace {

struct CellPrimitive {
  double u;
  double v;
  double p;
  double c;
};

std::vector<CellPrimitive> primitives(const Field& state, const GasParams& gas) {
  require_state(state);
  const auto values = state.values();
  const std::size_t cells = state.grid().cells();
  const double gm1 = gas.gamma() - 1.0;
  std::vector<CellPrimitive> out(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    const double* q = values.data() + k * kStateComponents;
    const double rho = q[kRho];
    if (!(rho > 0.0)) {
      std::ostringstream msg;
      msg << "non-positive density " << rho << " in cell " << k;
      throw InvalidState(msg.str());
    }
    const double u = q[kMomX] / rho;
    const double v = q[kMomY] / rho;
    const double p = gm1 * (q[kEnergy] - 0.5 * rho * (u * u + v * v));
    if (!(p > 0.0)) {
      std::ostringstream msg;
      msg << "non-positive pressure " << p << " in cell " << k;
      throw InvalidState(msg.str());
    }
    out[k] = {u, v, p, std::sqrt(gas.gamma() * p / rho)};
  }
  return out;
}

double max_speed(const std::vector<CellPrimitive>& prim) {
  double lambda = 0.0;
  for (const auto& w : prim) {
    lambda = std::max({lambda, std::abs(w.u) + w.c, std::abs(w.v) + w.c});
  }
  return lambda;
}

// Physical flux along axis 0 (x1) or 1 (x2).
inline void physical_flux(const double* q, const CellPrimitive& w, int axis,
                          double* f) {
  const double un = axis == 0 ? w.u : w.v;
  f[kRho] = q[kRho] * un;
  f[kMomX] = q[kMomX] * un;
  f[kMomY] = q[kMomY] * un;
  f[kMomX + axis] += w.p;
  f[kEnergy] = (q[kEnergy] + w.p) * un;
}

// Face numerical flux = central part - dissipation. The dissipation is either
// the Rusanov term (lambda / 2) [q] or the VFV viscosity.
struct FaceRule {
  bool vfv = false;
  bool global_lambda = false;
  double lambda_global = 0.0;
  double nu_over_h = 0.0;
  double mu_over_h = 0.0;
};

inline void face_flux(const double* qa, const CellPrimitive& wa, const double* qb,
                      const CellPrimitive& wb, int axis, const FaceRule& rule,
                      double* out) {
  double fa[4];
  double fb[4];
  physical_flux(qa, wa, axis, fa);
  physical_flux(qb, wb, axis, fb);
  if (!rule.vfv) {
    double lambda = rule.lambda_global;
    if (!rule.global_lambda) {
      const double ua = axis == 0 ? wa.u : wa.v;
      const double ub = axis == 0 ? wb.u : wb.v;
      lambda = std::max(std::abs(ua) + wa.c, std::abs(ub) + wb.c);
    }
    for (int c = 0; c < 4; ++c) {
      out[c] = 0.5 * (fa[c] + fb[c]) - 0.5 * lambda * (qb[c] - qa[c]);
    }
    return;
  }
  for (int c = 0; c < 4; ++c) {
    out[c] = 0.5 * (fa[c] + fb[c]) - rule.nu_over_h * (qb[c] - qa[c]);
  }
  const double rho_face = 0.5 * (qa[kRho] + qb[kRho]);
  const double du = wb.u - wa.u;
  const double dv = wb.v - wa.v;
  const double visc = rule.mu_over_h * rho_face;
  out[kMomX] -= visc * du;
  out[kMomY] -= visc * dv;
  // Work of the viscous stress: rho_f du . (u_a + u_b) / 2.
  out[kEnergy] -= visc * 0.5 * ((wb.u * wb.u + wb.v * wb.v) -
                                (wa.u * wa.u + wa.v * wa.v));
}

Field conservative_update(const Field& state, const std::vector<CellPrimitive>& prim,
                          double dt, const FaceRule& rule) {
  const Grid& grid = state.grid();
  const int n = grid.n_x();
  const auto q = state.values();
  const std::size_t cells = grid.cells();
  // flux_x[k] is the flux through the face between cell k and its +x1
  // neighbor; flux_y likewise in x2.
  std::vector<double> flux_x(cells * 4);
  std::vector<double> flux_y(cells * 4);
  for (int j = 0; j < n; ++j) {
    const int jp = j + 1 == n ? 0 : j + 1;
    for (int i = 0; i < n; ++i) {
      const int ip = i + 1 == n ? 0 : i + 1;
      const std::size_t a = static_cast<std::size_t>(j) * n + i;
      const std::size_t bx = static_cast<std::size_t>(j) * n + ip;
      const std::size_t by = static_cast<std::size_t>(jp) * n + i;
      face_flux(q.data() + 4 * a, prim[a], q.data() + 4 * bx, prim[bx], 0, rule,
                flux_x.data() + 4 * a);
      face_flux(q.data() + 4 * a, prim[a], q.data() + 4 * by, prim[by], 1, rule,
                flux_y.data() + 4 * a);
    }
  }
  Field next(grid, kStateComponents);
  auto out = next.values();
  const double ratio = dt / grid.h();
  for (int j = 0; j < n; ++j) {
    const int jm = j == 0 ? n - 1 : j - 1;
    for (int i = 0; i < n; ++i) {
      const int im = i == 0 ? n - 1 : i - 1;
      const std::size_t k = static_cast<std::size_t>(j) * n + i;
      const std::size_t kx = static_cast<std::size_t>(j) * n + im;
      const std::size_t ky = static_cast<std::size_t>(jm) * n + i;
      for (int c = 0; c < 4; ++c) {
        const double div = (flux_x[4 * k + c] - flux_x[4 * kx + c]) +
                           (flux_y[4 * k + c] - flux_y[4 * ky + c]);
        out[4 * k + c] = q[4 * k + c] - ratio * div;
      }
    }
  }
  return next;
}

void check_admissible(const Field& next) {
  const auto q = next.values();
  for (std::size_t k = 0; k < next.grid().cells(); ++k) {
    const auto cell = q.subspan(4 * k, 4);
    const double rho = cell[kRho];
    const bool finite = std::isfinite(cell[0]) && std::isfinite(cell[1]) &&
                        std::isfinite(cell[2]) && std::isfinite(cell[3]);
    if (!finite || !(rho >= kPositivityFloor) ||
        !(internal_energy(cell) >= kPositivityFloor)) {
      std::ostringstream msg;
      msg << "positivity lost in cell " << k << " (rho=" << rho
          << ", rho e=" << (rho > 0 ? internal_energy(cell) : 0.0) << ")";
      throw StepRejected(msg.str());
    }
  }
}

} // namespace

double max_wave_speed(const Field& state, const GasParams& gas) {
  return max_speed(primitives(state, gas));
}

Field step_lax_friedrichs(const Field& state, double dt, const GasParams& gas,
                          bool global_lambda) {
  const auto prim = primitives(state, gas);
  FaceRule rule;
  rule.global_lambda = global_lambda;
  if (global_lambda) {
    rule.lambda_global = max_speed(prim);
  }
  Field next = conservative_update(state, prim, dt, rule);
  check_admissible(next);
  return next;
}

std::pair<double, double> vfv_coefficients(const Grid& grid, const SchemeConfig& cfg) {
  return {std::pow(grid.h(), cfg.vfv_alpha_density),
          std::pow(grid.h(), cfg.vfv_alpha_velocity)};
}

Field step_vfv(const Field& state, double dt, const GasParams& gas,
               const SchemeConfig& cfg) {
  const auto prim = primitives(state, gas);
  const auto [nu, mu] = vfv_coefficients(state.grid(), cfg);
  FaceRule rule;
  rule.vfv = true;
  rule.nu_over_h = nu / state.grid().h();
  rule.mu_over_h = mu / state.grid().h();
  Field next = conservative_update(state, prim, dt, rule);
  check_admissible(next);
  return next;
}

double stable_dt(const Field& state, const GasParams& gas, const SchemeConfig& cfg) {
  const double h = state.grid().h();
  double dt = cfg.cfl * h / max_wave_speed(state, gas);
  if (cfg.scheme == Scheme::VFV) {
    const auto [nu, mu] = vfv_coefficients(state.grid(), cfg);
    dt = std::min(dt, cfg.cfl * h * h / (4.0 * (nu + mu)));
  }
  return dt;
}

Field advance(const Field& state, double dt, const GasParams& gas,
              const SchemeConfig& cfg) {
  return cfg.scheme == Scheme::LaxFriedrichs
             ? step_lax_friedrichs(state, dt, gas, cfg.global_lambda)
             : step_vfv(state, dt, gas, cfg);
}

Totals totals(const Field& state, const GasParams& gas) {
  const auto sums = integrate(state);
  const double area = state.grid().h() * state.grid().h();
  const int n = state.grid().n_x();
  double entropy = 0.0;
  for (int j = 0; j < n; ++j) {
    double row = 0.0;
    for (int i = 0; i < n; ++i) {
      row += point_state(state, i, j, gas).S;
    }
    entropy += row;
  }
  return {sums[kRho], sums[kMomX], sums[kMomY], sums[kEnergy], entropy * area};
}

StepReport scan_state(const Field& state, const GasParams& gas, bool dense) {
  require_state(state);
  const int n = state.grid().n_x();
  const double g = gas.gamma();
  const double q_mom = 2.0 * g / (g + 1.0);
  StepReport r;
  r.max_wave_speed = max_wave_speed(state, gas);
  r.min_density = std::numeric_limits<double>::infinity();
  r.min_internal_energy = std::numeric_limits<double>::infinity();
  r.min_specific_entropy = std::numeric_limits<double>::infinity();
  r.max_density = -std::numeric_limits<double>::infinity();
  r.max_total_energy = -std::numeric_limits<double>::infinity();
  double sum[5] = {0, 0, 0, 0, 0};
  double norm_rho = 0.0;
  double norm_s = 0.0;
  double norm_m = 0.0;
  for (int j = 0; j < n; ++j) {
    double row[5] = {0, 0, 0, 0, 0};
    double row_rho = 0.0;
    double row_s = 0.0;
    double row_m = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto u = state.cell(i, j);
      const double rho = u[kRho];
      const double rho_e = internal_energy(u);
      const double S = entropy_from_primitive(rho, (g - 1.0) * rho_e, gas);
      r.min_density = std::min(r.min_density, rho);
      r.max_density = std::max(r.max_density, rho);
      r.min_internal_energy = std::min(r.min_internal_energy, rho_e);
      r.min_specific_entropy = std::min(r.min_specific_entropy, S / rho);
      r.max_total_energy = std::max(r.max_total_energy, u[kEnergy]);
      for (int c = 0; c < 4; ++c) {
        row[c] += u[c];
      }
      row[4] += S;
      if (dense) {
        row_rho += std::pow(rho, g);
        row_s += std::pow(std::abs(S), g);
        row_m += std::pow(std::hypot(u[kMomX], u[kMomY]), q_mom);
      }
    }
    for (int c = 0; c < 5; ++c) {
      sum[c] += row[c];
    }
    norm_rho += row_rho;
    norm_s += row_s;
    norm_m += row_m;
  }
  const double area = state.grid().h() * state.grid().h();
  r.totals = {sum[0] * area, sum[1] * area, sum[2] * area, sum[3] * area,
              sum[4] * area};
  if (dense) {
    r.rho_l_gamma = std::pow(norm_rho * area, 1.0 / g);
    r.entropy_l_gamma = std::pow(norm_s * area, 1.0 / g);
    r.momentum_l_p = std::pow(norm_m * area, 1.0 / q_mom);
  } else {
    r.rho_l_gamma = r.entropy_l_gamma = r.momentum_l_p =
        std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

RunRecord run(const Field& initial, const SchemeConfig& cfg, const GasParams& gas,
              const std::vector<Observer>& observers) {
  cfg.validate();
  RunRecord record{{}, initial, 0.0};
  record.steps.push_back(scan_state(initial, gas, cfg.norms_every > 0));
  double t = 0.0;
  int step = 0;
  while (t < cfg.t_end) {
    const Field& current = record.final_state;
    double dt = stable_dt(current, gas, cfg);
    bool last = false;
    if (t + dt >= cfg.t_end) {
      dt = cfg.t_end - t;
      last = true;
    }
    int retries = 0;
    Field next = [&]() {
      while (true) {
        try {
          return advance(current, dt, gas, cfg);
        } catch (const StepRejected& e) {
          if (retries == kMaxRetries) {
            std::ostringstream msg;
            msg << "step " << step + 1 << " at t=" << t << " rejected after "
                << kMaxRetries << " retries: " << e.what();
            throw SolverFailure(msg.str(), current, t);
          }
          ++retries;
          dt *= 0.5;
          last = false;
        }
      }
    }();
    ++step;
    const double t_next = last ? cfg.t_end : t + dt;
    for (const auto& observer : observers) {
      observer(StepEvent{current, next, t, dt, step});
    }
    const bool dense = cfg.norms_every > 0 && step % cfg.norms_every == 0;
    StepReport report = scan_state(next, gas, dense);
    report.step = step;
    report.time = t_next;
    report.dt = dt;
    report.retries = retries;
    record.steps.push_back(report);
    record.final_state = std::move(next);
    t = t_next;
  }
  record.final_time = t;
  return record;
}

} // namespace dweuler
