#include "dweuler/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

namespace dweuler {

namespace fs = std::filesystem;
using json = nlohmann::json;

// --- configuration --------------------------------------------------------

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return "";
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || !std::isfinite(v)) {
    throw UsageError("config key '" + key + "': '" + value + "' is not a number");
  }
  return v;
}

long long parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) {
    throw UsageError("config key '" + key + "': '" + value + "' is not an integer");
  }
  return v;
}

std::uint64_t parse_seed(const std::string& value) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || value.front() == '-') {
    throw UsageError("config key 'seed': '" + value + "' is not an unsigned integer");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") {
    return true;
  }
  if (value == "false" || value == "0" || value == "no") {
    return false;
  }
  throw UsageError("config key '" + key + "': '" + value + "' is not a boolean");
}

int to_int(const std::string& key, const std::string& value) {
  const long long v = parse_int(key, value);
  if (v < -1000000000LL || v > 1000000000LL) {
    throw UsageError("config key '" + key + "': value out of range");
  }
  return static_cast<int>(v);
}

std::string ic_name(InitialData ic) {
  return ic == InitialData::KelvinHelmholtz ? "kh" : "vortex";
}

} // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "ic",        "scheme",          "gamma",           "cfl",
      "tend",      "alpha_u",         "alpha_rho",       "global_lambda",
      "norms_every", "n_lo",          "n_hi",            "seed",
      "eps",       "modes",           "J1",              "J2",
      "vortex_strength", "vortex_radius", "vortex_x",    "vortex_y",
      "vortex_u",  "vortex_v",        "snapshot_every",  "consistency_max_k",
      "workers",   "out"};
  return keys;
}

void apply_setting(ExperimentConfig& cfg, const std::string& raw_key,
                   const std::string& raw_value) {
  const std::string key = normalize_key(raw_key);
  const std::string value = trim(raw_value);
  if (key == "ic") {
    if (value == "kh") {
      cfg.ic = InitialData::KelvinHelmholtz;
    } else if (value == "vortex") {
      cfg.ic = InitialData::Vortex;
    } else {
      throw UsageError("config key 'ic': expected kh or vortex, got '" + value + "'");
    }
  } else if (key == "scheme") {
    cfg.scheme.scheme = scheme_from_string(value);
  } else if (key == "gamma") {
    cfg.gamma = parse_double(key, value);
  } else if (key == "cfl") {
    cfg.scheme.cfl = parse_double(key, value);
  } else if (key == "tend") {
    cfg.scheme.t_end = parse_double(key, value);
  } else if (key == "alpha_u") {
    cfg.scheme.vfv_alpha_velocity = parse_double(key, value);
  } else if (key == "alpha_rho") {
    cfg.scheme.vfv_alpha_density = parse_double(key, value);
  } else if (key == "global_lambda") {
    cfg.scheme.global_lambda = parse_bool(key, value);
  } else if (key == "norms_every") {
    cfg.scheme.norms_every = to_int(key, value);
  } else if (key == "n_lo") {
    cfg.n_lo = to_int(key, value);
  } else if (key == "n_hi") {
    cfg.n_hi = to_int(key, value);
  } else if (key == "seed") {
    cfg.kh.seed = parse_seed(value);
  } else if (key == "eps") {
    cfg.kh.eps = parse_double(key, value);
  } else if (key == "modes") {
    cfg.kh.modes = to_int(key, value);
  } else if (key == "J1") {
    cfg.kh.J1 = parse_double(key, value);
  } else if (key == "J2") {
    cfg.kh.J2 = parse_double(key, value);
  } else if (key == "vortex_strength") {
    cfg.vortex.strength = parse_double(key, value);
  } else if (key == "vortex_radius") {
    cfg.vortex.radius = parse_double(key, value);
  } else if (key == "vortex_x") {
    cfg.vortex.center[0] = parse_double(key, value);
  } else if (key == "vortex_y") {
    cfg.vortex.center[1] = parse_double(key, value);
  } else if (key == "vortex_u") {
    cfg.vortex.background[0] = parse_double(key, value);
  } else if (key == "vortex_v") {
    cfg.vortex.background[1] = parse_double(key, value);
  } else if (key == "snapshot_every") {
    cfg.snapshot_every = to_int(key, value);
  } else if (key == "consistency_max_k") {
    cfg.consistency_max_k = to_int(key, value);
  } else if (key == "workers") {
    cfg.workers = to_int(key, value);
  } else if (key == "out") {
    cfg.out = value;
  } else {
    throw UsageError("unknown config key '" + raw_key + "'");
  }
}

KeyValues parse_config_text(const std::string& text, const std::string& origin) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(origin + ":" + std::to_string(number) + ": expected key = value");
    }
    const std::string key = normalize_key(trim(line.substr(0, eq)));
    const auto& known = config_keys();
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw UsageError(origin + ":" + std::to_string(number) + ": unknown key '" + key + "'");
    }
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw UsageError("cannot read config file " + path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path.string());
}

ExperimentConfig make_config(const KeyValues& file, const KeyValues& overrides) {
  ExperimentConfig cfg;
  for (const auto* source : {&file, &overrides}) {
    for (const auto& [key, value] : *source) {
      apply_setting(cfg, key, value);
    }
  }
  if (!file.count("tend") && !overrides.count("tend")) {
    cfg.scheme.t_end = cfg.ic == InitialData::Vortex ? 0.02 : 2.0;
  }
  return cfg;
}

std::vector<int> ExperimentConfig::resolutions() const {
  std::vector<int> out;
  for (int n = n_lo; n <= n_hi; ++n) {
    out.push_back(1 << (5 + n));
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (n_lo < 1 || n_hi > kMaxLevel || n_lo > n_hi) {
    throw UsageError("resolution range must satisfy 1 <= n_lo <= n_hi <= " +
                     std::to_string(kMaxLevel));
  }
  if (workers < 1) {
    throw UsageError("workers must be >= 1");
  }
  if (snapshot_every < 0) {
    throw UsageError("snapshot_every must be >= 0");
  }
  if (consistency_max_k < 0 || consistency_max_k > 8) {
    throw UsageError("consistency_max_k must lie in [0, 8]");
  }
  if (!(gamma > 1.0)) {
    throw UsageError("gamma must be > 1");
  }
  scheme.validate();
  if (ic == InitialData::KelvinHelmholtz) {
    kh.validate();
  } else {
    vortex.validate(GasParams(gamma));
  }
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream out;
  out << "ic = " << ic_name(ic) << "\n"
      << "scheme = " << to_string(scheme.scheme) << "\n"
      << "gamma = " << format_double(gamma) << "\n"
      << "cfl = " << format_double(scheme.cfl) << "\n"
      << "tend = " << format_double(scheme.t_end) << "\n"
      << "alpha_u = " << format_double(scheme.vfv_alpha_velocity) << "\n"
      << "alpha_rho = " << format_double(scheme.vfv_alpha_density) << "\n"
      << "global_lambda = " << (scheme.global_lambda ? "true" : "false") << "\n"
      << "norms_every = " << scheme.norms_every << "\n"
      << "n_lo = " << n_lo << "\n"
      << "n_hi = " << n_hi << "\n"
      << "seed = " << kh.seed << "\n"
      << "eps = " << format_double(kh.eps) << "\n"
      << "modes = " << kh.modes << "\n"
      << "J1 = " << format_double(kh.J1) << "\n"
      << "J2 = " << format_double(kh.J2) << "\n"
      << "vortex_strength = " << format_double(vortex.strength) << "\n"
      << "vortex_radius = " << format_double(vortex.radius) << "\n"
      << "vortex_x = " << format_double(vortex.center[0]) << "\n"
      << "vortex_y = " << format_double(vortex.center[1]) << "\n"
      << "vortex_u = " << format_double(vortex.background[0]) << "\n"
      << "vortex_v = " << format_double(vortex.background[1]) << "\n"
      << "snapshot_every = " << snapshot_every << "\n"
      << "consistency_max_k = " << consistency_max_k << "\n";
  return out.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical()); }

std::string ExperimentConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

std::string csv_comment(const std::string& config_hash) {
  return std::string("# dweuler ") + kToolVersion + " config_hash=" + config_hash + "\n";
}

Field initial_state(const ExperimentConfig& cfg, const Grid& grid) {
  const GasParams gas(cfg.gamma);
  return cfg.ic == InitialData::KelvinHelmholtz ? kelvin_helmholtz(cfg.kh, grid, gas)
                                                : isentropic_vortex(cfg.vortex, grid, gas);
}

// --- running a ladder -----------------------------------------------------

std::string snapshot_name(int n_x) { return "snap_n" + std::to_string(n_x) + "_final.dwfld"; }
std::string stability_name(int n_x) { return "stability_n" + std::to_string(n_x) + ".csv"; }
std::string consistency_name(int n_x) { return "consistency_n" + std::to_string(n_x) + ".csv"; }
std::string defect_name(int N) { return "defect_N" + std::to_string(N) + ".dwfld"; }

namespace {

std::string step_snapshot_name(int n_x, int step) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snap_n%d_s%06d.dwfld", n_x, step);
  return buf;
}

fs::path output_dir(const ExperimentConfig& cfg) {
  return cfg.out.empty() ? fs::path(".") : cfg.out;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw UsageError("cannot create output directory " + dir.string() +
                     (ec ? ": " + ec.message() : ""));
  }
}

LadderRun run_one(const ExperimentConfig& cfg, int n) {
  const GasParams gas(cfg.gamma);
  const Grid grid(1 << (5 + n));
  const Field initial = initial_state(cfg, grid);
  const auto start = std::chrono::steady_clock::now();

  std::vector<Observer> observers;
  std::optional<ConsistencyAccumulator> acc;
  if (cfg.scheme.t_end > 0.0) {
    acc.emplace(grid, gas, cfg.scheme.t_end, test_function_basis(cfg.consistency_max_k));
    observers.push_back(acc->observer());
  }
  if (cfg.snapshot_every > 0) {
    const fs::path dir = output_dir(cfg);
    const int every = cfg.snapshot_every;
    const int n_x = grid.n_x();
    observers.push_back([dir, every, n_x, gamma = cfg.gamma](const StepEvent& e) {
      if (e.step % every == 0) {
        write_field(dir / step_snapshot_name(n_x, e.step), e.next, e.t + e.dt, gamma);
      }
    });
  }

  try {
    RunRecord record = run(initial, cfg.scheme, gas, observers);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::vector<ModeResidual> residuals;
    if (acc) {
      residuals = acc->finalize();
    }
    return {n, grid.n_x(), std::move(record), std::move(residuals), wall};
  } catch (const SolverFailure& failure) {
    fs::path dump = output_dir(cfg) / ("failure_n" + std::to_string(grid.n_x()) + ".dwfld");
    std::string what = "n_x=" + std::to_string(grid.n_x()) + ": " + failure.what();
    try {
      ensure_directory(output_dir(cfg));
      write_field(dump, failure.last_state, failure.time, cfg.gamma);
    } catch (const std::exception& e) {
      what += " (state dump failed: " + std::string(e.what()) + ")";
      dump.clear();
    }
    throw NumericalFailure(what, dump);
  }
}

} // namespace

std::vector<LadderRun> run_ladder(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.snapshot_every > 0) {
    ensure_directory(output_dir(cfg));
  }
  const int count = cfg.n_hi - cfg.n_lo + 1;
  std::vector<std::optional<LadderRun>> results(count);
  std::vector<std::exception_ptr> errors(count);
  // Largest grids first so the slowest run starts immediately.
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int k = next++; k < count; k = next++) {
      const int index = count - 1 - k;
      try {
        results[index] = run_one(cfg, cfg.n_lo + index);
      } catch (...) {
        errors[index] = std::current_exception();
      }
    }
  };
  const int threads = std::min(cfg.workers, count);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
    for (auto& th : pool) {
      th.join();
    }
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  std::vector<LadderRun> runs;
  for (auto& r : results) {
    runs.push_back(std::move(*r));
  }
  return runs;
}

// --- artifacts ------------------------------------------------------------

namespace {

std::ofstream open_csv(const fs::path& path, const std::string& hash) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << csv_comment(hash);
  out << std::setprecision(17);
  return out;
}

void close_csv(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

void write_stability_csv(const fs::path& path, const std::string& hash, const RunRecord& rec) {
  auto out = open_csv(path, hash);
  out << "step,time,dt,max_wave_speed,min_density,max_density,min_internal_energy,"
         "min_specific_entropy,max_total_energy,mass,momentum_x,momentum_y,energy,entropy,"
         "rho_l_gamma,entropy_l_gamma,momentum_l_p,retries\n";
  for (const auto& s : rec.steps) {
    out << s.step << ',' << s.time << ',' << s.dt << ',' << s.max_wave_speed << ','
        << s.min_density << ',' << s.max_density << ',' << s.min_internal_energy << ','
        << s.min_specific_entropy << ',' << s.max_total_energy << ',' << s.totals.mass << ','
        << s.totals.mom_x << ',' << s.totals.mom_y << ',' << s.totals.energy << ','
        << s.totals.entropy << ',' << s.rho_l_gamma << ',' << s.entropy_l_gamma << ','
        << s.momentum_l_p << ',' << s.retries << '\n';
  }
  close_csv(out, path);
}

void write_consistency_csv(const fs::path& path, const std::string& hash,
                           const std::vector<ModeResidual>& residuals) {
  auto out = open_csv(path, hash);
  out << "mode,k1,k2,continuity,momentum_x,momentum_y,entropy_production\n";
  for (const auto& r : residuals) {
    out << r.mode.label() << ',' << r.mode.k1 << ',' << r.mode.k2 << ',' << r.continuity << ','
        << r.momentum[0] << ',' << r.momentum[1] << ',' << r.entropy_production << '\n';
  }
  close_csv(out, path);
}

json config_json(const ExperimentConfig& cfg) {
  json out = json::object();
  std::istringstream in(cfg.canonical());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  out.close();
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
}

} // namespace

void write_run_artifacts(const ExperimentConfig& cfg, const std::string& command,
                         const std::vector<LadderRun>& runs) {
  const fs::path dir = output_dir(cfg);
  ensure_directory(dir);
  const std::string hash = cfg.hash_hex();
  json manifest;
  manifest["tool"] = "dweuler";
  manifest["version"] = kToolVersion;
  manifest["command"] = command;
  manifest["config_hash"] = hash;
  manifest["config"] = config_json(cfg);
  manifest["ic"] = ic_name(cfg.ic);
  manifest["scheme"] = to_string(cfg.scheme.scheme);
  manifest["seed"] = cfg.kh.seed;
  manifest["gamma"] = cfg.gamma;
  manifest["cfl"] = cfg.scheme.cfl;
  manifest["alpha_u"] = cfg.scheme.vfv_alpha_velocity;
  manifest["alpha_rho"] = cfg.scheme.vfv_alpha_density;
  manifest["t_end"] = cfg.scheme.t_end;
  manifest["runs"] = json::array();
  double total_wall = 0.0;
  for (const auto& r : runs) {
    write_field(dir / snapshot_name(r.n_x), r.record.final_state, r.record.final_time, cfg.gamma);
    write_stability_csv(dir / stability_name(r.n_x), hash, r.record);
    write_consistency_csv(dir / consistency_name(r.n_x), hash, r.residuals);
    manifest["runs"].push_back({{"n", r.n},
                                {"n_x", r.n_x},
                                {"steps", static_cast<int>(r.record.steps.size()) - 1},
                                {"final_time", r.record.final_time},
                                {"wall_time_s", r.wall_seconds},
                                {"snapshot", snapshot_name(r.n_x)},
                                {"stability_csv", stability_name(r.n_x)},
                                {"consistency_csv", consistency_name(r.n_x)}});
    total_wall += r.wall_seconds;
  }
  manifest["wall_time_s"] = total_wall;
  write_text(dir / "config.txt", cfg.canonical());
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<ConvergenceRow> convergence_table(const ExperimentConfig& cfg,
                                              const std::vector<LadderRun>& runs) {
  if (cfg.ic != InitialData::Vortex) {
    throw UsageError("convergence tables need the vortex initial data");
  }
  const GasParams gas(cfg.gamma);
  std::vector<ConvergenceRow> rows;
  for (const auto& r : runs) {
    const Field& u = r.record.final_state;
    const Grid& grid = u.grid();
    const Field exact = isentropic_vortex(cfg.vortex, grid, gas, r.record.final_time);
    ConvergenceRow row;
    row.n_x = r.n_x;
    row.l1_rho = l1_distance(u.component(kRho), exact.component(kRho));
    row.l1_momentum = l1_distance(u.component(kMomX), exact.component(kMomX)) +
                      l1_distance(u.component(kMomY), exact.component(kMomY));
    row.l1_energy = l1_distance(u.component(kEnergy), exact.component(kEnergy));
    double total = 0.0;
    for (int j = 0; j < grid.n_x(); ++j) {
      double line = 0.0;
      for (int i = 0; i < grid.n_x(); ++i) {
        line += relative_energy(point_state(u, i, j, gas), point_state(exact, i, j, gas), gas);
      }
      total += line;
    }
    row.relative_energy = total * grid.h() * grid.h();
    row.order_rho = rows.empty() ? std::nan("") : std::log2(rows.back().l1_rho / row.l1_rho);
    rows.push_back(row);
  }
  return rows;
}

std::vector<ResidualRatio> residual_ratios(const std::vector<LadderRun>& runs) {
  std::vector<ResidualRatio> out;
  for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
    const auto& a = runs[k].residuals;
    const auto& b = runs[k + 1].residuals;
    if (a.size() != b.size()) {
      throw UsageError("residual tables of different bases");
    }
    for (std::size_t m = 0; m < a.size(); ++m) {
      const std::pair<const char*, std::pair<double, double>> forms[] = {
          {"continuity", {std::abs(a[m].continuity), std::abs(b[m].continuity)}},
          {"momentum", {a[m].momentum_abs(), b[m].momentum_abs()}},
          {"entropy", {std::abs(a[m].entropy_production), std::abs(b[m].entropy_production)}},
      };
      for (const auto& [form, values] : forms) {
        ResidualRatio r;
        r.mode = a[m].mode.label();
        r.form = form;
        r.n_x_coarse = runs[k].n_x;
        r.n_x_fine = runs[k + 1].n_x;
        r.coarse = values.first;
        r.fine = values.second;
        r.ratio = values.first / values.second;
        r.at_floor = values.first <= kResidualFloor;
        out.push_back(r);
      }
    }
  }
  return out;
}

namespace {

void write_residual_tables(const fs::path& dir, const std::string& hash,
                           const std::vector<LadderRun>& runs,
                           const std::vector<ResidualRatio>& ratios) {
  {
    const fs::path path = dir / "consistency.csv";
    auto out = open_csv(path, hash);
    out << "mode,form,n_x,residual\n";
    for (const auto& r : runs) {
      for (const auto& m : r.residuals) {
        out << m.mode.label() << ",continuity," << r.n_x << ',' << std::abs(m.continuity) << '\n'
            << m.mode.label() << ",momentum," << r.n_x << ',' << m.momentum_abs() << '\n'
            << m.mode.label() << ",entropy," << r.n_x << ',' << std::abs(m.entropy_production)
            << '\n';
      }
    }
    close_csv(out, path);
  }
  const fs::path path = dir / "consistency_ratios.csv";
  auto out = open_csv(path, hash);
  out << "mode,form,n_x_coarse,n_x_fine,residual_coarse,residual_fine,ratio,at_floor\n";
  for (const auto& r : ratios) {
    out << r.mode << ',' << r.form << ',' << r.n_x_coarse << ',' << r.n_x_fine << ','
        << r.coarse << ',' << r.fine << ',' << r.ratio << ',' << (r.at_floor ? 1 : 0) << '\n';
  }
  close_csv(out, path);
}

void write_convergence_csv(const fs::path& dir, const std::string& hash,
                           const std::vector<ConvergenceRow>& rows) {
  const fs::path path = dir / "convergence.csv";
  auto out = open_csv(path, hash);
  out << "n_x,l1_rho,order_rho,l1_momentum,l1_energy,relative_energy\n";
  for (const auto& r : rows) {
    out << r.n_x << ',' << r.l1_rho << ',' << r.order_rho << ',' << r.l1_momentum << ','
        << r.l1_energy << ',' << r.relative_energy << '\n';
  }
  close_csv(out, path);
}

} // namespace

// --- analysis -------------------------------------------------------------

AnalysisResult analyze_directory(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) {
    throw UsageError("missing " + manifest_path.string());
  }
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw UsageError(manifest_path.string() + ": " + e.what());
  }
  double gamma = 1.4;
  std::string hash;
  std::vector<std::pair<int, fs::path>> entries;
  try {
    gamma = manifest.at("gamma").get<double>();
    hash = manifest.at("config_hash").get<std::string>();
    for (const auto& r : manifest.at("runs")) {
      entries.emplace_back(r.at("n_x").get<int>(), dir / r.at("snapshot").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw UsageError(manifest_path.string() + ": " + e.what());
  }
  if (entries.empty()) {
    throw UsageError(manifest_path.string() + ": no runs listed");
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string missing;
  for (const auto& [n_x, path] : entries) {
    if (!fs::exists(path)) {
      missing += "\n  " + path.string();
    }
  }
  if (!missing.empty()) {
    throw UsageError("incomplete run set in " + dir.string() + "; missing:" + missing);
  }

  const GasParams gas(gamma);
  std::vector<Field> states;
  double time = 0.0;
  for (const auto& [n_x, path] : entries) {
    FieldFile file = read_field(path);
    if (file.field.grid().n_x() != n_x || file.field.components() != kStateComponents) {
      throw FormatError(path.string() + ": expected a " + std::to_string(n_x) +
                        "^2 grid with 4 components");
    }
    time = file.time;
    states.push_back(std::move(file.field));
  }

  AnalysisResult result;
  if (states.size() >= 2) {
    result.refinement = refinement_errors(states, gas);
  }
  {
    const fs::path path = dir / "refinement.csv";
    auto out = open_csv(path, hash);
    out << "n_x_coarse,n_x_fine,rho,momentum,entropy,energy\n";
    for (const auto& r : result.refinement) {
      out << r.n_x_coarse << ',' << r.n_x_fine << ',' << r.rho << ',' << r.momentum << ','
          << r.entropy << ',' << r.energy << '\n';
    }
    close_csv(out, path);
  }

  const Ensemble ensemble = Ensemble::build(states, gas);
  for (int N = 2; N <= ensemble.size(); ++N) {
    const DefectField d = defects(ensemble, N, gas);
    const fs::path path = dir / defect_name(N);
    write_field(path, d.packed(), time, gamma);
    result.defect_files.push_back(path);
    result.levels.push_back({N, trace_compatibility(d, defect_parts(ensemble, N, gas), gas),
                             band_fraction(d.energy, 0.15, 0.85)});
  }
  {
    const fs::path path = dir / "trace.csv";
    auto out = open_csv(path, hash);
    out << "N,cells,lower_violations,upper_violations,identity_error,split_error,min_kinetic,"
           "min_internal,min_energy_defect,min_eigenvalue,band_fraction,passed\n";
    for (const auto& l : result.levels) {
      const auto& t = l.trace;
      out << l.N << ',' << t.cells << ',' << t.lower_violations << ',' << t.upper_violations
          << ',' << t.identity_error << ',' << t.split_error << ',' << t.min_kinetic << ','
          << t.min_internal << ',' << t.min_energy_defect << ',' << t.min_eigenvalue << ','
          << l.band_fraction << ',' << (t.passed() ? 1 : 0) << '\n';
    }
    close_csv(out, path);
  }
  if (ensemble.size() >= 3) {
    result.cesaro_cauchy = cesaro_cauchy_table(ensemble, gas);
    const fs::path path = dir / "cesaro_cauchy.csv";
    auto out = open_csv(path, hash);
    out << "N,rho,momentum,entropy,energy,reynolds,energy_defect,wasserstein1\n";
    for (const auto& r : result.cesaro_cauchy) {
      out << r.N << ',' << r.rho << ',' << r.momentum << ',' << r.entropy << ',' << r.energy
          << ',' << r.reynolds << ',' << r.energy_defect << ',' << r.wasserstein1 << '\n';
    }
    close_csv(out, path);
  }
  return result;
}

// --- command line ---------------------------------------------------------

namespace {

struct Overrides {
  KeyValues values;
  std::string config_file;
};

void add_experiment_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_file, "key = value config file");
  const std::pair<const char*, const char*> flags[] = {
      {"--out", "output directory (fallback: $DWEULER_OUT)"},
      {"--ic", "initial data: kh or vortex"},
      {"--scheme", "lf or vfv"},
      {"--gamma", "adiabatic exponent"},
      {"--cfl", "CFL number"},
      {"--tend", "final time"},
      {"--n-lo", "first ladder index (n_x = 2^(5+n))"},
      {"--n-hi", "last ladder index"},
      {"--seed", "Kelvin-Helmholtz perturbation seed"},
      {"--workers", "concurrent runs"},
      {"--snapshot-every", "also write a snapshot every k steps"},
      {"--alpha-u", "VFV velocity viscosity exponent"},
      {"--alpha-rho", "VFV mass diffusion exponent"},
  };
  for (const auto& [flag, help] : flags) {
    const std::string key = normalize_key(std::string(flag).substr(2));
    cmd->add_option_function<std::string>(
        flag, [&o, key](const std::string& v) { o.values[key] = v; }, help);
  }
  cmd->add_option_function<std::vector<std::string>>(
      "--set",
      [&o](const std::vector<std::string>& items) {
        for (const auto& item : items) {
          const auto eq = item.find('=');
          if (eq == std::string::npos) {
            throw UsageError("--set expects key=value, got '" + item + "'");
          }
          o.values[normalize_key(trim(item.substr(0, eq)))] = trim(item.substr(eq + 1));
        }
      },
      "any config key as key=value");
}

ExperimentConfig resolve(const Overrides& o, std::optional<InitialData> forced) {
  KeyValues file;
  if (!o.config_file.empty()) {
    file = read_config_file(o.config_file);
  }
  KeyValues overrides = o.values;
  if (forced) {
    const std::string name = ic_name(*forced);
    for (const auto* source : {&file, &overrides}) {
      const auto it = source->find("ic");
      if (it != source->end() && it->second != name) {
        throw UsageError("this command requires ic = " + name);
      }
    }
    overrides["ic"] = name;
  }
  ExperimentConfig cfg = make_config(file, overrides);
  if (cfg.out.empty()) {
    const char* env = std::getenv("DWEULER_OUT");
    cfg.out = env && *env ? fs::path(env) : fs::path("dweuler_out");
  }
  cfg.validate();
  return cfg;
}

void print_runs(std::ostream& out, const std::vector<LadderRun>& runs) {
  for (const auto& r : runs) {
    out << "n_x=" << r.n_x << " steps=" << r.record.steps.size() - 1
        << " t=" << r.record.final_time << " wall=" << std::fixed << std::setprecision(2)
        << r.wall_seconds << "s" << std::defaultfloat << std::setprecision(6) << "\n";
  }
}

} // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weak and Cesaro convergence experiments for the 2D Euler equations", "dweuler"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Overrides run_opts, cons_opts, conv_opts;
  std::string analyze_dir;
  auto* run_cmd = app.add_subcommand("run", "run a resolution ladder and write snapshots");
  add_experiment_options(run_cmd, run_opts);
  auto* analyze_cmd = app.add_subcommand("analyze", "refinement, Cesaro and defect analysis of a run directory");
  analyze_cmd->add_option("dir,--out", analyze_dir, "run directory (fallback: $DWEULER_OUT)");
  auto* cons_cmd = app.add_subcommand("consistency", "run a ladder and tabulate consistency residuals");
  add_experiment_options(cons_cmd, cons_opts);
  auto* conv_cmd = app.add_subcommand("convergence", "vortex ladder against the exact solution");
  add_experiment_options(conv_cmd, conv_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*run_cmd || *cons_cmd) {
      const bool consistency = static_cast<bool>(*cons_cmd);
      const ExperimentConfig cfg = resolve(consistency ? cons_opts : run_opts, std::nullopt);
      ensure_directory(cfg.out);
      const auto runs = run_ladder(cfg);
      write_run_artifacts(cfg, consistency ? "consistency" : "run", runs);
      print_runs(out, runs);
      if (consistency) {
        const auto ratios = residual_ratios(runs);
        write_residual_tables(cfg.out, cfg.hash_hex(), runs, ratios);
        int weak = 0;
        int floor = 0;
        for (const auto& r : ratios) {
          floor += r.at_floor ? 1 : 0;
          weak += !r.at_floor && !(r.ratio > 1.5) ? 1 : 0;
        }
        out << ratios.size() << " residual ratios, " << weak << " at or below 1.5, " << floor
            << " at rounding level\n";
      }
      out << "wrote " << cfg.out.string() << "\n";
    } else if (*conv_cmd) {
      const ExperimentConfig cfg = resolve(conv_opts, InitialData::Vortex);
      ensure_directory(cfg.out);
      const auto runs = run_ladder(cfg);
      write_run_artifacts(cfg, "convergence", runs);
      const auto rows = convergence_table(cfg, runs);
      write_convergence_csv(cfg.out, cfg.hash_hex(), rows);
      out << "n_x      l1_rho        order   relative_energy\n";
      for (const auto& r : rows) {
        char line[128];
        std::snprintf(line, sizeof line, "%-8d %.6e  %6.3f  %.6e\n", r.n_x, r.l1_rho,
                      r.order_rho, r.relative_energy);
        out << line;
      }
      out << "wrote " << cfg.out.string() << "\n";
    } else if (*analyze_cmd) {
      if (analyze_dir.empty()) {
        const char* env = std::getenv("DWEULER_OUT");
        if (!env || !*env) {
          throw UsageError("analyze needs a run directory (argument, --out or $DWEULER_OUT)");
        }
        analyze_dir = env;
      }
      const AnalysisResult res = analyze_directory(analyze_dir);
      for (const auto& r : res.refinement) {
        out << "L1 " << r.n_x_coarse << "->" << r.n_x_fine << ": rho=" << r.rho
            << " m=" << r.momentum << " S=" << r.entropy << " E=" << r.energy << "\n";
      }
      for (const auto& r : res.cesaro_cauchy) {
        out << "Cesaro " << r.N << "->" << r.N + 1 << ": rho=" << r.rho << " W1=" << r.wasserstein1
            << "\n";
      }
      for (const auto& l : res.levels) {
        out << "N=" << l.N << " trace " << (l.trace.passed() ? "ok" : "VIOLATED")
            << " min_E=" << l.trace.min_energy_defect << " min_eig=" << l.trace.min_eigenvalue
            << " band=" << l.band_fraction << "\n";
      }
      out << "wrote analysis to " << analyze_dir << "\n";
    }
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\nstate dump: " << e.state_dump.string() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

} // namespace dweuler
