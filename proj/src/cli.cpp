#include "hylo/cli.hpp"

#include "hylo/analysis.hpp"
#include "hylo/maxwell.hpp"
#include "hylo/minimizer.hpp"
#include "hylo/report.hpp"
#include "hylo/shooting.hpp"
#include "hylo/verify.hpp"

#include <CLI11.hpp>
#include <boost/version.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#ifndef HYLO_VERSION
#define HYLO_VERSION "0.0.0"
#endif

namespace hylo::cli {

namespace fs = std::filesystem;

namespace {

struct Settings {
  std::string config;
  std::string out = "hylo-out";
  int jobs = 1;

  std::string potential = "builtin:wref";
  int dim = 3;
  int ell = 0;
  double r_max = 0.0;
  int nodes = 4000;

  std::string sigma;
  std::string sigma_range;
  double radius = 0.0;
  std::string q;
  std::string q_range;
  double tol = 1e-8;
  int max_iters = 200000;
  std::string init = "test";
  bool skip_c_hat = false;

  double omega = 0.0;
  double v = 0.0;
  double step = 0.1;
  double box_t = 2.0;
  double box_l = 4.0;
  int per_axis = 4;
  int time_points = 3;

  std::string radii = "5,10,20,40";
  double s_max = 0.0;
  int samples = 1000;
  std::string suite = "fast";
};

const std::vector<std::string> kSubcommands = {"check-potential", "solve",   "vortex", "maxwell",
                                               "scan-sigma",      "shoot",   "boost",  "demo-nonexistence",
                                               "verify"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  try {
    std::size_t used = 0;
    const double x = std::stod(t, &used);
    if (used == t.size() && std::isfinite(x)) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError(what + ": '" + text + "' is not a finite number");
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) values.push_back(parse_number(item, what));
  if (values.empty()) throw ConfigError(what + ": empty list");
  return values;
}

/// "lo:hi:count", geometric spacing.
std::vector<double> parse_range(const std::string& text, const std::string& what) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw ConfigError(what + ": expected lo:hi:count, got '" + text + "'");
  const double lo = parse_number(parts[0], what);
  const double hi = parse_number(parts[1], what);
  const double n = parse_number(parts[2], what);
  if (!(lo > 0.0) || !(hi >= lo) || n < 1.0 || n != std::floor(n))
    throw ConfigError(what + ": need 0 < lo <= hi and an integer count >= 1");
  const int count = static_cast<int>(n);
  std::vector<double> values;
  for (int k = 0; k < count; ++k)
    values.push_back(count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1)));
  return values;
}

std::vector<double> positive_values(const std::string& list, const std::string& range, const std::string& what) {
  if (!list.empty() && !range.empty()) throw ConfigError("give either --" + what + " or --" + what + "-range");
  std::vector<double> values = !range.empty() ? parse_range(range, what + "-range")
                               : !list.empty() ? parse_list(list, what)
                                               : std::vector<double>{};
  for (double x : values)
    if (!(x > 0.0)) throw ConfigError(what + " values must be positive");
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

double sphere_area(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    default: return 4.0 * std::numbers::pi;
  }
}

/// Plateau radius R of a test function whose charge sigma = K(u_R) is about `sigma`.
double radius_for_sigma(double sigma, int dim, double s0, TestFunctionSpec::Shape shape) {
  const double shell = shape == TestFunctionSpec::Shape::Ball ? 1.0 : std::pow(2.0, dim) - 1.0;
  return std::pow(2.0 * dim * sigma / (sphere_area(dim) * s0 * s0 * shell), 1.0 / dim);
}

/// Support of the initial profile plus 20 decay lengths at omega = m / 2.
double auto_r_max_variational(double support, double mass) {
  return std::max(20.0, std::ceil(support + 20.0 / (mass * std::sqrt(0.75))));
}

double auto_r_max_shooting(double omega, double mass) {
  return std::ceil(20.0 / std::sqrt(mass * mass - omega * omega) + 10.0);
}

InitSpec parse_init(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string{} : text.substr(colon + 1);
  if (kind == "test") return InitSpec::test_function(arg.empty() ? 0.0 : parse_number(arg, "init radius"));
  if (kind == "gaussian") {
    const double width = arg.empty() ? 5.0 : parse_number(arg, "init width");
    if (!(width > 0.0)) throw ConfigError("init width must be positive");
    return InitSpec::gaussian(width);
  }
  if (kind == "file") {
    if (arg.empty() || !fs::exists(arg)) throw ConfigError("init file '" + arg + "' does not exist");
    return InitSpec::file(arg);
  }
  throw ConfigError("init must be test[:R], gaussian[:width] or file:PATH, got '" + text + "'");
}

json potential_json(const PotentialSpec& p) {
  json j;
  j["name"] = p.name();
  j["m2"] = finite_number(p.m2());
  j["s0"] = finite_number(p.s0());
  j["s1"] = p.s1() ? finite_number(*p.s1()) : json(nullptr);
  j["p"] = p.growth_exponent() ? finite_number(*p.growth_exponent()) : json(nullptr);
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
  if (!f) throw ConfigError("write failed: " + path.string());
}

/// State shared by the subcommand handlers.
struct Task {
  const Settings& s;
  CLI::App* app;
  std::ostream& out;
  fs::path dir;
  json provenance;
  json result = json::object();
  std::string status = "ok";

  void set_grid(const RadialGrid& grid) { provenance["grid"] = to_json(grid); }
  void set_potential(const PotentialSpec& p) { provenance["potential"] = potential_json(p); }

  void write_csv(const std::string& name, const std::string& text) const {
    fs::create_directories(dir);
    write_text(dir / name, text);
  }

  void write_summary() const {
    json j;
    j["subcommand"] = app->get_name();
    j["status"] = status;
    j["result"] = result;
    j["provenance"] = provenance;
    fs::create_directories(dir);
    write_text(dir / "summary.json", j.dump(2) + "\n");
  }
};

void validate_common(const Settings& s) {
  if (s.jobs < 1) throw ConfigError("--jobs must be >= 1");
}

void validate_grid(const Settings& s) {
  if (s.dim != 2 && s.dim != 3) throw ConfigError("--dim must be 2 or 3");
  if (s.ell < 0) throw ConfigError("--ell must be >= 0");
  if (s.nodes < 64) throw ConfigError("--nodes must be >= 64");
  if (s.r_max < 0.0) throw ConfigError("--r-max must be positive (0 picks it automatically)");
}

void validate_solver(const Settings& s) {
  if (!(s.tol > 0.0)) throw ConfigError("--tol must be positive");
  if (s.max_iters < 1) throw ConfigError("--max-iters must be >= 1");
  if (s.radius < 0.0) throw ConfigError("--radius must be positive");
}

MinimizeConfig solver_config(const Settings& s, double sigma) {
  MinimizeConfig c;
  c.sigma = sigma;
  c.tol_residual = s.tol;
  c.max_iters = s.max_iters;
  c.init = parse_init(s.init);
  c.estimate_c_hat = !s.skip_c_hat;
  return c;
}

/// Grid and charge for the variational subcommands: sigma from --sigma, or
/// from the test function of radius --radius when --sigma is absent.
struct VariationalSetup {
  RadialGrid grid;
  std::vector<double> sigmas;
};

VariationalSetup variational_setup(const Settings& s, const PotentialSpec& pot, TestFunctionSpec::Shape shape,
                                   bool allow_many) {
  std::vector<double> sigmas = positive_values(s.sigma, s.sigma_range, "sigma");
  if (sigmas.empty() == (s.radius == 0.0)) throw ConfigError("give exactly one of --sigma (or --sigma-range) and --radius");
  if (!allow_many && sigmas.size() > 1) throw ConfigError("this subcommand takes a single sigma");
  if (shape == TestFunctionSpec::Shape::Annulus && s.radius != 0.0 && s.radius <= 1.0)
    throw ConfigError("--radius must exceed 1 for the annulus");
  double r_max = s.r_max;
  if (r_max == 0.0) {
    const double radius = s.radius > 0.0 ? s.radius
                                         : radius_for_sigma(sigmas.back(), s.dim, pot.s0(), shape);
    const TestFunctionSpec spec{shape, radius, pot.s0()};
    r_max = auto_r_max_variational(spec.support(), pot.mass());
  }
  RadialGrid grid(s.dim, s.ell, r_max, s.nodes);
  if (sigmas.empty()) {
    const TestFunctionSpec spec{shape, s.radius, pot.s0()};
    if (spec.support() >= r_max) throw ConfigError("--radius does not fit inside --r-max");
    const FunctionalContext ctx(grid, pot);
    sigmas = {functional_k(ctx, build_test_function(grid, spec))};
  }
  return {grid, sigmas};
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

std::string fmt(double x, int precision = 6) {
  std::ostringstream o;
  o.precision(precision);
  o << x;
  return o.str();
}

int cmd_check_potential(Task& t) {
  const auto pot = potentials::resolve(t.s.potential);
  if (t.s.s_max < 0.0) throw ConfigError("--s-max must be positive");
  if (t.s.samples < 10) throw ConfigError("--samples must be >= 10");
  t.set_potential(pot);
  const double s_max = t.s.s_max > 0.0 ? t.s.s_max : 10.0 * pot.s0();
  const auto report = check_assumptions(pot, s_max, t.s.samples);
  t.result = to_json(report);
  t.result["all_pass"] = report.all_pass();
  auto mark = [](bool b) { return b ? "PASS" : "FAIL"; };
  t.out << "check-potential " << pot.name() << ": w_positive " << mark(report.w_positive.pass) << ", nondegenerate "
        << mark(report.nondegenerate.pass) << ", hylomorphy " << mark(report.hylomorphy.pass) << ", growth "
        << mark(report.growth()) << ", omega0 = " << fmt(report.omega0) << "\n";
  t.write_summary();
  return kExitOk;
}

void write_profile(const Task& t, const Field& u) { t.write_csv("profile.csv", field_csv(u, "u")); }

int cmd_solve(Task& t) {
  validate_grid(t.s);
  validate_solver(t.s);
  const auto pot = potentials::resolve(t.s.potential);
  t.set_potential(pot);
  const auto setup = variational_setup(t.s, pot, TestFunctionSpec::Shape::Ball, false);
  t.set_grid(setup.grid);
  const FunctionalContext ctx(setup.grid, pot);
  const auto config = solver_config(t.s, setup.sigmas.front());
  const auto rec = minimize(ctx, config);
  t.result = to_json(rec);
  write_profile(t, rec.u);
  t.out << "solve: converged in " << rec.iterations << " iterations, sigma = " << fmt(rec.sigma)
        << ", omega = " << fmt(rec.omega) << ", E = " << fmt(rec.energy) << ", Lambda = " << fmt(rec.lambda_ratio)
        << ", in Sigma: " << yes_no(rec.in_sigma_set) << "\n";
  t.write_summary();
  return kExitOk;
}

int cmd_vortex(Task& t) {
  validate_grid(t.s);
  validate_solver(t.s);
  if (t.s.dim != 2 || t.s.ell == 0) throw ConfigError("vortex requires --dim 2 and --ell != 0");
  const auto pot = potentials::resolve(t.s.potential);
  t.set_potential(pot);
  const auto setup = variational_setup(t.s, pot, TestFunctionSpec::Shape::Annulus, false);
  t.set_grid(setup.grid);
  const FunctionalContext ctx(setup.grid, pot);
  auto config = solver_config(t.s, setup.sigmas.front());
  const auto rec = minimize(ctx, config);
  const auto m = angular_momentum(rec.u, rec.omega, t.s.ell);
  const auto bound = vortex_pointwise_bound(rec.u);
  const double peak = *std::max_element(rec.u.values().begin(), rec.u.values().end());
  t.result = to_json(rec);
  t.result["angular_momentum"] = {finite_number(m[0]), finite_number(m[1]), finite_number(m[2])};
  t.result["pointwise_bound"] = {{"lhs", finite_number(bound.lhs)},
                                 {"rhs", finite_number(bound.rhs)},
                                 {"holds", bound.holds()}};
  t.result["origin_ratio"] = finite_number(rec.u[0] / peak);
  write_profile(t, rec.u);
  t.out << "vortex: converged in " << rec.iterations << " iterations, ell = " << t.s.ell << ", omega = "
        << fmt(rec.omega) << ", M_z = " << fmt(m[2]) << ", pointwise bound holds: " << yes_no(bound.holds())
        << "\n";
  t.write_summary();
  return kExitOk;
}

json coupled_entry(const CoupledSolution& sol) {
  json j = to_json(sol);
  j["status"] = "converged";
  return j;
}

int cmd_maxwell(Task& t) {
  validate_grid(t.s);
  validate_solver(t.s);
  if (t.s.dim != 3 || t.s.ell != 0) throw ConfigError("maxwell requires --dim 3 and --ell 0");
  const auto qs = positive_values(t.s.q, t.s.q_range, "q");
  if (qs.empty()) throw ConfigError("maxwell needs --q or --q-range");
  const auto pot = potentials::resolve(t.s.potential);
  t.set_potential(pot);
  const auto setup = variational_setup(t.s, pot, TestFunctionSpec::Shape::Ball, true);
  t.set_grid(setup.grid);
  const auto base = solver_config(t.s, setup.sigmas.front());

  if (setup.sigmas.size() == 1 && qs.size() == 1) {
    const FunctionalContext ctx(setup.grid, pot, qs.front());
    const auto sol = coupled_minimize(ctx, base);
    t.result = to_json(sol);
    write_profile(t, sol.u);
    Field phi(setup.grid);
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = sol.omega * sol.gauge.phi_cap[i];
    t.write_csv("gauge.csv", field_csv(phi, "phi"));
    t.out << "maxwell: converged in " << sol.iterations << " iterations, sigma = " << fmt(sol.sigma)
          << ", q = " << fmt(sol.q) << ", omega = " << fmt(sol.omega) << ", max q Phi = "
          << fmt(sol.gauge.max_q_phi) << ", residuals " << fmt(sol.residual_u, 3) << " / "
          << fmt(sol.residual_phi, 3) << "\n";
    t.write_summary();
    return kExitOk;
  }

  struct Cell {
    double sigma;
    double q;
    json entry;
  };
  std::vector<Cell> cells;
  for (double sigma : setup.sigmas)
    for (double q : qs) cells.push_back({sigma, q, {}});
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      Cell& c = cells[i];
      auto config = base;
      config.sigma = c.sigma;
      try {
        const FunctionalContext ctx(setup.grid, pot, c.q);
        c.entry = coupled_entry(coupled_minimize(ctx, config));
      } catch (const MinimizeNonConvergence& e) {
        c.entry = {{"sigma", finite_number(c.sigma)}, {"q", finite_number(c.q)}, {"status", "nonconvergence"},
                   {"message", e.what()}};
      } catch (const Error& e) {
        c.entry = {{"sigma", finite_number(c.sigma)}, {"q", finite_number(c.q)}, {"status", "error"},
                   {"message", e.what()}};
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const int jobs = std::min<int>(t.s.jobs, static_cast<int>(cells.size()));
    for (int k = 1; k < jobs; ++k) pool.emplace_back(worker);
    worker();
  }
  std::ostringstream csv;
  csv << "sigma,q,status,omega,lambda_ratio,max_q_phi,in_sigma\n";
  json region = json::array();
  int converged = 0;
  for (const auto& c : cells) {
    const bool ok = c.entry["status"] == "converged";
    converged += ok;
    csv << format_double(c.sigma) << ',' << format_double(c.q) << ',' << c.entry["status"].get<std::string>();
    if (ok) {
      const bool in_sigma = c.entry["in_sigma_set"].get<bool>();
      csv << ',' << format_double(c.entry["omega"].get<double>()) << ','
          << format_double(c.entry["lambda_ratio"].get<double>()) << ','
          << format_double(c.entry["max_q_phi"].get<double>()) << ',' << (in_sigma ? 1 : 0) << '\n';
      t.out << "maxwell: sigma = " << fmt(c.sigma) << ", q = " << fmt(c.q) << ", omega = "
            << fmt(c.entry["omega"].get<double>()) << ", in Sigma: " << yes_no(in_sigma) << "\n";
    } else {
      csv << ",,,,\n";
      t.out << "maxwell: sigma = " << fmt(c.sigma) << ", q = " << fmt(c.q) << ", "
            << c.entry["status"].get<std::string>() << "\n";
    }
    region.push_back(c.entry);
  }
  t.result["cells"] = region;
  t.result["converged"] = converged;
  t.write_csv("region.csv", csv.str());
  t.out << "maxwell: " << converged << " of " << cells.size() << " (sigma, q) cells converged\n";
  t.write_summary();
  return kExitOk;
}

int cmd_scan_sigma(Task& t) {
  validate_grid(t.s);
  validate_solver(t.s);
  if (t.s.radius != 0.0) throw ConfigError("scan-sigma takes --sigma or --sigma-range, not --radius");
  const auto pot = potentials::resolve(t.s.potential);
  t.set_potential(pot);
  const auto setup = variational_setup(t.s, pot, TestFunctionSpec::Shape::Ball, true);
  t.set_grid(setup.grid);
  const FunctionalContext ctx(setup.grid, pot);
  const auto entries = sigma_scan(ctx, setup.sigmas, solver_config(t.s, setup.sigmas.front()), t.s.jobs);
  std::ostringstream csv;
  csv << "sigma,status,omega,lambda_ratio,energy,charge,iterations,in_sigma\n";
  json list = json::array();
  int converged = 0;
  int in_sigma = 0;
  for (const auto& e : entries) {
    list.push_back(to_json(e));
    csv << format_double(e.sigma) << ',' << e.status;
    if (e.record && e.status == "converged") {
      ++converged;
      in_sigma += e.in_sigma;
      csv << ',' << format_double(e.omega) << ',' << format_double(e.lambda_min) << ','
          << format_double(e.record->energy) << ',' << format_double(e.record->charge) << ','
          << e.record->iterations << ',' << (e.in_sigma ? 1 : 0) << '\n';
      t.out << "scan-sigma: sigma = " << fmt(e.sigma) << ", omega = " << fmt(e.omega) << ", Lambda = "
            << fmt(e.lambda_min) << ", in Sigma: " << yes_no(e.in_sigma) << "\n";
    } else {
      csv << ",,,,,,\n";
      t.out << "scan-sigma: sigma = " << fmt(e.sigma) << ", " << e.status << "\n";
    }
  }
  t.result["entries"] = list;
  t.result["converged"] = converged;
  t.result["in_sigma"] = in_sigma;
  t.write_csv("scan.csv", csv.str());
  t.out << "scan-sigma: " << converged << " of " << entries.size() << " converged, " << in_sigma
        << " in Sigma\n";
  t.write_summary();
  return kExitOk;
}

/// Frequency must lie strictly inside (0, m).
void validate_omega(double omega, const PotentialSpec& pot) {
  if (!(omega > 0.0) || !(omega < pot.mass()))
    throw ConfigError("--omega must satisfy 0 < omega < m = " + fmt(pot.mass()));
}

RadialGrid shooting_grid(const Settings& s, const PotentialSpec& pot) {
  const double r_max = s.r_max > 0.0 ? s.r_max : auto_r_max_shooting(s.omega, pot.mass());
  return RadialGrid(s.dim, s.ell, r_max, s.nodes);
}

int cmd_shoot(Task& t) {
  validate_grid(t.s);
  const auto pot = potentials::resolve(t.s.potential);
  t.set_potential(pot);
  validate_omega(t.s.omega, pot);
  const auto grid = shooting_grid(t.s, pot);
  t.set_grid(grid);
  const auto shot = shoot(pot, t.s.dim, t.s.ell, t.s.omega, grid);
  t.result = to_json(shot);
  write_profile(t, shot.profile);
  t.out << "shoot: omega = " << fmt(t.s.omega) << ", shooting parameter = " << fmt(shot.shoot_param, 12)
        << ", decay rate = " << fmt(shot.decay_rate) << ", residual = " << fmt(shot.residual, 3)
        << ", E = " << fmt(shot.energy) << "\n";
  t.write_summary();
  return kExitOk;
}

int cmd_boost(Task& t) {
  if (!(std::abs(t.s.v) < 1.0)) throw ConfigError("--v must satisfy |v| < 1");
  validate_grid(t.s);
  if (t.s.dim != 3 || t.s.ell != 0) throw ConfigError("boost requires --dim 3 and --ell 0");
  if (!(t.s.step > 0.0) || !(t.s.box_t > 0.0) || !(t.s.box_l > 0.0))
    throw ConfigError("--step, --box-t and --box-l must be positive");
  if (t.s.per_axis < 1 || t.s.time_points < 1) throw ConfigError("--per-axis and --time-points must be >= 1");
  const auto pot = potentials::resolve(t.s.potential);
  t.set_potential(pot);
  validate_omega(t.s.omega, pot);
  const auto grid = shooting_grid(t.s, pot);
  t.set_grid(grid);
  const auto shot = shoot(pot, 3, 0, t.s.omega, grid);
  const BoostedWave wave(shot.profile, t.s.omega, t.s.v);
  const auto samples = spacetime_box(t.s.box_t, t.s.box_l, t.s.per_axis, t.s.time_points);
  const double coarse = nkg_residual(wave, pot, samples, t.s.step);
  const double fine = nkg_residual(wave, pot, samples, 0.5 * t.s.step);
  const auto& b = wave.spec();
  const double dispersion = std::abs(b.omega_v * b.omega_v - b.k_v[0] * b.k_v[0] - b.k_v[1] * b.k_v[1] -
                                     b.k_v[2] * b.k_v[2] - t.s.omega * t.s.omega);
  t.result = to_json(b);
  t.result["residual_orders"] = json::array({{{"step", finite_number(t.s.step)}, {"residual", finite_number(coarse)}},
                                             {{"step", finite_number(0.5 * t.s.step)},
                                              {"residual", finite_number(fine)}}});
  t.result["residual_ratio"] = finite_number(coarse / fine);
  t.result["dispersion_error"] = finite_number(dispersion);
  t.result["profile"] = to_json(shot);
  write_profile(t, shot.profile);
  t.write_csv("boost.csv", "step,residual\n" + format_double(t.s.step) + ',' + format_double(coarse) + '\n' +
                               format_double(0.5 * t.s.step) + ',' + format_double(fine) + '\n');
  t.out << "boost: v = " << fmt(t.s.v) << ", gamma = " << fmt(b.gamma) << ", residual " << fmt(coarse, 4)
        << " -> " << fmt(fine, 4) << " (ratio " << fmt(coarse / fine, 4) << "), dispersion error "
        << fmt(dispersion, 3) << "\n";
  t.write_summary();
  return kExitOk;
}

int cmd_demo_nonexistence(Task& t) {
  validate_grid(t.s);
  const auto pot = potentials::resolve(t.s.potential);
  t.set_potential(pot);
  const auto sigmas = positive_values(t.s.sigma, "", "sigma");
  if (sigmas.size() != 1) throw ConfigError("demo-nonexistence takes a single --sigma");
  auto radii = parse_list(t.s.radii, "radii");
  for (double r : radii)
    if (!(r > 0.0)) throw ConfigError("radii must be positive");
  std::sort(radii.begin(), radii.end());
  const double r_max = t.s.r_max > 0.0 ? t.s.r_max : std::ceil(radii.back() + 2.0);
  if (radii.back() + 1.0 >= r_max) throw ConfigError("largest radius does not fit inside --r-max");
  const RadialGrid grid(t.s.dim, t.s.ell, r_max, t.s.nodes);
  t.set_grid(grid);
  const FunctionalContext ctx(grid, pot);
  const auto seq = nonexistence_sequence(ctx, sigmas.front(), radii);
  std::ostringstream csv;
  csv << "radius,omega,energy,charge\n";
  json list = json::array();
  for (const auto& e : seq) {
    csv << format_double(e.radius) << ',' << format_double(e.omega) << ',' << format_double(e.energy) << ','
        << format_double(e.charge) << '\n';
    list.push_back({{"radius", finite_number(e.radius)},
                    {"omega", finite_number(e.omega)},
                    {"energy", finite_number(e.energy)},
                    {"charge", finite_number(e.charge)}});
  }
  const bool negative = !seq.empty() && seq.back().energy < 0.0;
  bool decreasing = seq.size() >= 3;
  for (std::size_t i = seq.size() >= 3 ? seq.size() - 2 : seq.size(); i < seq.size(); ++i)
    decreasing = decreasing && seq[i].energy < seq[i - 1].energy;
  t.result["sigma"] = finite_number(sigmas.front());
  t.result["sequence"] = list;
  t.result["eventually_negative"] = negative;
  t.result["decreasing_tail"] = decreasing;
  t.write_csv("nonexistence.csv", csv.str());
  t.out << "demo-nonexistence: E(R) =";
  for (const auto& e : seq) t.out << ' ' << fmt(e.energy);
  t.out << ", eventually negative: " << yes_no(negative) << ", decreasing: " << yes_no(decreasing) << "\n";
  t.write_summary();
  return kExitOk;
}

int cmd_verify(Task& t) {
  VerifyOptions options;
  if (t.s.suite == "fast") options.suite = Suite::Fast;
  else if (t.s.suite == "all") options.suite = Suite::All;
  else throw ConfigError("suite must be 'fast' or 'all'");
  if (const char* scale = std::getenv("HYLO_VERIFY_TOLERANCE_SCALE"); scale && *scale) {
    options.tolerance_scale = parse_number(scale, "HYLO_VERIFY_TOLERANCE_SCALE");
    if (!(options.tolerance_scale > 0.0)) throw ConfigError("HYLO_VERIFY_TOLERANCE_SCALE must be positive");
  }
  int failed = 0;
  json list = json::array();
  run_verification(options, [&](const CriterionResult& r) {
    t.out << (r.pass ? "PASS" : "FAIL") << " criterion " << r.id << ' ' << r.name << ": " << r.detail << " ("
          << fmt(r.seconds, 3) << " s)\n";
    t.out.flush();
    failed += !r.pass;
    list.push_back({{"id", r.id},
                    {"name", r.name},
                    {"pass", r.pass},
                    {"detail", r.detail},
                    {"time_limit", finite_number(r.time_limit)}});
  });
  t.result["suite"] = t.s.suite;
  t.result["tolerance_scale"] = finite_number(options.tolerance_scale);
  t.result["criteria"] = list;
  t.result["failed"] = failed;
  t.status = failed == 0 ? "ok" : "failed";
  t.out << "verify " << t.s.suite << ": " << list.size() - failed << " passed, " << failed << " failed\n";
  t.write_summary();
  return failed == 0 ? kExitOk : kExitSolver;
}

void add_common(CLI::App* sub, Settings& s) {
  sub->add_option("--config", s.config, "Flat key=value configuration file; flags override it");
  sub->add_option("--out", s.out, "Output directory (HYLO_OUT overrides)");
  sub->add_option("--jobs", s.jobs, "Worker threads for scans");
}

void add_grid(CLI::App* sub, Settings& s) {
  sub->add_option("--potential", s.potential, "builtin:<wref|wbad|wfree> or a potential file");
  sub->add_option("--dim", s.dim, "Space dimension");
  sub->add_option("--ell", s.ell, "Angular index");
  sub->add_option("--r-max", s.r_max, "Outer radius (0 picks it from the problem)");
  sub->add_option("--nodes", s.nodes, "Number of grid intervals");
}

void add_solver(CLI::App* sub, Settings& s) {
  sub->add_option("--radius", s.radius, "Derive sigma from the test function of this radius");
  sub->add_option("--tol", s.tol, "Residual tolerance");
  sub->add_option("--max-iters", s.max_iters, "Iteration cap");
  sub->add_option("--init", s.init, "Initial profile: test[:R], gaussian[:width] or file:PATH");
  sub->add_flag("--skip-c-hat", s.skip_c_hat, "Classify in_sigma against m only");
}

using Handler = int (*)(Task&);

struct Subcommand {
  CLI::App* app;
  Settings* settings;
  Handler handler;
};

/// Options that do not change results and are left out of the config echo.
bool echo_excluded(const std::string& name) {
  return name == "config" || name == "out" || name == "jobs" || name == "help";
}

json config_echo(const CLI::App* app) {
  json echo = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    const std::string key = opt->get_single_name();
    if (echo_excluded(key)) continue;
    if (opt->get_expected_max() == 0) echo[key] = opt->count() > 0 && opt->as<bool>();
    else echo[key] = opt->count() > 0 ? opt->as<std::string>() : opt->get_default_str();
  }
  return echo;
}

int error_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const PreconditionError*>(&e) ||
      dynamic_cast<const DomainError*>(&e) || dynamic_cast<const GridMismatchError*>(&e))
    return kExitConfig;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kExitConfig;
  return kExitSolver;
}

std::string error_status(const std::exception& e) {
  if (dynamic_cast<const MinimizeNonConvergence*>(&e) || dynamic_cast<const ConvergenceError*>(&e))
    return "nonconvergence";
  if (dynamic_cast<const VanishingChargeError*>(&e)) return "vanishing_charge";
  if (dynamic_cast<const NoDecayingSolutionError*>(&e)) return "no_decaying_solution";
  if (dynamic_cast<const BracketError*>(&e)) return "bracket_failure";
  return error_code(e) == kExitConfig ? "config_error" : "error";
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(number) + ": empty key or value");
    entries.emplace_back(key, value);
  }
  return entries;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

/// Splices the config file's entries in right after the subcommand name so
/// that later command-line flags take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  const auto entries = parse_config(read_file(path));
  auto sub = std::find_first_of(args.begin(), args.end(), kSubcommands.begin(), kSubcommands.end());
  std::vector<std::string> flags;
  std::string subcommand;
  for (const auto& [key, value] : entries) {
    if (key == "subcommand") subcommand = value;
    else flags.push_back("--" + key + "=" + value);
  }
  if (sub == args.end()) {
    if (subcommand.empty()) throw ConfigError("no subcommand on the command line or in the config file");
    args.insert(args.begin(), subcommand);
    sub = args.begin();
  }
  args.insert(sub + 1, flags.begin(), flags.end());
  return args;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ground states of nonlinear Klein-Gordon equations", "hylo"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("hylo ") + HYLO_VERSION);

  std::map<std::string, Settings> settings;
  std::vector<Subcommand> subs;
  auto make = [&](const std::string& name, const std::string& help, Handler handler,
                  const std::function<void(Settings&)>& defaults) {
    Settings& s = settings[name];
    defaults(s);
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, s);
    subs.push_back({sub, &s, handler});
    return std::pair<CLI::App*, Settings*>{sub, &s};
  };
  auto keep = [](Settings&) {};

  {
    auto [sub, s] = make("check-potential", "Sampled check of the potential assumptions", cmd_check_potential, keep);
    sub->add_option("--potential", s->potential, "builtin:<wref|wbad|wfree> or a potential file");
    sub->add_option("--s-max", s->s_max, "Upper end of the sample range (0 picks 10 s0)");
    sub->add_option("--samples", s->samples, "Number of samples");
  }
  {
    auto [sub, s] = make("solve", "Minimize the energy at fixed charge", cmd_solve, keep);
    add_grid(sub, *s);
    sub->add_option("--sigma", s->sigma, "Charge");
    add_solver(sub, *s);
  }
  {
    auto [sub, s] = make("vortex", "Vortex ground state (dim 2, ell != 0)", cmd_vortex, [](Settings& d) {
      d.dim = 2;
      d.ell = 1;
    });
    add_grid(sub, *s);
    sub->add_option("--sigma", s->sigma, "Charge");
    add_solver(sub, *s);
  }
  {
    auto [sub, s] = make("maxwell", "Coupled Klein-Gordon-Maxwell ground states", cmd_maxwell, keep);
    add_grid(sub, *s);
    sub->add_option("--sigma", s->sigma, "Charge, or a comma-separated list");
    sub->add_option("--sigma-range", s->sigma_range, "lo:hi:count, geometric");
    sub->add_option("--q", s->q, "Coupling, or a comma-separated list");
    sub->add_option("--q-range", s->q_range, "lo:hi:count, geometric");
    add_solver(sub, *s);
  }
  {
    auto [sub, s] = make("scan-sigma", "Minimize over a list of charges", cmd_scan_sigma, keep);
    add_grid(sub, *s);
    sub->add_option("--sigma", s->sigma, "Comma-separated charges");
    sub->add_option("--sigma-range", s->sigma_range, "lo:hi:count, geometric");
    add_solver(sub, *s);
  }
  {
    auto [sub, s] = make("shoot", "Ground state at fixed frequency by shooting", cmd_shoot, keep);
    add_grid(sub, *s);
    sub->add_option("--omega", s->omega, "Frequency, 0 < omega < m")->required();
  }
  {
    auto [sub, s] = make("boost", "Residual of the Lorentz-boosted standing wave", cmd_boost,
                         [](Settings& d) { d.omega = 0.8; });
    add_grid(sub, *s);
    sub->add_option("--v", s->v, "Velocity, |v| < 1")->required();
    sub->add_option("--omega", s->omega, "Frequency of the standing wave");
    sub->add_option("--step", s->step, "Coarse finite-difference step (also run at half)");
    sub->add_option("--box-t", s->box_t, "Time extent of the sample box");
    sub->add_option("--box-l", s->box_l, "Half-width of the spatial sample box");
    sub->add_option("--per-axis", s->per_axis, "Spatial samples per axis");
    sub->add_option("--time-points", s->time_points, "Time samples");
  }
  {
    auto [sub, s] = make("demo-nonexistence", "Energies of fixed-charge states for a potential with W < 0",
                         cmd_demo_nonexistence, [](Settings& d) {
                           d.potential = "builtin:wbad";
                           d.sigma = "100";
                         });
    add_grid(sub, *s);
    sub->add_option("--sigma", s->sigma, "Charge");
    sub->add_option("--radii", s->radii, "Comma-separated plateau radii");
  }
  {
    auto [sub, s] = make("verify", "Run the acceptance suite", cmd_verify, keep);
    sub->add_option("suite,--suite", s->suite, "fast or all")->check(CLI::IsMember({"fast", "all"}));
  }

  std::vector<std::string> args;
  try {
    args = expand_config(raw_args);
  } catch (const Error& e) {
    err << "hylo: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "hylo " << HYLO_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "hylo: " << e.what() << "\n";
    const auto parsed = app.get_subcommands();
    err << (parsed.empty() ? app.help() : parsed.front()->help());
    return kExitConfig;
  }

  const auto chosen = std::find_if(subs.begin(), subs.end(), [](const Subcommand& s) { return s.app->parsed(); });
  const Settings& s = *chosen->settings;
  std::string dir = s.out;
  if (const char* env = std::getenv("HYLO_OUT"); env && *env) dir = env;

  Task task{s, chosen->app, out, fs::path(dir), json::object()};
  task.provenance["tool"] = "hylo";
  task.provenance["version"] = HYLO_VERSION;
  task.provenance["boost"] = BOOST_LIB_VERSION;
  task.provenance["subcommand"] = chosen->app->get_name();
  task.provenance["config"] = config_echo(chosen->app);

  try {
    validate_common(s);
    return chosen->handler(task);
  } catch (const std::exception& e) {
    const int code = error_code(e);
    err << "hylo " << chosen->app->get_name() << ": " << e.what() << "\n";
    task.status = error_status(e);
    task.result = {{"message", e.what()}};
    try {
      if (const auto* nc = dynamic_cast<const MinimizeNonConvergence*>(&e)) {
        task.result["record"] = to_json(nc->last());
        write_profile(task, nc->last().u);
      }
      task.write_summary();
    } catch (const std::exception& write_error) {
      err << "hylo: " << write_error.what() << "\n";
    }
    return code;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace hylo::cli
