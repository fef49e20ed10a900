#include "cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "yamabe/experiments.hpp"
#include "yamabe/io.hpp"

namespace yamabe::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Every number leaves through format_double, which refuses NaN and infinity.
json num(double v) { return json::parse(format_double(v)); }

struct Options {
  std::string config_path;
  std::string out_dir;
  int workers = 0;
  bool json_output = false;
  std::vector<double> lambdas;
  std::vector<std::string> runs;
};

ExperimentConfig resolve_config(const Options& o) {
  ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  // Precedence for the output directory: --out, then the config file, then
  // YAMABE_OUT in place of the built-in default.
  if (!o.out_dir.empty()) {
    cfg.output.dir = o.out_dir;
  } else if (cfg.output.dir == ExperimentConfig{}.output.dir) {
    if (const char* env = std::getenv("YAMABE_OUT"); env && *env) cfg.output.dir = env;
  }
  if (o.workers > 0) cfg.workers = o.workers;
  if (!o.lambdas.empty()) cfg.soliton.lambdas = o.lambdas;
  cfg.validate();
  return cfg;
}

fs::path prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw NumericalFailure("io", "cannot write " + path.string());
  f << text;
}

template <class Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw NumericalFailure("io", "cannot write " + path.string());
  fn(f);
}

// Config echo, version, status and timing, shared by every command. Written
// even when the command fails, with the failing stage recorded.
struct Manifest {
  json j;
  Clock::time_point t0 = Clock::now();

  Manifest(const std::string& command, const ExperimentConfig& cfg) {
    j["command"] = command;
    j["version"] = YAMABE_VERSION;
    j["config"] = serialize_config(cfg);
    j["status"] = "running";
  }
  void fail(const std::string& stage, const std::string& what) {
    j["status"] = "failed";
    j["failure_stage"] = stage;
    j["error"] = what;
  }
  void write(const fs::path& dir) {
    if (j["status"] == "running") j["status"] = "ok";
    j["seconds"] = num(since(t0));
    write_file(dir / "manifest.json", j.dump(2) + "\n");
  }
};

std::string tag(double v) { return format_double(v); }

// ---- soliton ---------------------------------------------------------------

int cmd_soliton(const ExperimentConfig& cfg, std::ostream& out) {
  const fs::path dir = prepare_dir(fs::path(cfg.output.dir) / "soliton");
  Manifest man("soliton", cfg);
  const double p = cfg.model.p();
  const auto& tol = cfg.acceptance;
  bool pass = true;
  json fits = json::array();
  try {
    for (double lambda : cfg.soliton.lambdas) {
      const auto prof = shoot_profile(lambda, p, cfg.soliton.x_min, cfg.soliton.x_max, cfg.soliton.dx);
      write_with(dir / ("profile_lambda_" + tag(lambda) + ".csv"), [&](std::ostream& os) { write_profile_csv(os, prof); });
      json entry;
      entry["lambda"] = num(lambda);
      entry["gamma"] = num(gamma_of_lambda(lambda, p));
      if (lambda > 1.0) {
        const auto tf = fit_tail(prof);
        const double rel = std::abs(tf.gamma_fit / prof.decay.gamma - 1.0);
        entry["tail_fit"] = {{"gamma_fit", num(tf.gamma_fit)}, {"c_fit", num(tf.c_fit)}, {"x_window", {num(tf.x_lo), num(tf.x_hi)}},
                             {"relative_error", num(rel)}, {"pass", rel <= tol.tail_rel}};
        pass = pass && rel <= tol.tail_rel;
      } else {
        // lambda = 1 is the explicit Barenblatt wave.
        const double c = barenblatt_normalizing_c(p);
        double sup = 0.0;
        for (std::size_t i = 0; i < prof.grid.size; ++i) {
          if (std::abs(prof.grid.x(i)) <= 10.0) sup = std::max(sup, std::abs(prof.v[i] - barenblatt(c, p, prof.grid.x(i))));
        }
        entry["barenblatt"] = {{"c", num(c)}, {"window", {-10, 10}}, {"sup_error", num(sup)},
                               {"tolerance", num(tol.barenblatt_sup)}, {"pass", sup < tol.barenblatt_sup}};
        pass = pass && sup < tol.barenblatt_sup;
      }
      double res = 0.0;
      for (double r : ode_residual(prof)) res = std::max(res, r);
      entry["max_ode_residual"] = num(res);
      fits.push_back(entry);
      out << "lambda " << tag(lambda) << ": written profile_lambda_" << tag(lambda) << ".csv\n";
    }
  } catch (const NumericalFailure& e) {
    man.fail(e.stage(), e.what());
    man.j["profiles"] = fits;
    man.write(dir);
    throw;
  }
  write_file(dir / "tail_fit.json", json{{"p", num(p)}, {"profiles", fits}}.dump(2) + "\n");
  man.j["profiles"] = fits;
  man.j["all_pass"] = pass;
  man.write(dir);
  return pass ? ok : acceptance_failed;
}

// ---- ancient ---------------------------------------------------------------

int cmd_ancient(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.m_list.empty()) throw ConfigError("config: runs.m_list is empty");
  const fs::path dir = prepare_dir(fs::path(cfg.output.dir) / "ancient");
  Manifest man("ancient", cfg);
  SupersolutionSpec spec;
  try {
    spec = make_supersolution(cfg.model, {cfg.soliton.x_min, cfg.soliton.x_max, cfg.soliton.dx});
  } catch (const NumericalFailure& e) {
    man.fail(e.stage(), e.what());
    man.write(dir);
    throw;
  }
  const double d = spec.d();
  const auto batch = run_ancient_batch(cfg, spec);

  json runs = json::array();
  bool any_failed = false;
  for (const auto& e : batch) {
    const fs::path rdir = prepare_dir(dir / ("m_" + tag(e.m)));
    json r{{"m", num(e.m)}, {"seconds", num(e.seconds)}};
    if (!e.run) {
      any_failed = true;
      r["status"] = "failed";
      r["failure_stage"] = e.failure_stage;
      r["error"] = e.failure;
      write_file(rdir / "manifest.json", r.dump(2) + "\n");
      runs.push_back(r);
      out << "m = " << tag(e.m) << ": FAILED in " << e.failure_stage << "\n";
      continue;
    }
    const auto& run = *e.run;
    write_with(rdir / "run.csv", [&](std::ostream& os) { write_run_csv(os, run); });
    Trajectory traj;
    for (std::size_t k = 0; k < run.snapshots.size(); ++k)
      if (k % static_cast<std::size_t>(cfg.output.trajectory_every) == 0 || k + 1 == run.snapshots.size())
        traj.snapshots.push_back(run.snapshots[k]);
    write_with(rdir / "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, traj); });

    r["status"] = "ok";
    const auto [lo, hi] = decay_fit_window(cfg, run);
    r["fit_window"] = {num(lo), num(hi)};
    try {
      r["d_hat"] = num(fit_decay_rate(run, lo, hi).d_hat);
    } catch (const std::exception& ex) {
      r["d_hat"] = nullptr;
      r["d_hat_error"] = ex.what();
    }
    try {
      const auto mb = max_bound_check(run, spec, lo, hi);
      r["slope_max"] = num(mb.slope);
      r["argmax_offset"] = num(mb.argmax_offset);
    } catch (const std::exception& ex) {
      r["slope_max_error"] = ex.what();
    }
    r["summary"] = json::parse(run_summary(run, spec).dump());
    write_file(rdir / "manifest.json", r.dump(2) + "\n");
    runs.push_back(r);
    out << "m = " << tag(e.m) << ": d_hat " << (r["d_hat"].is_null() ? std::string("n/a") : r["d_hat"].dump())
        << " (d = " << tag(d) << ")\n";
  }

  const auto env = uniform_envelope(batch, d);
  json nested = json::array();
  std::vector<const AncientRun*> done;
  for (const auto& e : batch)
    if (e.run) done.push_back(&*e.run);
  std::sort(done.begin(), done.end(), [](auto a, auto b) { return a->m < b->m; });
  for (std::size_t i = 0; i + 1 < done.size(); ++i) {
    const auto& a = *done[i];
    const auto& b = *done[i + 1];
    const double tau = std::min(-a.m / 2.0, a.series.back().tau);
    double disc = 0.0;
    for (const auto* r : {&a, &b})
      for (const auto& s : r->series)
        if (std::abs(s.tau - tau) < 1e-6) disc = std::max(disc, s.companion_error);
    const double tail = std::exp(-d * a.m) * env.D;
    json row{{"m_a", num(a.m)}, {"m_b", num(b.m)}, {"tau", num(tau)}, {"discretization_error", num(disc)},
             {"tail_term", num(tail)}, {"bound", num(cfg.acceptance.nested_factor * (disc + tail))}};
    try {
      row["sup_difference"] = num(nested_difference(a, b, tau));
    } catch (const std::exception& ex) {
      row["error"] = ex.what();
    }
    nested.push_back(row);
  }
  json summary{{"d", num(d)},
               {"slope_x", num(intersection_slope(spec))},
               {"runs", runs},
               {"envelope", {{"m", env.m}, {"D_m", env.d_m}, {"D", num(env.D)}, {"increments_contract", env.increments_contract}}},
               {"nested", nested}};
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  man.j["summary"] = summary;
  if (any_failed) man.fail("run_um", "one or more runs failed; see runs[]");
  man.write(dir);
  return any_failed ? numerical_failure : ok;
}

// ---- verify ----------------------------------------------------------------

int cmd_verify(const ExperimentConfig& cfg, bool as_json, std::ostream& out) {
  const fs::path dir = prepare_dir(fs::path(cfg.output.dir) / "verify");
  Manifest man("verify", cfg);
  const auto report = run_acceptance(cfg);
  const auto j = report.to_json();
  write_file(dir / "report.json", j.dump(2) + "\n");
  if (as_json) {
    out << j.dump(2) << "\n";
  } else {
    report.print_table(out);
  }
  man.j["all_pass"] = report.all_pass();
  if (!report.all_pass()) {
    std::string failed;
    for (const auto& r : report.results)
      if (!r.pass) failed += (failed.empty() ? "" : ",") + std::to_string(r.id);
    man.fail("acceptance", "failed criteria: " + failed);
  }
  man.write(dir);
  return report.all_pass() ? ok : acceptance_failed;
}

// ---- curvature -------------------------------------------------------------

double parse_cell(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("trajectory " + where + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

// Reads tau,x,u rows grouped by tau; each group must be a uniform grid.
std::vector<FlowState> read_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trajectory " + path);
  std::string line;
  if (!std::getline(in, line) || line != "tau,x,u") throw ConfigError("trajectory " + path + ": expected header tau,x,u");
  std::vector<FlowState> states;
  std::vector<double> xs;
  auto close = [&]() {
    if (states.empty()) return;
    auto& s = states.back();
    if (xs.size() < 5) throw ConfigError("trajectory " + path + ": snapshot with fewer than 5 points");
    const double dx = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (std::abs(xs[i] - (xs.front() + dx * static_cast<double>(i))) > 1e-9 * std::max(1.0, std::abs(xs[i]))) {
        throw ConfigError("trajectory " + path + ": grid is not uniform at tau " + format_double(s.tau));
      }
    }
    s.grid = UniformGrid{xs.front(), dx, xs.size()};
    xs.clear();
  };
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    std::string_view rest = line;
    double cells[3];
    for (int c = 0; c < 3; ++c) {
      const auto comma = rest.find(',');
      if ((c < 2) == (comma == std::string_view::npos)) throw ConfigError("trajectory " + where + ": expected 3 columns");
      cells[c] = parse_cell(rest.substr(0, comma), where);
      if (c < 2) rest.remove_prefix(comma + 1);
    }
    if (states.empty() || cells[0] != states.back().tau) {
      close();
      states.push_back(FlowState{cells[0], {}, {}});
    }
    if (!xs.empty() && !(cells[1] > xs.back())) throw ConfigError("trajectory " + where + ": x not increasing");
    if (!(cells[2] > 0.0)) throw ConfigError("trajectory " + where + ": u must be positive");
    xs.push_back(cells[1]);
    states.back().u.push_back(cells[2]);
  }
  close();
  if (states.empty()) throw ConfigError("trajectory " + path + ": no data rows");
  return states;
}

void write_two_region_csv(std::ostream& os, const std::vector<CurvatureSample>& samples) {
  CsvWriter csv(os, {"x", "R_geometric", "ric_radial", "ric_spherical", "rm_norm", "polar"});
  for (const auto& s : samples) csv.row({s.x, s.R_geometric, s.ric_radial, s.ric_spherical, s.rm_norm, s.polar ? 1.0 : 0.0});
}

int cmd_curvature(const ExperimentConfig& cfg, const std::string& run_path, std::ostream& out) {
  if (run_path.empty()) throw ConfigError("curvature: --run PATH is required");
  const auto states = read_trajectory(run_path);
  const fs::path dir = prepare_dir(fs::path(cfg.output.dir) / "curvature");
  Manifest man("curvature", cfg);
  man.j["trajectory"] = run_path;
  man.j["mode"] = cfg.curvature.mode;
  const int n = cfg.model.n;
  const bool ancient = cfg.curvature.mode == "ancient";
  try {
    // Profile mode treats the two ends as static caps; ancient mode follows
    // the moving tips of the configured supersolution.
    std::vector<TipFrame> tips{{Orientation::left, 0.0, 0.0}, {Orientation::right, 0.0, 0.0}};
    std::optional<SupersolutionSpec> spec;
    if (ancient) {
      spec = make_supersolution(cfg.model, {cfg.soliton.x_min, cfg.soliton.x_max, cfg.soliton.dx});
      tips = {{Orientation::left, cfg.model.lambda, cfg.model.h}, {Orientation::right, cfg.model.lambda_prime, cfg.model.h_prime}};
    }
    std::ofstream mon_file(dir / "monitor.csv", std::ios::binary);
    if (!mon_file) throw NumericalFailure("io", "cannot write monitor.csv");
    std::optional<CsvWriter> mon;
    if (ancient) {
      mon.emplace(mon_file, std::initializer_list<std::string_view>{"tau", "sup_rm", "sup_rm_cylinder", "sup_rm_polar", "min_R_normalized",
                                                                    "min_sec_cond1", "min_sec_cond2", "overlap_gap", "u_hat_min", "u_hat_max",
                                                                    "mean_value_margin"});
    } else {
      mon.emplace(mon_file, std::initializer_list<std::string_view>{"tau", "sup_rm", "min_R_normalized", "min_sec_cond1", "min_sec_cond2"});
    }
    double worst_gap = 0.0, sup_rm = 0.0, min_rt = std::numeric_limits<double>::infinity();
    std::vector<double> taus, sups;
    for (std::size_t k = 0; k < states.size(); ++k) {
      const auto& s = states[k];
      if (k % static_cast<std::size_t>(cfg.curvature.profile_every) == 0 || k + 1 == states.size()) {
        const std::string stem = "_" + std::to_string(k) + ".csv";
        write_with(dir / ("profile" + stem), [&](std::ostream& os) { write_curvature_csv(os, curvature_profile(s, n)); });
        write_with(dir / ("two_region" + stem), [&](std::ostream& os) { write_two_region_csv(os, two_region_profile(s, n, tips)); });
      }
      if (ancient) {
        const auto m = curvature_sample(s, *spec, cfg.curvature.polar_dr);
        mon->row({m.tau, m.sup_rm, m.sup_rm_cylinder, m.sup_rm_polar, m.min_R_normalized, m.min_sec_cond1, m.min_sec_cond2,
                  m.overlap_gap, m.u_hat_min, m.u_hat_max, m.mean_value_margin});
        worst_gap = std::max(worst_gap, m.overlap_gap);
        sup_rm = std::max(sup_rm, m.sup_rm);
        min_rt = std::min(min_rt, m.min_R_normalized);
        taus.push_back(m.tau);
        sups.push_back(m.sup_rm);
      } else {
        const auto prof = two_region_profile(s, n, tips);
        double rm = 0.0;
        for (const auto& c : prof) rm = std::max(rm, c.rm_norm);
        double rt = std::numeric_limits<double>::infinity();
        for (double v : scalar_curvature_normalized(s, exponent_p(n), 0.2))
          if (std::isfinite(v)) rt = std::min(rt, v);
        const auto sec = sectional_sign_check(s, n);
        mon->row({s.tau, rm, rt, sec.min_cond1, sec.min_cond2});
        sup_rm = std::max(sup_rm, rm);
        min_rt = std::min(min_rt, rt);
      }
    }
    json report{{"snapshots", states.size()}, {"sup_rm", num(sup_rm)}, {"min_R_normalized", num(min_rt)}};
    if (ancient) {
      report["overlap"] = {{"annulus", {num(kTipRadius / 2), num(2 * kTipRadius)}}, {"max_relative_gap", num(worst_gap)}};
      if (taus.size() >= 2) report["rm_trend_slope"] = num(fit_line(taus, sups).slope);
      write_file(dir / "overlap.json", report.dump(2) + "\n");
    }
    man.j["report"] = report;
    out << "curvature: " << states.size() << " snapshots, sup |Rm| " << format_double(sup_rm) << "\n";
  } catch (const NumericalFailure& e) {
    man.fail(e.stage(), e.what());
    man.write(dir);
    throw;
  }
  man.write(dir);
  return ok;
}

// ---- rates -----------------------------------------------------------------

struct RunCsv {
  std::vector<double> tau, q, max_u;
};

RunCsv read_run_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open run file " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("tau,Q,Q_analytic,max_u,", 0) != 0) {
    throw ConfigError("run file " + path + ": unexpected header");
  }
  RunCsv r;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::vector<std::string_view> cells;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cells.size() < 4) throw ConfigError("run file " + path + ":" + std::to_string(lineno) + ": too few columns");
    const std::string where = path + ":" + std::to_string(lineno);
    r.tau.push_back(parse_cell(cells[0], where));
    r.q.push_back(parse_cell(cells[1], where));
    r.max_u.push_back(parse_cell(cells[3], where));
  }
  return r;
}

int cmd_rates(const ExperimentConfig& cfg, const std::vector<std::string>& run_paths, bool as_json, std::ostream& out) {
  const double p = cfg.model.p();
  const double g = gamma_of_lambda(cfg.model.lambda, p), gp = gamma_of_lambda(cfg.model.lambda_prime, p);
  const double d = merge_rate_d(g, gp, p);
  json j{{"p", num(p)},
         {"lambda", num(cfg.model.lambda)},
         {"lambda_prime", num(cfg.model.lambda_prime)},
         {"gamma", num(g)},
         {"gamma_prime", num(gp)},
         {"d", num(d)},
         {"slope_x", num((g - gp) / p)}};
  json table = json::array();
  for (double lambda : cfg.soliton.lambdas) table.push_back({{"lambda", num(lambda)}, {"gamma", num(gamma_of_lambda(lambda, p))}});
  j["gamma_table"] = table;
  json fits = json::array();
  for (const auto& path : run_paths) {
    const auto r = read_run_csv(path);
    if (r.tau.empty()) throw ConfigError("run file " + path + ": no data rows");
    // Same window rule as the ancient summary.
    const double first = r.tau.front() + 1.0, last = r.tau.back();
    double lo = std::max(cfg.tolerances.fit_lo, first), hi = std::min(cfg.tolerances.fit_hi, last);
    if (!(lo < hi)) lo = first, hi = last;
    std::vector<double> t, lq, lm;
    for (std::size_t i = 0; i < r.tau.size(); ++i) {
      if (r.tau[i] < lo || r.tau[i] > hi) continue;
      if (r.q[i] <= 0.0 || r.max_u[i] >= 1.0) continue;
      t.push_back(r.tau[i]);
      lq.push_back(std::log(r.q[i]));
      lm.push_back(std::log(1.0 - r.max_u[i]));
    }
    json f{{"file", path}, {"fit_window", {num(lo), num(hi)}}, {"samples", t.size()}};
    if (t.size() >= 2) {
      f["d_hat"] = num(fit_line(t, lq).slope);
      f["slope_max"] = num(fit_line(t, lm).slope);
    } else {
      f["error"] = "fewer than 2 usable samples in the fit window";
    }
    fits.push_back(f);
  }
  j["fits"] = fits;
  if (as_json) {
    out << j.dump(2) << "\n";
  } else {
    out << "p = " << format_double(p) << "  gamma = " << format_double(g) << "  gamma' = " << format_double(gp)
        << "  d = " << format_double(d) << "  slope_x = " << format_double((g - gp) / p) << "\n";
    for (const auto& f : fits) out << f.dump() << "\n";
  }
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ancient solutions of the cylindrical Yamabe flow: profiles, runs, curvature and checks"};
  app.require_subcommand(1);
  Options o;
  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out_dir, "output directory (default: config, then $YAMABE_OUT)");
    sub->add_option("--workers", o.workers, "concurrent runs")->check(CLI::PositiveNumber);
    sub->add_flag("--json", o.json_output, "machine-readable output on stdout");
  };
  auto* soliton = app.add_subcommand("soliton", "traveling-wave profiles and tail fits");
  common(soliton);
  soliton->add_option("--lambda", o.lambdas, "speeds, overriding soliton.lambdas")->delimiter(',');
  auto* ancient = app.add_subcommand("ancient", "u_m runs for every m in runs.m_list");
  common(ancient);
  auto* verify = app.add_subcommand("verify", "full acceptance suite");
  common(verify);
  auto* curvature = app.add_subcommand("curvature", "curvature of an emitted trajectory");
  common(curvature);
  curvature->add_option("--run", o.runs, "trajectory CSV (tau,x,u)")->expected(1);
  auto* rates = app.add_subcommand("rates", "analytic rates and fits from run CSVs");
  common(rates);
  rates->add_option("--run", o.runs, "run CSV files written by 'ancient'");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "usage: " << e.what() << "\n";
    return usage_error;
  }

  try {
    const auto cfg = resolve_config(o);
    if (soliton->parsed()) return cmd_soliton(cfg, out);
    if (ancient->parsed()) return cmd_ancient(cfg, out);
    if (verify->parsed()) return cmd_verify(cfg, o.json_output, out);
    if (curvature->parsed()) return cmd_curvature(cfg, o.runs.empty() ? std::string() : o.runs.front(), out);
    return cmd_rates(cfg, o.runs, o.json_output, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  } catch (const NumericalFailure& e) {
    err << "numerical failure [" << e.stage() << "]: " << e.what() << "\n";
    return numerical_failure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  } catch (const std::exception& e) {
    err << "failure [internal]: " << e.what() << "\n";
    return numerical_failure;
  }
}

}  // namespace yamabe::cli
