#include "yamabe/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "yamabe/io.hpp"

namespace yamabe {

namespace {

namespace pt = boost::property_tree;

double parse_number(const std::string& key, std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("config: " + key + ": not a finite number: '" + std::string(s) + "'");
  }
  return v;
}

int parse_int(const std::string& key, std::string_view s) {
  const double v = parse_number(key, s);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("config: " + key + ": not an integer");
  return static_cast<int>(v);
}

std::vector<double> parse_list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  std::string_view rest = s;
  while (true) {
    const auto comma = rest.find(',');
    const auto item = rest.substr(0, comma);
    if (item.find_first_not_of(' ') != std::string_view::npos) out.push_back(parse_number(key, item));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s;
}

// One binding per key: reads a string into the config and writes it back.
struct Binding {
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> read;
  std::function<std::string(const ExperimentConfig&)> write;
};

Binding number(std::function<double&(ExperimentConfig&)> ref) {
  return {[ref](ExperimentConfig& c, const std::string& key, const std::string& v) { ref(c) = parse_number(key, v); },
          [ref](const ExperimentConfig& c) { return format_double(ref(const_cast<ExperimentConfig&>(c))); }};
}

Binding integer(std::function<int&(ExperimentConfig&)> ref) {
  return {[ref](ExperimentConfig& c, const std::string& key, const std::string& v) { ref(c) = parse_int(key, v); },
          [ref](const ExperimentConfig& c) { return std::to_string(ref(const_cast<ExperimentConfig&>(c))); }};
}

Binding list(std::function<std::vector<double>&(ExperimentConfig&)> ref) {
  return {[ref](ExperimentConfig& c, const std::string& key, const std::string& v) { ref(c) = parse_list(key, v); },
          [ref](const ExperimentConfig& c) { return join(ref(const_cast<ExperimentConfig&>(c))); }};
}

Binding text(std::function<std::string&(ExperimentConfig&)> ref) {
  return {[ref](ExperimentConfig& c, const std::string&, const std::string& v) { ref(c) = v; },
          [ref](const ExperimentConfig& c) { return ref(const_cast<ExperimentConfig&>(c)); }};
}

using Section = std::vector<std::pair<std::string, Binding>>;

#define YB_NUM(path) [](ExperimentConfig& c) -> double& { return c.path; }
#define YB_INT(path) [](ExperimentConfig& c) -> int& { return c.path; }

const std::vector<std::pair<std::string, Section>>& schema() {
  static const std::vector<std::pair<std::string, Section>> s = [] {
    std::vector<std::pair<std::string, Section>> out;
    out.push_back({"model",
                   {{"n", integer(YB_INT(model.n))},
                    {"lambda", number(YB_NUM(model.lambda))},
                    {"lambda_prime", number(YB_NUM(model.lambda_prime))},
                    {"h", number(YB_NUM(model.h))},
                    {"h_prime", number(YB_NUM(model.h_prime))}}});
    out.push_back({"soliton",
                   {{"lambdas", list([](ExperimentConfig& c) -> std::vector<double>& { return c.soliton.lambdas; })},
                    {"x_min", number(YB_NUM(soliton.x_min))},
                    {"x_max", number(YB_NUM(soliton.x_max))},
                    {"dx", number(YB_NUM(soliton.dx))}}});
    out.push_back({"grid", {{"L", number(YB_NUM(grid.L))}, {"dx", number(YB_NUM(grid.dx))}}});
    out.push_back({"time",
                   {{"dtau", number(YB_NUM(time.dtau))},
                    {"tau_end", number(YB_NUM(time.tau_end))},
                    {"snapshot_every", integer(YB_INT(time.snapshot_every))}}});
    out.push_back({"runs",
                   {{"m_list", list([](ExperimentConfig& c) -> std::vector<double>& { return c.m_list; })},
                    {"workers", integer(YB_INT(workers))}}});
    out.push_back({"tolerances",
                   {{"newton_tol", number(YB_NUM(tolerances.newton_tol))},
                    {"fit_lo", number(YB_NUM(tolerances.fit_lo))},
                    {"fit_hi", number(YB_NUM(tolerances.fit_hi))},
                    {"extinction_threshold", number(YB_NUM(tolerances.extinction_threshold))}}});
    out.push_back({"curvature",
                   {{"mode", text([](ExperimentConfig& c) -> std::string& { return c.curvature.mode; })},
                    {"polar_dr", number(YB_NUM(curvature.polar_dr))},
                    {"profile_every", integer(YB_INT(curvature.profile_every))}}});
    Section acc;
#define YB_ACC(name) acc.push_back({#name, number(YB_NUM(acceptance.name))})
    YB_ACC(root_residual);
    YB_ACC(barenblatt_sup);
    YB_ACC(steady_ratio_lo);
    YB_ACC(steady_ratio_hi);
    YB_ACC(tail_rel);
    YB_ACC(tracking_sup);
    YB_ACC(tracking_ratio_lo);
    YB_ACC(tracking_ratio_hi);
    YB_ACC(mass_factor);
    YB_ACC(intersection_rel);
    YB_ACC(decay_rel);
    YB_ACC(q_floor_factor);
    YB_ACC(barrier_factor);
    YB_ACC(monotone);
    YB_ACC(max_slope_rel);
    YB_ACC(argmax_bound);
    YB_ACC(nested_factor);
    YB_ACC(curvature_std);
    YB_ACC(ricci_gap);
    YB_ACC(sectional_factor);
    YB_ACC(r_tilde_floor);
    YB_ACC(rm_trend);
    YB_ACC(distinguish_rel);
    YB_ACC(distinguish_zero);
#undef YB_ACC
    out.push_back({"acceptance", std::move(acc)});
    out.push_back({"output",
                   {{"dir", text([](ExperimentConfig& c) -> std::string& { return c.output.dir; })},
                    {"trajectory_every", integer(YB_INT(output.trajectory_every))}}});
    return out;
  }();
  return s;
}

#undef YB_NUM
#undef YB_INT

}  // namespace

void ExperimentConfig::validate() const {
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: model: ") + e.what());
  }
  const double p = model.p();
  for (double lam : {model.lambda, model.lambda_prime}) {
    if (lam < critical_lambda(p)) throw ConfigError("config: model: speed in the oscillatory regime");
  }
  for (double lam : soliton.lambdas) {
    if (!(lam >= critical_lambda(p))) {
      throw ConfigError("config: soliton.lambdas: " + format_double(lam) +
                        " lies in the oscillatory regime (below 2 sqrt(p-1)/p = " +
                        format_double(critical_lambda(p)) + ")");
    }
    if (lam < 1.0) throw ConfigError("config: soliton.lambdas: speeds below 1 are not admissible");
  }
  if (!(soliton.dx > 0.0) || !(soliton.x_min < 0.0) || !(soliton.x_max > 0.0)) {
    throw ConfigError("config: soliton: need x_min < 0 < x_max and dx > 0");
  }
  if (!(grid.dx > 0.0) || grid.dx > 0.5) throw ConfigError("config: grid.dx must lie in (0, 0.5]");
  if (grid.L < 0.0) throw ConfigError("config: grid.L must be >= 0 (0 = automatic)");
  if (!(time.dtau > 0.0) || time.dtau >= 1.0) throw ConfigError("config: time.dtau must lie in (0, 1)");
  if (time.snapshot_every < 1) throw ConfigError("config: time.snapshot_every must be >= 1");
  for (double m : m_list) {
    if (!(m > 0.0)) throw ConfigError("config: runs.m_list entries must be positive");
    if (!(time.tau_end > -m)) throw ConfigError("config: time.tau_end must exceed -m for every m");
  }
  if (workers < 1) throw ConfigError("config: runs.workers must be >= 1");
  if (!(tolerances.newton_tol > 0.0)) throw ConfigError("config: tolerances.newton_tol must be positive");
  if (!(tolerances.fit_lo < tolerances.fit_hi)) throw ConfigError("config: tolerances.fit_lo must be < fit_hi");
  if (tolerances.extinction_threshold < 0.0) throw ConfigError("config: tolerances.extinction_threshold < 0");
  if (curvature.mode != "ancient" && curvature.mode != "profile") {
    throw ConfigError("config: curvature.mode must be 'ancient' or 'profile'");
  }
  if (!(curvature.polar_dr > 0.0)) throw ConfigError("config: curvature.polar_dr must be positive");
  if (curvature.profile_every < 1) throw ConfigError("config: curvature.profile_every must be >= 1");
  if (output.dir.empty()) throw ConfigError("config: output.dir is empty");
  if (output.trajectory_every < 1) throw ConfigError("config: output.trajectory_every must be >= 1");
}

AncientOptions ExperimentConfig::ancient_options() const {
  AncientOptions o;
  o.dx = grid.dx;
  o.half_width = grid.L;
  o.snapshot_every = time.snapshot_every;
  o.solver.dtau = time.dtau;
  o.solver.newton_tol = tolerances.newton_tol;
  o.solver.extinction_threshold = tolerances.extinction_threshold;
  return o;
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  for (const auto& [section, node] : tree) {
    const Section* sec = nullptr;
    for (const auto& [name, s] : schema())
      if (name == section) sec = &s;
    if (!sec) throw ConfigError("config: unknown section [" + section + "]");
    if (!node.data().empty()) throw ConfigError("config: key '" + section + "' outside any section");
    for (const auto& [key, leaf] : node) {
      const Binding* b = nullptr;
      for (const auto& [name, binding] : *sec)
        if (name == key) b = &binding;
      if (!b) throw ConfigError("config: unknown key " + section + "." + key);
      b->read(cfg, section + "." + key, leaf.data());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  pt::ptree tree;
  for (const auto& [section, keys] : schema()) {
    pt::ptree node;
    for (const auto& [key, binding] : keys) node.push_back({key, pt::ptree(binding.write(cfg))});
    tree.push_back({section, std::move(node)});
  }
  std::ostringstream os;
  pt::write_ini(os, tree);
  return os.str();
}

}  // namespace yamabe
