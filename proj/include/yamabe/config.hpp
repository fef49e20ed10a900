#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "yamabe/ancient.hpp"

namespace yamabe {

/// Rejected configuration or usage; maps to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thresholds of the acceptance suite. Defaults are the reference values; any
/// of them can be overridden from the [acceptance] section.
struct AcceptanceTolerances {
  double root_residual = 1e-10;
  double barenblatt_sup = 1e-6;
  double steady_ratio_lo = 3.5;
  double steady_ratio_hi = 4.5;
  double tail_rel = 0.01;
  double tracking_sup = 5e-3;
  double tracking_ratio_lo = 1.7;  ///< error ratio under halving dx and dtau
  double tracking_ratio_hi = 4.5;
  double mass_factor = 10.0;
  double intersection_rel = 0.02;
  double decay_rel = 0.15;
  double q_floor_factor = 5.0;     ///< Q >= -factor * dx^2
  double barrier_factor = 5.0;     ///< u - v <= factor * dx^2
  double monotone = 1e-8;
  double max_slope_rel = 0.15;
  double argmax_bound = 1.0;
  double nested_factor = 10.0;
  double curvature_std = 1e-3;
  double ricci_gap = 1e-3;
  double sectional_factor = 10.0;
  double r_tilde_floor = 1e-6;
  double rm_trend = 1e-2;
  double distinguish_rel = 0.2;
  double distinguish_zero = 1e-3;
};

struct ExperimentConfig {
  ModelParams model;

  struct Soliton {
    std::vector<double> lambdas{1.0, 1.2, 1.5, 2.0};
    double x_min = -14.0;
    double x_max = 70.0;
    double dx = 0.005;
  } soliton;

  struct Grid {
    double L = 0.0;  ///< 0 selects the default half-width
    double dx = 0.02;
  } grid;

  struct Time {
    double dtau = 1e-3;
    double tau_end = -5.0;
    int snapshot_every = 100;
  } time;

  std::vector<double> m_list{10.0, 20.0, 30.0};
  int workers = 3;

  struct Tolerances {
    double newton_tol = 1e-14;
    double fit_lo = -26.0;
    double fit_hi = -10.0;
    double extinction_threshold = 1e-10;
  } tolerances;

  struct Curvature {
    std::string mode = "ancient";  ///< "ancient" (two-region monitor) or "profile"
    double polar_dr = 0.05;
    int profile_every = 10;        ///< write every k-th snapshot profile
  } curvature;

  AcceptanceTolerances acceptance;

  struct Output {
    std::string dir = "out";
    int trajectory_every = 10;     ///< keep every k-th snapshot in trajectory CSVs
  } output;

  /// Throws ConfigError naming the offending key.
  void validate() const;

  AncientOptions ancient_options() const;
};

/// Parses key = value text with [section] headers. Unknown keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical form: every section and key in fixed order, shortest round-trip numbers.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace yamabe
