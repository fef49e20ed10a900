#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <json.hpp>

#include "yamabe/model.hpp"
#include "yamabe/pde.hpp"
#include "yamabe/soliton.hpp"

namespace yamabe {

/// Sampling window for the two wave profiles behind a supersolution.
struct ProfileResolution {
  double x_min = -14.0;
  double x_max = 70.0;
  double dx = 0.005;
};

/**
 * The merged supersolution min(v_l(x - l tau + h), v_l'(-x - l' tau + h')).
 * decay_left/decay_right carry the tail data of each branch and the common
 * merge rate d.
 */
struct SupersolutionSpec {
  ModelParams params;
  SolitonProfile left_profile;
  SolitonProfile right_profile;
  DecayData decay_left;
  DecayData decay_right;

  double p() const { return left_profile.p; }
  double d() const { return decay_left.d; }
};

SupersolutionSpec make_supersolution(const ModelParams& params, const ProfileResolution& res = {});

/// Same speeds and profiles, different shifts.
SupersolutionSpec with_shifts(const SupersolutionSpec& spec, double h, double h_prime);

double supersolution_eval(const SupersolutionSpec& spec, double x, double tau);

/// 1 - v of each branch, computed without cancellation near the plateau.
double left_deficit(const SupersolutionSpec& spec, double x, double tau);
double right_deficit(const SupersolutionSpec& spec, double x, double tau);

struct IntersectionRecord {
  double tau = 0.0;
  double x_numeric = 0.0;
  double x_asymptotic = 0.0;
  double value_at_intersection = 0.0;
  double one_minus_value = 0.0;
  double root_residual = 0.0;  ///< |left - right| at x_numeric
};

/// Bisection on the log-deficit difference between the two wave fronts.
IntersectionRecord intersection_numeric(const SupersolutionSpec& spec, double tau);

/// (gamma - gamma')/p
double intersection_slope(const SupersolutionSpec& spec);

/// C in 1 - v(x(tau)) ~ C e^{d tau}, from a fixed-slope fit over [tau_lo, tau_hi].
double fit_merge_constant(const SupersolutionSpec& spec, double tau_lo, double tau_hi, int samples = 81);

struct IntersectionFit {
  LineFit x_line;      ///< x_numeric against tau
  LineFit value_line;  ///< ln(1 - value) against tau
};
IntersectionFit fit_intersection_law(const SupersolutionSpec& spec, double tau_lo, double tau_hi,
                                     int samples = 81);

/**
 * Integrals of v^p and v split at the crossing into a part linear in tau
 * and exponentially small tail parts:
 *   int v^q = -(l + l') tau + h + h' + K_q + K'_q + T_q(z) + T'_q(z').
 */
struct SupersolutionMass {
  double linear_p = 0.0;
  double linear_1 = 0.0;
  double tail_p = 0.0;
  double tail_1 = 0.0;

  double mass_p() const { return linear_p + tail_p; }
  double mass_1() const { return linear_1 + tail_1; }
};
SupersolutionMass supersolution_mass(const SupersolutionSpec& spec, double tau);

struct MassResidual {
  double residual = 0.0;
  double correction = 0.0;      ///< (gamma + gamma') C e^{d tau}
  double offset_defect = 0.0;   ///< quadrature error in K_1 - K_p - lambda, both waves
};

/**
 * d/dtau int v^p (centered, step dtau_probe) minus
 * int v^p - int v + (gamma + gamma') C e^{d tau}. The tau-linear parts are
 * cancelled exactly using int (v - v^p) = lambda for each wave, so the
 * residual is resolved at the scale of the e^{d tau} term.
 */
MassResidual supersolution_mass_residual(const SupersolutionSpec& spec, double tau, double dtau_probe,
                                         double merge_constant);

/// Extent L such that the data on [-L, L] at tau = -m has boundary values below 1e-8.
double default_half_width(const SupersolutionSpec& spec, double m);

FlowState build_initial_data(const SupersolutionSpec& spec, double m, const UniformGrid& grid);

struct AncientSnapshot {
  double tau = 0.0;
  double q = 0.0;           ///< int (v^p - u^p) against numerically evolved waves
  double q_analytic = 0.0;  ///< int (v^p - u^p) against the analytic supersolution
  double max_u = 0.0;
  double argmax_x = 0.0;
  double mass_p = 0.0;
  double mass_1 = 0.0;
  double barrier_violation = 0.0;  ///< max (u - v), analytic v
  double x_intersection_numeric = 0.0;
  double x_intersection_asymptotic = 0.0;
  /// sup |min(companions) - v|: discretization error of the scheme on this grid and horizon
  double companion_error = 0.0;
};

struct AncientOptions {
  double dx = 0.02;
  double half_width = 0.0;  ///< 0 selects default_half_width
  int snapshot_every = 100;
  SolverConfig solver;
  bool companions = true;   ///< evolve the two single waves alongside u_m
};

struct AncientRun {
  double m = 0.0;
  std::vector<FlowState> snapshots;
  std::vector<AncientSnapshot> series;
  std::vector<StepRecord> steps;
  double max_barrier_violation = 0.0;      ///< over every step
  double max_monotonicity_violation = 0.0; ///< max (u(tau + dtau) - u(tau)) over every step
  std::optional<double> extinction_time;
  int halvings = 0;
};

/// Evolves u_m from the supersolution at tau = -m to tau_end.
AncientRun run_um(const SupersolutionSpec& spec, double m, double tau_end, const AncientOptions& opts = {});

struct DecayFit {
  double d_hat = 0.0;
  double prefactor = 0.0;
  double max_log_residual = 0.0;
  std::size_t count = 0;
};

/// Regression of ln Q on tau. Throws if any Q in the series is not positive.
DecayFit fit_decay_rate(std::span<const double> tau, std::span<const double> q);

/// fit_decay_rate over the snapshots of `run` with tau in [tau_lo, tau_hi].
DecayFit fit_decay_rate(const AncientRun& run, double tau_lo, double tau_hi);

/// sup of Q e^{-d tau} over snapshots with tau in [tau_lo, tau_hi].
double envelope_constant(const AncientRun& run, double d, double tau_lo, double tau_hi);

struct MaxBoundFit {
  double slope = 0.0;            ///< of ln(1 - max u) against tau
  double lower_prefactor = 0.0;  ///< min of (1 - max u) e^{-d tau}
  double upper_prefactor = 0.0;  ///< max of (1 - max u) e^{-d tau}
  double max_u = 0.0;            ///< largest max u over the window
  double argmax_offset = 0.0;    ///< max |argmax - x(tau)|
  std::size_t count = 0;
};
MaxBoundFit max_bound_check(const AncientRun& run, const SupersolutionSpec& spec, double tau_lo, double tau_hi);

/// |int v1^p - int v2^p| for two supersolutions with the same speeds.
double distinguish_functional(const SupersolutionSpec& a, const SupersolutionSpec& b, double tau);

void write_run_csv(std::ostream& os, const AncientRun& run);
nlohmann::json run_summary(const AncientRun& run, const SupersolutionSpec& spec);

}  // namespace yamabe
