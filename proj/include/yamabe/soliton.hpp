#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "yamabe/model.hpp"
#include "yamabe/numerics.hpp"

namespace yamabe {

enum class Orientation { left, right };

/**
 * Normalized traveling-wave profile v_lambda, v(0) = 1/2, sampled on a
 * uniform grid.
 *
 * The right tail is carried as the deficit w = 1 - v so that values of
 * 1 - v far below double epsilon keep full relative precision. Cumulative
 * integrals are stored so that integrals of min-of-waves configurations can
 * be split into an exact plateau length plus small corrections:
 *
 *   int_{-inf}^{z} v^q = z + K_q + int_{z}^{inf} (1 - v^q),   q in {p, 1}.
 *
 * Evaluation outside the grid uses the asymptotic tails: A e^{z} on the left,
 * w_N e^{-gamma (z - x_N)} on the right.
 */
struct SolitonProfile {
  double lambda = 1.0;
  double p = 5.0;
  UniformGrid grid;
  std::vector<double> v;
  std::vector<double> v_x;
  std::vector<double> deficit;   ///< 1 - v
  std::vector<double> head_p;    ///< int_{-inf}^{x} v^p
  std::vector<double> head_1;    ///< int_{-inf}^{x} v
  std::vector<double> tail_p;    ///< int_{x}^{inf} (1 - v^p)
  std::vector<double> tail_1;    ///< int_{x}^{inf} (1 - v)
  double plateau_offset_p = 0.0; ///< K_p
  double plateau_offset_1 = 0.0; ///< K_1
  double left_amplitude = 0.0;   ///< A in v ~ A e^{x} as x -> -inf
  DecayData decay;               ///< gamma analytic, c_tail fitted

  double value(double z) const;
  double slope(double z) const;
  double deficit_at(double z) const;
  /// int_{-inf}^{z} v^q dz for q = p (power=true) or q = 1.
  double head_integral(double z, bool power) const;
  /// int_{z}^{inf} (1 - v^q) dz.
  double tail_integral(double z, bool power) const;
};

struct ShootingOptions {
  double eps_seed = 1e-6;
  double rtol = 1e-12;
  double max_step = 0.02;
};

/// Steady state (lambda = 0) closed form, c > 0.
double steady_state(double c, int n, double x);
/// Closed-form second derivative of steady_state in x.
double steady_state_xx(double c, int n, double x);

/// Barenblatt family (lambda = 1), c > 0.
double barenblatt(double c, double p, double x);
double barenblatt_x(double c, double p, double x);
/// c such that barenblatt(c, p, 0) = 1/2.
double barenblatt_normalizing_c(double p);

/**
 * Integrates v'' = -lambda p v^{p-1} v' - v^p + v from the e^{x} asymptotic
 * seed v = v' = eps_seed, switches to the deficit w = 1 - v once v > 1/2,
 * translates so v(0) = 1/2, and resamples onto [x_min, x_max] with spacing dx.
 *
 * Throws OscillatoryRegimeError for lambda below critical, std::invalid_argument
 * for lambda < 1, NumericalFailure on blow-up, collapse, or when the domain
 * is too short for 1 - v(x_max) < 1e-3.
 */
SolitonProfile shoot_profile(double lambda, double p, double x_min, double x_max, double dx,
                             const ShootingOptions& opts = {});

struct TailFit {
  double x_lo = 0.0;
  double x_hi = 0.0;
  double gamma_fit = 0.0;
  double c_fit = 0.0;
  double residual = 0.0;
  std::size_t samples = 0;
};

/// Log-linear regression of 1 - v on the outermost window_fraction of the
/// grid region where 1 - v lies in (1e-8, 1e-2).
TailFit fit_tail(const SolitonProfile& profile, double window_fraction = 0.5);

/// Regression on raw (x, deficit) samples; used by fit_tail.
TailFit fit_tail_samples(const std::vector<double>& x, const std::vector<double>& deficit);

/// Max relative error of v_x against C gamma e^{-gamma x} over the tail window.
double check_derivative_tail(const SolitonProfile& profile, double window_fraction = 0.5);

/// Left: v(x - lambda tau + h). Right: v(-x - lambda tau + h).
double traveling_wave_eval(const SolitonProfile& profile, double x, double tau, double h,
                           Orientation orientation);

/// Pointwise residual |v'' + lambda p v^{p-1} v' + v^p - v| using second
/// differences of the sampled profile, interior points only.
std::vector<double> ode_residual(const SolitonProfile& profile);

/// CSV with header x,v,v_x and shortest round-trip numbers.
void write_profile_csv(std::ostream& os, const SolitonProfile& profile);

}  // namespace yamabe
