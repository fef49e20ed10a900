#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace yamabe {

/// Thrown when a wave speed lies below 2*sqrt(p-1)/p, where the tail
/// characteristic roots are complex and profiles oscillate around 1.
class OscillatoryRegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Hard numerical failure (NaN, blow-up, collapse). Carries the stage name.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// (n+2)/(n-2). Rejects n < 3.
double exponent_p(int n);

/// Critical speed 2*sqrt(p-1)/p below which the tail roots become complex.
double critical_lambda(double p);

/// Smaller root of gamma^2 - lambda*p*gamma + (p-1) = 0.
double gamma_of_lambda(double lambda, double p);

/// Larger root of the same quadratic.
double gamma_large_root(double lambda, double p);

/// Inverse of gamma_of_lambda on the small-root branch.
double lambda_of_gamma(double gamma, double p);

/// Merge rate d = (gamma1*gamma2 + p - 1)/p.
double merge_rate_d(double gamma1, double gamma2, double p);

/// Exponent of the right tail 1 - v ~ C e^{-gamma x} of the normalized
/// soliton. For lambda == 1 the Barenblatt profile decays with the larger
/// root p-1; for lambda > 1 it is the smaller root.
double tail_exponent(double lambda, double p);

/**
 * Coordinates of the four-parameter family. p is always derived from n.
 *
 * Construction runs need lambda, lambda_prime > 1; values equal to 1 are
 * accepted so the Barenblatt family can be used as a cross-check.
 */
struct ModelParams {
  int n = 3;
  double lambda = 1.2;
  double lambda_prime = 1.2;
  double h = 0.0;
  double h_prime = 0.0;

  double p() const { return exponent_p(n); }

  /// Throws std::invalid_argument when n < 3 or a speed is below 1.
  void validate() const;
};

struct DecayData {
  double gamma = 0.0;   ///< tail exponent
  double c_tail = 0.0;  ///< tail amplitude C
  double d = 0.0;       ///< merge rate with the partner wave (0 if unset)
};

/// Scale constants between the unnormalized cylindrical equation
/// (u^p)_t = u_xx + alpha u^p - beta u and the normalized one.
struct NormalizationMap {
  double alpha = 0.0;  ///< p/(p-1) = (n+2)/4
  double beta = 0.0;   ///< (n-2)^2/4
  double p = 0.0;

  static NormalizationMap for_dimension(int n);

  /// Factor k with u = k * u_raw, k = (alpha/beta)^{1/(p-1)}.
  double amplitude() const;

  /// (x_raw, tau_raw) -> (x, tau) = (x_raw sqrt(beta), tau_raw alpha).
  std::pair<double, double> normalize(double x_raw, double tau_raw) const;
  std::pair<double, double> denormalize(double x, double tau) const;
};

}  // namespace yamabe
