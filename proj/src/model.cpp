#include "yamabe/model.hpp"

#include <cmath>
#include <sstream>

namespace yamabe {

double exponent_p(int n) {
  if (n < 3) {
    throw std::invalid_argument("dimension n must be >= 3, got " + std::to_string(n));
  }
  return static_cast<double>(n + 2) / static_cast<double>(n - 2);
}

double critical_lambda(double p) {
  if (!(p > 1.0)) throw std::invalid_argument("exponent p must exceed 1");
  return 2.0 * std::sqrt(p - 1.0) / p;
}

namespace {

double discriminant(double lambda, double p) {
  const double crit = critical_lambda(p);
  if (lambda < crit) {
    std::ostringstream os;
    os.precision(17);
    os << "lambda=" << lambda << " is below the critical speed " << crit
       << " for p=" << p << ": complex tail roots (oscillatory regime) are not supported";
    throw OscillatoryRegimeError(os.str());
  }
  // lambda >= crit, so the exact discriminant is >= 0; rounding may leave a
  // tiny negative value at the double root.
  const double disc = lambda * lambda * p * p - 4.0 * (p - 1.0);
  return disc < 0.0 ? 0.0 : disc;
}

}  // namespace

double gamma_of_lambda(double lambda, double p) {
  const double disc = discriminant(lambda, p);
  const double b = lambda * p;
  // Vieta form avoids cancellation when the roots are far apart.
  const double large = 0.5 * (b + std::sqrt(disc));
  return (p - 1.0) / large;
}

double gamma_large_root(double lambda, double p) {
  const double disc = discriminant(lambda, p);
  return 0.5 * (lambda * p + std::sqrt(disc));
}

double lambda_of_gamma(double gamma, double p) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(p > 1.0)) throw std::invalid_argument("exponent p must exceed 1");
  return (gamma * gamma + (p - 1.0)) / (p * gamma);
}

double merge_rate_d(double gamma1, double gamma2, double p) {
  if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) {
    throw std::invalid_argument("tail exponents must be positive");
  }
  return (gamma1 * gamma2 + (p - 1.0)) / p;
}

double tail_exponent(double lambda, double p) {
  if (lambda == 1.0) return p - 1.0;
  return gamma_of_lambda(lambda, p);
}

void ModelParams::validate() const {
  (void)exponent_p(n);
  if (!(lambda >= 1.0) || !(lambda_prime >= 1.0)) {
    throw std::invalid_argument("wave speeds must be >= 1");
  }
  if (!std::isfinite(h) || !std::isfinite(h_prime)) {
    throw std::invalid_argument("shifts must be finite");
  }
}

NormalizationMap NormalizationMap::for_dimension(int n) {
  NormalizationMap m;
  m.p = exponent_p(n);
  m.alpha = m.p / (m.p - 1.0);
  m.beta = 0.25 * static_cast<double>((n - 2) * (n - 2));
  return m;
}

double NormalizationMap::amplitude() const { return std::pow(alpha / beta, 1.0 / (p - 1.0)); }

std::pair<double, double> NormalizationMap::normalize(double x_raw, double tau_raw) const {
  return {x_raw * std::sqrt(beta), tau_raw * alpha};
}

std::pair<double, double> NormalizationMap::denormalize(double x, double tau) const {
  return {x / std::sqrt(beta), tau / alpha};
}

}  // namespace yamabe
