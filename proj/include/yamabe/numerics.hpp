#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace yamabe {

/// Ordinary least-squares line y = intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;  ///< max |y_i - fit(x_i)|
  std::size_t count = 0;
};

/// Closed-form least squares on centered data. Needs >= 2 distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Fit y = prefactor * exp(rate * x) by regressing ln y on x. All y > 0.
struct ExpFit {
  double rate = 0.0;
  double prefactor = 0.0;
  double max_log_residual = 0.0;
};
ExpFit fit_exponential(std::span<const double> x, std::span<const double> y);

/// Uniform grid x_i = x_min + i*dx, i = 0..size-1.
struct UniformGrid {
  double x_min = 0.0;
  double dx = 1.0;
  std::size_t size = 0;

  static UniformGrid spanning(double x_min, double x_max, double dx);

  double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx; }
  double x_max() const { return x(size - 1); }
  std::vector<double> points() const;
};

/// u^p with a multiplication fast path for the integer exponents of n = 3, 4, 6.
class Power {
 public:
  explicit Power(double p);

  double p() const { return p_; }

  double operator()(double u) const {
    switch (ip_) {
      case 2: return u * u;
      case 3: return u * u * u;
      case 5: { const double u2 = u * u; return u2 * u2 * u; }
      default: return std::pow(u, p_);
    }
  }

  /// d/du u^p
  double derivative(double u) const {
    switch (ip_) {
      case 2: return 2.0 * u;
      case 3: return 3.0 * u * u;
      case 5: { const double u2 = u * u; return 5.0 * u2 * u2; }
      default: return u > 0.0 ? p_ * std::pow(u, p_ - 1.0) : 0.0;
    }
  }

 private:
  double p_;
  int ip_ = 0;
};

/// 1 - (1-w)^p, accurate for small w.
inline double one_minus_pow_of_complement(double w, double p) {
  return -std::expm1(p * std::log1p(-w));
}

/// Composite trapezoid of samples on a uniform grid.
double trapezoid(std::span<const double> f, double dx);

/// Cubic Hermite interpolation on [x0, x0+h] from values and slopes.
inline double hermite(double f0, double d0, double f1, double d1, double h, double t) {
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * f1 +
         (t3 - t2) * h * d1;
}

/// Derivative of the Hermite cubic with respect to x (not t).
inline double hermite_slope(double f0, double d0, double f1, double d1, double h, double t) {
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * f0 + (3 * t2 - 4 * t + 1) * h * d0 + (-6 * t2 + 6 * t) * f1 +
          (3 * t2 - 2 * t) * h * d1) /
         h;
}

}  // namespace yamabe
