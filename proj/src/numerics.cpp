#include "yamabe/numerics.hpp"

#include <algorithm>

namespace yamabe {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("fit_line: need at least two samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_line: abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.count = x.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    fit.max_residual = std::max(fit.max_residual, std::abs(y[i] - fit.intercept - fit.slope * x[i]));
  }
  return fit;
}

ExpFit fit_exponential(std::span<const double> x, std::span<const double> y) {
  std::vector<double> ly(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) throw std::invalid_argument("fit_exponential: nonpositive sample");
    ly[i] = std::log(y[i]);
  }
  const LineFit lf = fit_line(x, ly);
  return {lf.slope, std::exp(lf.intercept), lf.max_residual};
}

UniformGrid UniformGrid::spanning(double x_min, double x_max, double dx) {
  if (!(dx > 0.0) || !(x_max > x_min)) throw std::invalid_argument("grid: need dx > 0 and x_max > x_min");
  UniformGrid g;
  g.x_min = x_min;
  g.dx = dx;
  g.size = static_cast<std::size_t>(std::llround((x_max - x_min) / dx)) + 1;
  return g;
}

std::vector<double> UniformGrid::points() const {
  std::vector<double> xs(size);
  for (std::size_t i = 0; i < size; ++i) xs[i] = x(i);
  return xs;
}

Power::Power(double p) : p_(p) {
  const double r = std::round(p);
  if (r == p && (r == 2.0 || r == 3.0 || r == 5.0)) ip_ = static_cast<int>(r);
}

double trapezoid(std::span<const double> f, double dx) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * dx;
}

}  // namespace yamabe
