#include "yamabe/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "yamabe/io.hpp"

namespace yamabe {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Constants {
  NormalizationMap map;
  double k = 0.0;      // u = k u_raw
  double h_raw = 0.0;  // raw grid spacing
  double cbar = 0.0;
  double r_cyl = 0.0;
};

Constants constants(int n, double dx) {
  Constants c;
  c.map = NormalizationMap::for_dimension(n);
  c.k = c.map.amplitude();
  c.h_raw = dx / std::sqrt(c.map.beta);
  c.cbar = 4.0 * (n - 1) / (n - 2);
  c.r_cyl = static_cast<double>((n - 1) * (n - 2));
  return c;
}

bool usable(const std::vector<double>& u, std::size_t i, double mask) {
  return i > 0 && i + 1 < u.size() && u[i - 1] >= mask && u[i] >= mask && u[i + 1] >= mask && u[i - 1] > 0.0 &&
         u[i] > 0.0 && u[i + 1] > 0.0;
}

void require_state(const FlowState& s) {
  if (s.u.size() != s.grid.size || s.grid.size < 3) throw std::invalid_argument("geometry: malformed state");
}

// f = (2/(n-2)) ln u_raw and its raw-coordinate derivatives at i.
struct LogDerivs {
  double f, fx, fxx;
};

LogDerivs log_derivs(const std::vector<double>& u, std::size_t i, const Constants& c, int n) {
  const double g = 2.0 / (n - 2);
  const double fm = g * std::log(u[i - 1] / c.k);
  const double f0 = g * std::log(u[i] / c.k);
  const double fp = g * std::log(u[i + 1] / c.k);
  return {f0, (fp - fm) / (2.0 * c.h_raw), (fp - 2.0 * f0 + fm) / (c.h_raw * c.h_raw)};
}

// Regularized lower incomplete integral of sin^k on [0, theta].
double sin_power_integral(int k, double theta) {
  if (k == 0) return theta;
  if (k == 1) return 1.0 - std::cos(theta);
  return -std::pow(std::sin(theta), k - 1) * std::cos(theta) / k +
         (k - 1.0) / k * sin_power_integral(k - 2, theta);
}

double sphere_area(int dim) {  // area of the unit S^dim
  const double a = 0.5 * (dim + 1);
  return 2.0 * std::pow(std::numbers::pi, a) / std::tgamma(a);
}

}  // namespace

double normalized_curvature_at(double u, double u_xx, double p) {
  const double up = std::pow(u, p);
  return 1.0 - (p - 1.0) / p * (u_xx + up - u) / up;
}

std::vector<double> scalar_curvature_normalized(const FlowState& state, double p, double mask) {
  require_state(state);
  const auto& u = state.u;
  const double dx2 = state.grid.dx * state.grid.dx;
  const Power pw(p);
  std::vector<double> out(u.size(), kNaN);
  for (std::size_t i = 1; i + 1 < u.size(); ++i) {
    if (!usable(u, i, mask)) continue;
    const double uxx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / dx2;
    const double up = pw(u[i]);
    out[i] = 1.0 - (p - 1.0) / p * (uxx + up - u[i]) / up;
  }
  return out;
}

std::vector<double> scalar_curvature_geometric(const FlowState& state, int n, double mask) {
  require_state(state);
  const auto c = constants(n, state.grid.dx);
  const auto& u = state.u;
  const Power pw(c.map.p);
  std::vector<double> out(u.size(), kNaN);
  for (std::size_t i = 1; i + 1 < u.size(); ++i) {
    if (!usable(u, i, mask)) continue;
    const double w = u[i] / c.k;
    const double wxx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / c.k / (c.h_raw * c.h_raw);
    out[i] = (-c.cbar * wxx + c.r_cyl * w) / pw(w);
  }
  return out;
}

RicciEigenvalues ricci_eigenvalues(const FlowState& state, int n, double mask) {
  require_state(state);
  const auto c = constants(n, state.grid.dx);
  RicciEigenvalues r{std::vector<double>(state.u.size(), kNaN), std::vector<double>(state.u.size(), kNaN)};
  for (std::size_t i = 1; i + 1 < state.u.size(); ++i) {
    if (!usable(state.u, i, mask)) continue;
    const auto d = log_derivs(state.u, i, c, n);
    const double e = std::exp(-2.0 * d.f);
    r.radial[i] = -(n - 1) * d.fxx * e;
    r.spherical[i] = e * ((n - 2) - d.fxx - (n - 2) * d.fx * d.fx);
  }
  return r;
}

SectionalCheck sectional_sign_check(const FlowState& state, int n, double mask) {
  require_state(state);
  const auto c = constants(n, state.grid.dx);
  const double e = 4.0 / (n - 2);
  SectionalCheck s;
  s.cond1.assign(state.u.size(), kNaN);
  s.cond2.assign(state.u.size(), kNaN);
  s.min_cond1 = s.min_cond2 = std::numeric_limits<double>::infinity();
  const auto& u = state.u;
  for (std::size_t i = 1; i + 1 < u.size(); ++i) {
    if (!usable(u, i, mask)) continue;
    const double wm = std::pow(u[i - 1] / c.k, e), w0 = std::pow(u[i] / c.k, e), wp = std::pow(u[i + 1] / c.k, e);
    const double wx = (wp - wm) / (2.0 * c.h_raw);
    const double wxx = (wp - 2.0 * w0 + wm) / (c.h_raw * c.h_raw);
    s.cond1[i] = wx * wx - w0 * wxx;
    s.cond2[i] = 4.0 * w0 * w0 - wx * wx;
    s.min_cond1 = std::min(s.min_cond1, s.cond1[i]);
    s.min_cond2 = std::min(s.min_cond2, s.cond2[i]);
  }
  return s;
}

double rm_norm_from_sectional(int n, double k_rad, double k_sph) {
  return std::sqrt((n - 1) * k_rad * k_rad + 0.5 * (n - 1) * (n - 2) * k_sph * k_sph);
}

CurvatureProfile curvature_profile(const FlowState& state, int n, double mask) {
  const double p = exponent_p(n);
  CurvatureProfile out;
  out.grid = state.grid;
  const double s = std::sqrt(NormalizationMap::for_dimension(n).beta);
  out.x_raw.resize(state.grid.size);
  for (std::size_t i = 0; i < state.grid.size; ++i) out.x_raw[i] = state.grid.x(i) / s;
  out.R_normalized = scalar_curvature_normalized(state, p, mask);
  out.R_geometric = scalar_curvature_geometric(state, n, mask);
  auto ric = ricci_eigenvalues(state, n, mask);
  out.ric_radial = std::move(ric.radial);
  out.ric_spherical = std::move(ric.spherical);
  auto sec = sectional_sign_check(state, n, mask);
  out.sec_cond1 = std::move(sec.cond1);
  out.sec_cond2 = std::move(sec.cond2);
  const auto c = constants(n, state.grid.dx);
  out.rm_norm.assign(state.grid.size, kNaN);
  for (std::size_t i = 1; i + 1 < state.u.size(); ++i) {
    if (!usable(state.u, i, mask)) continue;
    const auto d = log_derivs(state.u, i, c, n);
    const double e = std::exp(-2.0 * d.f);
    out.rm_norm[i] = rm_norm_from_sectional(n, -d.fxx * e, (1.0 - d.fx * d.fx) * e);
  }
  return out;
}

AffineCalibration affine_closed_form(int n) {
  const auto map = NormalizationMap::for_dimension(n);
  const double r_cyl = static_cast<double>((n - 1) * (n - 2));
  AffineCalibration a;
  a.A = r_cyl * map.alpha * map.alpha / map.beta;
  a.B = -r_cyl * map.alpha / (map.beta * (map.p - 1.0));
  return a;
}

AffineCalibration calibrate_affine(int n, double dx) {
  const double p = exponent_p(n);
  std::vector<double> rn, rg;
  auto collect = [&](const FlowState& s) {
    const auto a = scalar_curvature_normalized(s, p);
    const auto b = scalar_curvature_geometric(s, n);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::isnan(a[i]) || std::isnan(b[i])) continue;
      rn.push_back(a[i]);
      rg.push_back(b[i]);
    }
  };
  const auto grid = UniformGrid::spanning(-1.0, 1.0, dx);
  for (double level : {0.5, 0.8, 1.0, 1.5, 2.0}) collect({0.0, grid, std::vector<double>(grid.size, level)});
  const auto wide = UniformGrid::spanning(-6.0, 6.0, dx);
  FlowState steady{0.0, wide, std::vector<double>(wide.size)};
  for (std::size_t i = 0; i < wide.size; ++i) steady.u[i] = steady_state(1.0, n, wide.x(i));
  collect(steady);
  const auto fit = fit_line(rn, rg);
  return {fit.slope, fit.intercept, fit.max_residual};
}

namespace {

// Wave-frame coordinate z of abscissa x and its inverse.
double wave_z(Orientation o, double x, double lambda, double h, double tau) {
  return (o == Orientation::left ? x : -x) - lambda * tau + h;
}
double wave_x(Orientation o, double z, double lambda, double h, double tau) {
  const double s = z + lambda * tau - h;
  return o == Orientation::left ? s : -s;
}

}  // namespace

PolarState to_polar(const FlowState& state, double p, Orientation orientation, double lambda, double h,
                    double x_cut) {
  require_state(state);
  PolarState ps{state.tau, orientation, lambda, h, p, {}, {}, {}, {}};
  for (std::size_t i = 0; i < state.grid.size; ++i) {
    const double x = state.grid.x(i);
    if (orientation == Orientation::left ? x > x_cut : x < x_cut) continue;
    const double z = wave_z(orientation, x, lambda, h, state.tau);
    ps.x.push_back(x);
    ps.z.push_back(z);
    ps.radii.push_back(std::exp(0.5 * (p - 1.0) * z));
    ps.u_hat.push_back(state.u[i] * std::exp(-z));
  }
  return ps;
}

std::vector<double> from_polar(const PolarState& polar) {
  std::vector<double> u(polar.u_hat.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = polar.u_hat[i] * std::exp(polar.z[i]);
  return u;
}

PolarField::PolarField(const FlowState& state, double p, Orientation orientation, double lambda, double h)
    : state_(&state), orientation_(orientation), lambda_(lambda), h_(h), p_(p) {
  require_state(state);
  if (state.grid.size < 4) throw std::invalid_argument("PolarField: grid too small");
  for (double v : state.u)
    if (!(v > 0.0)) throw std::invalid_argument("PolarField: state must be positive");
}

double PolarField::log_u(double x) const {
  const auto& g = state_->grid;
  const auto& u = state_->u;
  const double s = (x - g.x_min) / g.dx;
  std::size_t j = s <= 1.0 ? 0 : std::min<std::size_t>(static_cast<std::size_t>(s) - 1, g.size - 4);
  // Cubic Lagrange through j..j+3 in local coordinate t = s - j.
  const double t = s - static_cast<double>(j);
  const double l0 = std::log(u[j]), l1 = std::log(u[j + 1]), l2 = std::log(u[j + 2]), l3 = std::log(u[j + 3]);
  return l0 * (t - 1) * (t - 2) * (t - 3) / -6.0 + l1 * t * (t - 2) * (t - 3) / 2.0 +
         l2 * t * (t - 1) * (t - 3) / -2.0 + l3 * t * (t - 1) * (t - 2) / 6.0;
}

double PolarField::u_hat(double r) const {
  const auto& g = state_->grid;
  const double tau = state_->tau;
  // Beyond the grid the state is continued by its e^{|x|} tail, which makes
  // ln u_hat constant there.
  const double x_edge = orientation_ == Orientation::left ? g.x_min : g.x_max();
  const double z_edge = wave_z(orientation_, x_edge, lambda_, h_, tau);
  const double z = r > 0.0 ? 2.0 / (p_ - 1.0) * std::log(r) : -std::numeric_limits<double>::infinity();
  if (z <= z_edge) {
    const double lu = std::log(orientation_ == Orientation::left ? state_->u.front() : state_->u.back());
    return std::exp(lu - z_edge);
  }
  const double x = wave_x(orientation_, z, lambda_, h_, tau);
  return std::exp(log_u(x) - z);
}

double PolarField::edge_radius() const {
  const auto& g = state_->grid;
  const double x_edge = orientation_ == Orientation::left ? g.x_min : g.x_max();
  return std::exp(0.5 * (p_ - 1.0) * wave_z(orientation_, x_edge, lambda_, h_, state_->tau));
}

PolarCurvature polar_curvature(const PolarField& field, int n, double r, double dr) {
  if (!(dr > 0.0) || r < dr) throw std::invalid_argument("polar_curvature: need r >= dr > 0");
  const double k = NormalizationMap::for_dimension(n).amplitude();
  const double g = 2.0 / (n - 2);
  // g = e^{2 psi} delta with psi = (2/(n-2)) ln(u_hat / k).
  const double pm = g * std::log(field.u_hat(r - dr) / k);
  const double p0 = g * std::log(field.u_hat(r) / k);
  const double pp = g * std::log(field.u_hat(r + dr) / k);
  const double pr = (pp - pm) / (2.0 * dr);
  const double prr = (pp - 2.0 * p0 + pm) / (dr * dr);
  const double e = std::exp(-2.0 * p0);
  PolarCurvature c;
  c.k_rad = -e * (prr + pr / r);
  c.k_sph = -e * (2.0 * pr / r + pr * pr);
  c.R_geometric = 2.0 * (n - 1) * c.k_rad + (n - 1) * (n - 2) * c.k_sph;
  c.ric_radial = (n - 1) * c.k_rad;
  c.ric_spherical = c.k_rad + (n - 2) * c.k_sph;
  c.rm_norm = rm_norm_from_sectional(n, c.k_rad, c.k_sph);
  return c;
}

MeanValueCheck mean_value_check(const PolarField& field, int n, double rho, int nodes) {
  if (rho < 0.0 || nodes < 2) throw std::invalid_argument("mean_value_check: bad arguments");
  if (nodes % 2) ++nodes;
  const double lo = std::max(0.0, rho - 1.0), hi = rho + 1.0;
  const double full = sin_power_integral(n - 2, std::numbers::pi);
  // Area of {|y| = s} inside B(y0, 1), |y0| = rho.
  auto cap = [&](double s) {
    if (s <= 0.0) return 0.0;
    double frac;
    if (s <= 1.0 - rho) {
      frac = full;
    } else {
      const double c = std::clamp((s * s + rho * rho - 1.0) / (2.0 * s * rho), -1.0, 1.0);
      frac = sin_power_integral(n - 2, std::acos(c));
    }
    return sphere_area(n - 2) * std::pow(s, n - 1) * frac;
  };
  const double hstep = (hi - lo) / nodes;
  double sum = 0.0;
  for (int i = 0; i <= nodes; ++i) {
    const double s = lo + i * hstep;
    const double w = (i == 0 || i == nodes) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * cap(s) * field.u_hat(s);
  }
  const double ball = sphere_area(n - 1) / n;
  MeanValueCheck m;
  m.value = field.u_hat(rho);
  m.ball_average = sum * hstep / 3.0 / ball;
  return m;
}

std::vector<CurvatureSample> two_region_profile(const FlowState& state, int n, const std::vector<TipFrame>& tips,
                                                double u_split, int polar_points) {
  require_state(state);
  if (polar_points < 4) throw std::invalid_argument("two_region_profile: polar_points < 4");
  const double p = exponent_p(n);
  const auto& g = state.grid;
  // Cylindrical window: from the first to the last sample with u >= u_split.
  std::size_t lo = 0, hi = g.size;
  while (lo < g.size && state.u[lo] < u_split) ++lo;
  while (hi > lo && state.u[hi - 1] < u_split) --hi;
  if (lo >= hi) throw std::invalid_argument("two_region_profile: state never reaches u_split");

  std::vector<CurvatureSample> out;
  const auto prof = curvature_profile(state, n, 0.0);
  for (std::size_t i = std::max<std::size_t>(lo, 1); i < std::min(hi, g.size - 1); ++i) {
    out.push_back({g.x(i), prof.R_geometric[i], prof.ric_radial[i], prof.ric_spherical[i], prof.rm_norm[i], false});
  }
  for (const auto& t : tips) {
    const double x_split = t.orientation == Orientation::left ? g.x(lo) : g.x(hi - 1);
    const double r_split = std::exp(0.5 * (p - 1.0) * wave_z(t.orientation, x_split, t.lambda, t.h, state.tau));
    const double dr = r_split / polar_points;
    const PolarField field(state, p, t.orientation, t.lambda, t.h);
    for (int j = 2; j < polar_points; ++j) {
      const double r = j * dr;
      if (r - dr < field.edge_radius()) continue;
      const auto c = polar_curvature(field, n, r, dr);
      const double x = wave_x(t.orientation, 2.0 / (p - 1.0) * std::log(r), t.lambda, t.h, state.tau);
      out.push_back({x, c.R_geometric, c.ric_radial, c.ric_spherical, c.rm_norm, true});
    }
  }
  return out;
}

RmSample curvature_sample(const FlowState& state, const SupersolutionSpec& spec, double polar_dr) {
  const int n = spec.params.n;
  const double p = spec.p();
  const double tau = state.tau;
  const double big_m = kTipRadius;
  const auto affine = affine_closed_form(n);
  const auto prof = curvature_profile(state, n, 0.0);

  struct Tip {
    Orientation o;
    double lambda, h;
  };
  const Tip tips[2] = {{Orientation::left, spec.params.lambda, spec.params.h},
                       {Orientation::right, spec.params.lambda_prime, spec.params.h_prime}};
  auto radius = [&](const Tip& t, double x) { return std::exp(0.5 * (p - 1.0) * wave_z(t.o, x, t.lambda, t.h, tau)); };

  RmSample s;
  s.tau = tau;
  s.min_R_normalized = s.min_sec_cond1 = s.min_sec_cond2 = std::numeric_limits<double>::infinity();
  s.u_hat_min = std::numeric_limits<double>::infinity();
  s.mean_value_margin = std::numeric_limits<double>::infinity();

  // Cylindrical region: outside both tip balls of radius M/2.
  for (std::size_t i = 1; i + 1 < state.grid.size; ++i) {
    const double x = state.grid.x(i);
    if (radius(tips[0], x) < 0.5 * big_m || radius(tips[1], x) < 0.5 * big_m) continue;
    if (std::isnan(prof.rm_norm[i])) continue;
    s.sup_rm_cylinder = std::max(s.sup_rm_cylinder, prof.rm_norm[i]);
    s.min_R_normalized = std::min(s.min_R_normalized, prof.R_normalized[i]);
    s.min_sec_cond1 = std::min(s.min_sec_cond1, prof.sec_cond1[i]);
    s.min_sec_cond2 = std::min(s.min_sec_cond2, prof.sec_cond2[i]);
  }

  for (const auto& t : tips) {
    const PolarField field(state, p, t.o, t.lambda, t.h);
    // The innermost radii stay a stencil away from r = 0: there the O(dx^2)
    // error in the discrete tail exponent shows up as a cone point.
    for (double r = 2.0 * polar_dr; r <= 2.0 * big_m + 1e-12; r += polar_dr) {
      if (r - polar_dr < field.edge_radius()) continue;
      const auto c = polar_curvature(field, n, r, polar_dr);
      s.sup_rm_polar = std::max(s.sup_rm_polar, c.rm_norm);
      s.min_R_normalized = std::min(s.min_R_normalized, (c.R_geometric - affine.B) / affine.A);
    }
    for (double r = 0.0; r <= 2.0 * big_m + 1e-12; r += polar_dr) {
      const double v = field.u_hat(r);
      s.u_hat_min = std::min(s.u_hat_min, v);
      s.u_hat_max = std::max(s.u_hat_max, v);
    }
    for (std::size_t i = 1; i + 1 < state.grid.size; ++i) {
      const double r = radius(t, state.grid.x(i));
      if (r < 0.5 * big_m || r > 2.0 * big_m || std::isnan(prof.R_geometric[i])) continue;
      const double rc = prof.R_geometric[i];
      const double rp = polar_curvature(field, n, r, polar_dr).R_geometric;
      s.overlap_gap = std::max(s.overlap_gap, std::abs(rc - rp) / std::max(std::abs(rc), 1.0));
    }
    for (double rho : {0.0, 0.5 * big_m}) {
      const auto mv = mean_value_check(field, n, rho);
      s.mean_value_margin = std::min(s.mean_value_margin, (mv.value - mv.ball_average) / mv.value);
    }
  }
  s.sup_rm = std::max(s.sup_rm_cylinder, s.sup_rm_polar);
  return s;
}

RmMonitor riemann_norm_monitor(const AncientRun& run, const SupersolutionSpec& spec, double tau_lo, double tau_hi,
                               double polar_dr) {
  RmMonitor m;
  std::vector<double> t, v;
  for (const auto& snap : run.snapshots) {
    if (snap.tau < tau_lo - 1e-9 || snap.tau > tau_hi + 1e-9) continue;
    m.series.push_back(curvature_sample(snap, spec, polar_dr));
    t.push_back(snap.tau);
    v.push_back(m.series.back().sup_rm);
    m.sup = std::max(m.sup, v.back());
  }
  if (t.size() < 2) throw std::invalid_argument("riemann_norm_monitor: fewer than two snapshots in window");
  m.trend = fit_line(t, v);
  return m;
}

void write_curvature_csv(std::ostream& os, const CurvatureProfile& profile) {
  CsvWriter w(os, {"x", "R_normalized", "R_geometric", "ric_radial", "ric_spherical", "cond1", "cond2", "rm_norm"});
  for (std::size_t i = 0; i < profile.grid.size; ++i) {
    const double row[] = {profile.grid.x(i),       profile.R_normalized[i], profile.R_geometric[i],
                          profile.ric_radial[i],   profile.ric_spherical[i], profile.sec_cond1[i],
                          profile.sec_cond2[i],    profile.rm_norm[i]};
    w.row_with_gaps(row);
  }
}

}  // namespace yamabe
