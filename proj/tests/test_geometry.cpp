#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "yamabe/geometry.hpp"

using namespace yamabe;

namespace {

FlowState sample(double lo, double hi, double dx, auto&& f) {
  const auto grid = UniformGrid::spanning(lo, hi, dx);
  FlowState s{0.0, grid, std::vector<double>(grid.size)};
  for (std::size_t i = 0; i < grid.size; ++i) s.u[i] = f(grid.x(i));
  return s;
}

// Scalar curvature of the Barenblatt tip in polar coordinates, where
// u_hat = (c + r^2)^{-(n-2)/4}: R = cbar k^{p-1} a (2 n c + (n-2) r^2) / (c + r^2).
double barenblatt_tip_curvature(int n, double c, double r) {
  const auto map = NormalizationMap::for_dimension(n);
  const double a = 0.25 * (n - 2);
  const double cbar = 4.0 * (n - 1) / (n - 2);
  return cbar * (map.alpha / map.beta) * a * (2.0 * n * c + (n - 2) * r * r) / (c + r * r);
}

// Value with first and second derivative, enough to differentiate closed forms exactly.
struct Jet2 {
  double v, d1, d2;
};
Jet2 operator+(Jet2 a, double b) { return {a.v + b, a.d1, a.d2}; }
Jet2 operator*(double a, Jet2 b) { return {a * b.v, a * b.d1, a * b.d2}; }
Jet2 exp(Jet2 a) {
  const double e = std::exp(a.v);
  return {e, e * a.d1, e * (a.d2 + a.d1 * a.d1)};
}
Jet2 pow(Jet2 a, double q) {
  const double f = std::pow(a.v, q), f1 = q * std::pow(a.v, q - 1), f2 = q * (q - 1) * std::pow(a.v, q - 2);
  return {f, f1 * a.d1, f1 * a.d2 + f2 * a.d1 * a.d1};
}

// (1 + c e^{-(p-1) x})^{-1/(p-1)}
Jet2 barenblatt_jet(double c, double p, Jet2 x) { return pow(c * exp(-(p - 1) * x) + 1.0, -1.0 / (p - 1)); }

template <class V>
std::vector<double> finite(const V& v) {
  std::vector<double> out;
  for (double x : v)
    if (!std::isnan(x)) out.push_back(x);
  return out;
}

}  // namespace

TEST_CASE("round cylinder") {
  for (int n : {3, 4, 5, 6}) {
    const auto s = sample(-1, 1, 0.01, [](double) { return 1.0; });
    const auto prof = curvature_profile(s, n);
    const auto map = NormalizationMap::for_dimension(n);
    const double r_cyl = (n - 1) * (n - 2);
    for (std::size_t i = 1; i + 1 < s.grid.size; ++i) {
      CHECK(prof.R_normalized[i] == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(prof.R_geometric[i] == doctest::Approx(r_cyl * map.alpha / map.beta).epsilon(1e-12));
      CHECK(prof.ric_radial[i] == doctest::Approx(0.0));
      CHECK(prof.ric_radial[i] + (n - 1) * prof.ric_spherical[i] == doctest::Approx(prof.R_geometric[i]));
    }
    CHECK(std::isnan(prof.R_normalized.front()));
    CHECK(std::isnan(prof.rm_norm.back()));
  }
}

TEST_CASE("steady state is a round sphere") {
  for (int n : {3, 4, 5, 6}) {
    const double dx = 0.01;
    const auto s = sample(-8, 8, dx, [n](double x) { return steady_state(1.0, n, x); });
    const auto map = NormalizationMap::for_dimension(n);
    const auto prof = two_region_profile(s, n, {{Orientation::left, 0.0, 0.0}, {Orientation::right, 0.0, 0.0}});
    double mean = 0.0, gap = 0.0;
    for (const auto& c : prof) {
      mean += c.R_geometric / prof.size();
      gap = std::max(gap, std::abs(c.ric_radial - c.ric_spherical) / std::abs(c.ric_spherical));
    }
    double var = 0.0;
    for (const auto& c : prof) var += (c.R_geometric - mean) * (c.R_geometric - mean) / prof.size();
    MESSAGE("n=" << n << " std/mean " << std::sqrt(var) / mean << " ricci gap " << gap);
    CHECK(std::sqrt(var) / mean < 1e-3);
    CHECK(gap < 1e-3);
    // Same scalar curvature as the normalized cylinder.
    CHECK(mean == doctest::Approx((n - 1) * (n - 2) * map.alpha / map.beta).epsilon(1e-4));
    // R~ divides by u^p, so the O(dx^2) error is only small in the bulk.
    for (double r : finite(scalar_curvature_normalized(s, exponent_p(n), 0.2))) CHECK(std::abs(r - 1.0) < 50 * dx * dx);
    const auto sec = sectional_sign_check(s, n);
    CHECK(sec.min_cond1 >= -10 * dx * dx);
    CHECK(sec.min_cond2 >= -10 * dx * dx);
  }
}

TEST_CASE("affine relation between the two curvatures") {
  for (int n : {3, 4, 5, 6}) {
    const auto fit = calibrate_affine(n);
    const auto exact = affine_closed_form(n);
    CHECK(fit.A == doctest::Approx(exact.A).epsilon(1e-8));
    CHECK(fit.B == doctest::Approx(exact.B).epsilon(1e-8));
    // Generic states: a lumpy positive function and a sampled traveling wave.
    const double p = exponent_p(n);
    const auto lumpy = sample(-4, 4, 0.01, [](double x) { return 0.6 + 0.3 * std::sin(2 * x) * std::exp(-0.2 * x * x); });
    const auto wave = sample(-8, 8, 0.01, [p](double x) { return barenblatt(barenblatt_normalizing_c(p), p, x); });
    for (const auto* s : {&lumpy, &wave}) {
      const auto rn = scalar_curvature_normalized(*s, p);
      const auto rg = scalar_curvature_geometric(*s, n);
      for (std::size_t i = 1; i + 1 < rn.size(); ++i)
        CHECK(std::abs(rg[i] - (exact.A * rn[i] + exact.B)) <= 1e-6 * std::max(1.0, std::abs(rg[i])));
    }
  }
}

TEST_CASE("Ricci trace matches the scalar curvature") {
  const int n = 4;
  auto worst = [n](double dx) {
    const auto s = sample(-4, 4, dx, [](double x) { return 0.6 + 0.3 * std::sin(2 * x) * std::exp(-0.2 * x * x); });
    const auto ric = ricci_eigenvalues(s, n);
    const auto rg = scalar_curvature_geometric(s, n);
    double e = 0.0;
    for (std::size_t i = 1; i + 1 < rg.size(); ++i) e = std::max(e, std::abs(ric.radial[i] + (n - 1) * ric.spherical[i] - rg[i]));
    return e;
  };
  const double e1 = worst(0.02), e2 = worst(0.01);
  MESSAGE("trace defect " << e1 << " -> " << e2);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("normalized curvature of the Barenblatt wave") {
  // For a traveling wave u_xx + u^p - u = -lambda p u^{p-1} u_x, so R~ = 1 + (p-1) lambda u_x / u.
  const double p = 5.0;
  const double c = barenblatt_normalizing_c(p);

  SUBCASE("pointwise formula with exact derivatives") {
    // Below x = -3 the sum u_xx + u^p - u cancels to O(u^p) and roundoff dominates.
    for (double x = -3.0; x <= 4.0; x += 0.25) {
      const Jet2 b = barenblatt_jet(c, p, Jet2{x, 1.0, 0.0});
      const double exact = 1.0 + (p - 1.0) * b.d1 / b.v;
      CHECK(std::abs(normalized_curvature_at(b.v, b.d2, p) - exact) < 1e-8);
      CHECK(b.d1 == doctest::Approx(barenblatt_x(c, p, x)).epsilon(1e-12));
    }
  }

  SUBCASE("second differences converge at second order") {
    auto discrete = [&](double dx) {
      const auto s = sample(-3, 3, dx, [&](double x) { return barenblatt(c, p, x); });
      return std::pair{s, scalar_curvature_normalized(s, p)};
    };
    const auto [s1, r1] = discrete(2e-3);
    const auto [s2, r2] = discrete(1e-3);
    double worst_h = 0.0, worst_h2 = 0.0;
    for (std::size_t i = 2; i + 2 < s1.grid.size; ++i) {
      if (s1.u[i] < 0.2) continue;
      const double x = s1.grid.x(i);
      const double exact = 1.0 + (p - 1.0) * barenblatt_x(c, p, x) / barenblatt(c, p, x);
      worst_h = std::max(worst_h, std::abs(r1[i] - exact));
      worst_h2 = std::max(worst_h2, std::abs(r2[2 * i] - exact));
    }
    MESSAGE("errors " << worst_h << " -> " << worst_h2);
    CHECK(worst_h / worst_h2 == doctest::Approx(4.0).epsilon(0.05));
  }
}

TEST_CASE("polar coordinates") {
  const double p = 5.0;
  const double c = barenblatt_normalizing_c(p);
  const auto s = sample(-30, 12, 0.01, [&](double x) { return barenblatt(c, p, x); });

  SUBCASE("round trip") {
    const auto ps = to_polar(s, p, Orientation::left, 1.0, 0.0, 1.0);
    REQUIRE(!ps.x.empty());
    CHECK(ps.x.back() <= 1.0);
    const auto back = from_polar(ps);
    for (std::size_t i = 0; i < back.size(); ++i) CHECK(std::abs(back[i] / s.u[i] - 1.0) < 1e-12);
    // r = 1 at z = 0 and u_hat matches the field evaluator at the nodes.
    const PolarField field(s, p, Orientation::left, 1.0, 0.0);
    for (std::size_t i = 0; i < ps.x.size(); i += 97) {
      CHECK(field.u_hat(ps.radii[i]) == doctest::Approx(ps.u_hat[i]).epsilon(1e-10));
    }
    const auto right = to_polar(s, p, Orientation::right, 1.0, 0.0, 5.0);
    CHECK(right.x.front() >= 5.0);
  }

  SUBCASE("tip curvature against the closed form") {
    const PolarField field(s, p, Orientation::left, 1.0, 0.0);
    const auto cyl = scalar_curvature_geometric(s, 3);
    for (double r : {0.2, 0.5, 1.0, 2.0, 4.0}) {
      const double exact = barenblatt_tip_curvature(3, c, r);
      CHECK(polar_curvature(field, 3, r, 0.02).R_geometric == doctest::Approx(exact).epsilon(1e-3));
      // Same point on the cylinder: z = 2 ln r / (p - 1).
      const double z = 0.5 * std::log(r);
      const auto i = static_cast<std::size_t>(std::lround((z - s.grid.x_min) / s.grid.dx));
      const double r_at = std::exp(0.5 * (p - 1) * s.grid.x(i));
      CHECK(cyl[i] == doctest::Approx(barenblatt_tip_curvature(3, c, r_at)).epsilon(1e-3));
    }
    CHECK_THROWS_AS(polar_curvature(field, 3, 0.01, 0.02), std::invalid_argument);
  }

  SUBCASE("mean-value inequality") {
    // r^{2-n} is harmonic: its ball averages away from the origin are exact.
    const auto harmonic = sample(-20, 20, 0.01, [](double x) { return std::exp(-x); });
    const PolarField hf(harmonic, p, Orientation::left, 0.0, 0.0);
    const auto mv = mean_value_check(hf, 3, 2.0, 800);
    CHECK(mv.value == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(mv.ball_average == doctest::Approx(0.5).epsilon(1e-5));
    // Constants average to themselves; the Barenblatt tip is superharmonic.
    const auto flat = sample(-20, 20, 0.01, [](double x) { return std::exp(x); });
    const PolarField ff(flat, p, Orientation::left, 0.0, 0.0);
    for (double rho : {0.0, 0.4, 2.0}) CHECK(mean_value_check(ff, 3, rho).ball_average == doctest::Approx(1.0).epsilon(1e-5));
    const PolarField field(s, p, Orientation::left, 1.0, 0.0);
    for (double rho : {0.0, 1.0}) {
      const auto m = mean_value_check(field, 3, rho);
      CHECK(m.value > m.ball_average);
    }
  }
}

TEST_CASE("two-region monitor on a short run") {
  const auto spec = make_supersolution({3, 1.2, 1.2, 0.0, 0.0});
  AncientOptions opts;
  opts.dx = 0.05;
  opts.solver.dtau = 2e-3;
  opts.snapshot_every = 100;
  opts.companions = false;
  const auto run = run_um(spec, 4.0, -2.0, opts);
  const auto mon = riemann_norm_monitor(run, spec, -3.5, -2.0);
  REQUIRE(mon.series.size() >= 4);
  double mean = 0.0;
  for (const auto& s : mon.series) {
    mean += s.sup_rm / mon.series.size();
    CHECK(s.min_R_normalized >= -1e-6);
    CHECK(s.min_sec_cond1 >= -10 * opts.dx * opts.dx);
    CHECK(s.min_sec_cond2 >= -10 * opts.dx * opts.dx);
    CHECK(s.overlap_gap < 10 * opts.dx * opts.dx);
    CHECK(s.u_hat_min > 0.0);
    CHECK(s.u_hat_max < 1.0);
    CHECK(s.mean_value_margin > 0.0);
  }
  CHECK(std::abs(mon.trend.slope) < 1e-2 * mean);
  CHECK_THROWS_AS(riemann_norm_monitor(run, spec, 10.0, 11.0), std::invalid_argument);
}

TEST_CASE("curvature export") {
  const auto s = sample(-1, 1, 0.5, [](double) { return 1.0; });
  std::ostringstream os;
  write_curvature_csv(os, curvature_profile(s, 3));
  const std::string out = os.str();
  CHECK(out.rfind("x,R_normalized,R_geometric,ric_radial,ric_spherical,cond1,cond2,rm_norm\n", 0) == 0);
  CHECK(out.find("\n-1,,,,,,,\n") != std::string::npos);
  CHECK_THROWS_AS(curvature_profile(FlowState{0.0, UniformGrid{0.0, 1.0, 2}, {1.0, 1.0}}, 3), std::invalid_argument);
}
