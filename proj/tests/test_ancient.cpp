#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "yamabe/ancient.hpp"

using namespace yamabe;

namespace {

const SupersolutionSpec& symmetric() {
  static const SupersolutionSpec s = make_supersolution({3, 1.2, 1.2, 0.0, 0.0});
  return s;
}

const SupersolutionSpec& asymmetric() {
  static const SupersolutionSpec s = make_supersolution({3, 1.2, 1.5, 0.0, 0.0});
  return s;
}

double quadratic_small_root(double lambda, double p) {
  return (lambda * p - std::sqrt(lambda * lambda * p * p - 4 * (p - 1))) / 2;
}

}  // namespace

TEST_CASE("supersolution shape") {
  const auto& s = symmetric();
  for (double tau : {-20.0, -8.0, -3.0}) {
    for (double x : {0.3, 2.0, 7.5, 19.0}) {
      CHECK(supersolution_eval(s, x, tau) == supersolution_eval(s, -x, tau));
    }
  }
  // Far left the left branch is active and decays like e^{x}.
  const double tau = -10.0;
  const double r1 = supersolution_eval(s, -40.0, tau) / std::exp(-40.0);
  const double r2 = supersolution_eval(s, -45.0, tau) / std::exp(-45.0);
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-10));
  CHECK(supersolution_eval(s, -40.0, tau) == s.left_profile.value(-40.0 - 1.2 * tau));
  const auto shifted = with_shifts(s, 1.0, -0.5);
  CHECK(supersolution_eval(shifted, 3.0, tau) ==
        std::min(s.left_profile.value(3.0 + 12.0 + 1.0), s.right_profile.value(-3.0 + 12.0 - 0.5)));
}

TEST_CASE("intersection point") {
  SUBCASE("symmetric crossing sits at the origin") {
    for (double tau : {-30.0, -10.0}) {
      const auto r = intersection_numeric(symmetric(), tau);
      CHECK(std::abs(r.x_numeric) < 1e-10);
      CHECK(r.root_residual < 1e-12);
      CHECK(r.value_at_intersection == doctest::Approx(supersolution_eval(symmetric(), r.x_numeric, tau)));
    }
  }
  SUBCASE("asymmetric slope and value rate") {
    const auto& s = asymmetric();
    const double g1 = quadratic_small_root(1.2, 5), g2 = quadratic_small_root(1.5, 5);
    const double slope = (g1 - g2) / 5, d = (g1 * g2 + 4) / 5;
    CHECK(slope == doctest::Approx(0.037215).epsilon(1e-4));
    const auto fit = fit_intersection_law(s, -40, -20);
    MESSAGE("slope " << fit.x_line.slope << " vs " << slope << ", rate " << fit.value_line.slope << " vs " << d);
    CHECK(fit.x_line.slope == doctest::Approx(slope).epsilon(0.02));
    CHECK(fit.value_line.slope == doctest::Approx(d).epsilon(0.02));
    for (double tau : {-40.0, -30.0, -20.0}) {
      const auto r = intersection_numeric(s, tau);
      CHECK(r.root_residual < 1e-12);
      CHECK(std::abs(r.x_numeric - r.x_asymptotic) < 1e-3);
    }
  }
  SUBCASE("merged fronts are reported") {
    CHECK_THROWS_AS(intersection_numeric(symmetric(), 1.0), NumericalFailure);
  }
}

TEST_CASE("mass of the supersolution") {
  const auto& s = asymmetric();
  SUBCASE("split form agrees with direct quadrature") {
    const double tau = -5.0;
    const double dx = 1e-3;
    double ip = 0.0, i1 = 0.0;
    for (double x = -70.0; x <= 70.0; x += dx) {
      const double v = supersolution_eval(s, x, tau);
      ip += std::pow(v, 5.0) * dx;
      i1 += v * dx;
    }
    const auto m = supersolution_mass(s, tau);
    CHECK(m.mass_p() == doctest::Approx(ip).epsilon(1e-7));
    CHECK(m.mass_1() == doctest::Approx(i1).epsilon(1e-7));
  }
  SUBCASE("far-past identity residual") {
    const auto& sym = symmetric();
    const double c = fit_merge_constant(sym, -30, -15);
    CHECK(c > 0.0);
    const auto r = supersolution_mass_residual(sym, -30.0, 0.25, c);
    MESSAGE("residual " << r.residual << " correction " << r.correction << " defect " << r.offset_defect);
    CHECK(std::abs(r.residual) < 0.1 * r.correction);
    CHECK(std::abs(r.offset_defect) < 1e-8);
    // Probe halving: centered-difference error shrinks by 4.
    const double a = supersolution_mass_residual(sym, -30.0, 1.0, c).residual;
    const double b = supersolution_mass_residual(sym, -30.0, 0.5, c).residual;
    const double e = supersolution_mass_residual(sym, -30.0, 0.25, c).residual;
    CHECK((a - b) / (b - e) == doctest::Approx(4.0).epsilon(0.05));
  }
  SUBCASE("correction vanishes in the far past") {
    const auto& sym = symmetric();
    const double c = fit_merge_constant(sym, -30, -15);
    const auto far = supersolution_mass_residual(sym, -60.0, 0.25, c);
    const auto near = supersolution_mass_residual(sym, -20.0, 0.25, c);
    CHECK(far.correction < 1e-20);
    CHECK(far.correction < 1e-15 * near.correction);
  }
}

TEST_CASE("initial data") {
  const auto& s = symmetric();
  const double m = 10.0;
  const double L = default_half_width(s, m);
  const auto grid = UniformGrid::spanning(-L, L, 0.02);
  const auto u0 = build_initial_data(s, m, grid);
  CHECK(u0.tau == -10.0);
  CHECK(u0.u.front() < 1e-8);
  CHECK(u0.u.back() < 1e-8);
  for (std::size_t i = 0; i < grid.size; ++i) CHECK(u0.u[i] == doctest::Approx(u0.u[grid.size - 1 - i]).epsilon(1e-12));
  const double c = fit_merge_constant(s, -30, -15);
  const double peak = *std::max_element(u0.u.begin(), u0.u.end());
  CHECK(1.0 - peak == doctest::Approx(c * std::exp(-s.d() * m)).epsilon(1e-3));
  CHECK_THROWS_AS(build_initial_data(s, m, UniformGrid::spanning(-10, 10, 0.02)), std::invalid_argument);
}

TEST_CASE("short u_m run") {
  const auto& s = symmetric();
  AncientOptions opts;
  opts.dx = 0.05;
  opts.solver.dtau = 2e-3;
  opts.snapshot_every = 50;
  const double m = 4.0;
  const auto run = run_um(s, m, -2.0, opts);
  REQUIRE(run.series.size() == 21);
  CHECK(run.series.front().tau == -4.0);
  CHECK(run.series.front().q == 0.0);
  CHECK(run.series.front().q_analytic == 0.0);
  CHECK(run.series.back().tau == -2.0);
  for (const auto& d : run.series) {
    CHECK(d.q >= -5 * opts.dx * opts.dx);
    CHECK(d.max_u < 1.0);
    CHECK(d.barrier_violation <= 5 * opts.dx * opts.dx);
  }
  CHECK(run.max_barrier_violation <= 5 * opts.dx * opts.dx);
  CHECK(run.max_monotonicity_violation <= 1e-8);
  CHECK_FALSE(run.extinction_time.has_value());
  std::ostringstream os;
  write_run_csv(os, run);
  CHECK(os.str().rfind("tau,Q,Q_analytic,max_u,argmax,mass_p,mass_1,barrier_violation,", 0) == 0);
  const auto j = run_summary(run, s);
  CHECK(j["snapshots"] == 21);
  CHECK_THROWS_AS(run_um(s, m, -5.0, opts), std::invalid_argument);
}

TEST_CASE("decay-rate fit") {
  std::vector<double> t, q;
  for (int k = 0; k < 50; ++k) {
    t.push_back(-26 + 0.3 * k);
    q.push_back(3 * std::exp(0.9 * t.back()));
  }
  const auto f = fit_decay_rate(t, q);
  CHECK(std::abs(f.d_hat - 0.9) < 1e-10);
  CHECK(std::abs(f.prefactor - 3.0) < 1e-10);
  q[7] = 0.0;
  CHECK_THROWS_AS(fit_decay_rate(t, q), std::invalid_argument);
}

TEST_CASE("merge rate exceeds (p-1)/p") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lam(1.0, 4.0);
  for (int n : {3, 4, 5, 6}) {
    const double p = exponent_p(n);
    for (int k = 0; k < 100; ++k) {
      const double d = merge_rate_d(gamma_of_lambda(lam(rng), p), gamma_of_lambda(lam(rng), p), p);
      CHECK(d > (p - 1) / p);
    }
  }
}

TEST_CASE("distinguishability functional") {
  const auto& base = symmetric();
  const auto moved = with_shifts(base, 1.0, 1.0);
  const double gap = distinguish_functional(moved, base, -30.0);
  MESSAGE("gap (1,1) vs (0,0): " << gap);
  // The plateau lengthens by h + h', so the gap tends to |h + h'|, above the half-width lower bound.
  CHECK(gap == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(gap >= 0.5 * 2.0);
  CHECK(distinguish_functional(with_shifts(base, 1.0, -1.0), base, -30.0) < 1e-3);
  CHECK(distinguish_functional(with_shifts(base, 0.7, -0.7), base, -12.0) < 1e-3);
  const double g1 = distinguish_functional(moved, base, -40.0);
  const double g2 = distinguish_functional(moved, base, -30.0);
  CHECK(std::abs(g1 - g2) / 10.0 < 1e-6);
  CHECK_THROWS_AS(distinguish_functional(asymmetric(), base, -30.0), std::invalid_argument);
}
