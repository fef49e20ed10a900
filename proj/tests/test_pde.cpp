#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "yamabe/pde.hpp"
#include "yamabe/soliton.hpp"

using namespace yamabe;

namespace {

FlowState sample(double tau, double x_min, double x_max, double dx, const std::function<double(double)>& f) {
  FlowState s;
  s.tau = tau;
  s.grid = UniformGrid::spanning(x_min, x_max, dx);
  for (std::size_t i = 0; i < s.grid.size; ++i) s.u.push_back(f(s.grid.x(i)));
  return s;
}

// Adaptive Simpson, used as an independent quadrature oracle.
double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 0) {
  const double c = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fc = f(c);
  const double whole = (b - a) / 6.0 * (fa + 4 * fc + fb);
  const double left = (c - a) / 6.0 * (fa + 4 * f(0.5 * (a + c)) + fc);
  const double right = (b - c) / 6.0 * (fc + 4 * f(0.5 * (c + b)) + fb);
  if (depth > 40 || std::abs(left + right - whole) < 15 * tol) return left + right + (left + right - whole) / 15;
  return simpson(f, a, c, tol / 2, depth + 1) + simpson(f, c, b, tol / 2, depth + 1);
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("constant state is a fixed point") {
  SolverConfig cfg;
  cfg.bc.left = {BoundaryKind::plateau, 0.7};
  cfg.bc.right = {BoundaryKind::plateau, 0.7};
  const auto s = sample(-3.0, -5.0, 5.0, 0.05, [](double) { return 1.0; });
  const auto [next, rep] = step_implicit(s, cfg);
  CHECK(next.u == s.u);
  CHECK(next.tau == doctest::Approx(-3.0 + 1e-3));
  CHECK(rep.newton_iters == 0);
  CHECK(rep.max_u == 1.0);
  CHECK(rep.mass_p == doctest::Approx(10.0));
}

TEST_CASE("boundary closures") {
  SUBCASE("decay closure is exact to discretization order on exponentials") {
    double prev_l = 0.0, prev_r = 0.0;
    for (double dx : {0.04, 0.02, 0.01}) {
      const auto g = UniformGrid::spanning(-3.0, 3.0, dx);
      std::vector<double> ul, ur;
      for (std::size_t i = 0; i < g.size; ++i) {
        ul.push_back(std::exp(g.x(i)));
        ur.push_back(std::exp(-g.x(i)));
      }
      const auto dl = second_difference(ul, dx, {});
      const auto dr = second_difference(ur, dx, {});
      const double el = std::abs(dl.front() - ul.front());
      const double er = std::abs(dr.back() - ur.back());
      // Interior rows are the plain second difference.
      CHECK(std::abs(dl[g.size / 2] - ul[g.size / 2]) < dx * dx);
      if (prev_l > 0.0) {
        CHECK(prev_l / el == doctest::Approx(2.0).epsilon(0.05));
        CHECK(prev_r / er == doctest::Approx(2.0).epsilon(0.05));
      }
      prev_l = el;
      prev_r = er;
    }
  }
  SUBCASE("constant data sees an O(1/dx) boundary flux under the decay closure") {
    const double dx = 0.1;
    const std::vector<double> ones(11, 1.0);
    const auto d = second_difference(ones, dx, {});
    CHECK(d.front() == doctest::Approx(-2.0 / dx));
    CHECK(d.back() == doctest::Approx(-2.0 / dx));
    CHECK(d[5] == 0.0);
  }
  SUBCASE("plateau closure on 1 - C e^{-gamma x}") {
    const double gamma = 0.6, dx = 0.01;
    const auto g = UniformGrid::spanning(0.0, 10.0, dx);
    std::vector<double> u;
    for (std::size_t i = 0; i < g.size; ++i) u.push_back(1.0 - 0.3 * std::exp(-gamma * g.x(i)));
    const auto d = second_difference(u, dx, {{}, {BoundaryKind::plateau, gamma}});
    const double exact = -0.3 * gamma * gamma * std::exp(-gamma * 10.0);
    CHECK(std::abs(d.back() - exact) < 10 * dx * std::abs(exact) + 1e-12);
  }
  SUBCASE("row coefficients") {
    const auto r = apply_boundary({}, true, 0.5);
    CHECK(r.diag == doctest::Approx(8.0 + 4.0));
    CHECK(r.off == doctest::Approx(-8.0));
    CHECK(r.rhs == 0.0);
  }
}

TEST_CASE("steady state changes by O(dx^2) per step") {
  double prev = 0.0;
  for (double dx : {0.04, 0.02}) {
    const auto s = sample(0.0, -25.0, 25.0, dx, [](double x) { return steady_state(1.0, 3, x); });
    SolverConfig cfg;
    cfg.dtau = 1e-2;
    const auto [next, rep] = step_implicit(s, cfg);
    const double change = sup_diff(next.u, s.u);
    MESSAGE("dx " << dx << " change " << change);
    CHECK(change < 10 * dx * dx);
    if (prev > 0.0) CHECK(prev / change == doctest::Approx(4.0).epsilon(0.15));
    prev = change;
  }
}

TEST_CASE("mass integrals") {
  CHECK(mass_integrals(sample(0, 0, 4, 0.1, [](double) { return 0.0; }), 5.0).mass_p == 0.0);
  const Mass ones = mass_integrals(sample(0, 0, 4, 0.1, [](double) { return 1.0; }), 5.0);
  CHECK(ones.mass_p == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(ones.mass_1 == doctest::Approx(4.0).epsilon(1e-14));
  auto bar = [](double x) { return barenblatt(15.0, 5.0, x); };
  const Mass m = mass_integrals(sample(0, -20, 20, 0.01, bar), 5.0);
  const double oracle_p = simpson([&](double x) { return std::pow(bar(x), 5.0); }, -20, 20, 1e-12);
  const double oracle_1 = simpson(bar, -20, 20, 1e-12);
  CHECK(std::abs(m.mass_p - oracle_p) < 1e-6);
  CHECK(std::abs(m.mass_1 - oracle_1) < 1e-6);
}

TEST_CASE("traveling wave tracking, mass balance and barrier") {
  const double lambda = 1.5;
  const auto prof = shoot_profile(lambda, 5.0, -60.0, 80.0, 0.005);
  auto wave = [&](double x, double tau) { return traveling_wave_eval(prof, x, tau, 0.0, Orientation::left); };
  SolverConfig cfg;
  cfg.bc.right = {BoundaryKind::plateau, prof.decay.gamma};
  const double dx = 0.02;
  const auto s0 = sample(0.0, -40.0, 40.0, dx, [&](double x) { return wave(x, 0.0); });

  double barrier = 0.0;
  const auto traj = evolve(s0, 1.0, cfg, 250, [&](const FlowState&, const FlowState& after, const StepReport&) {
    for (std::size_t i = 0; i < after.u.size(); ++i) {
      barrier = std::max(barrier, after.u[i] - wave(after.grid.x(i), after.tau));
    }
  });
  REQUIRE(traj.snapshots.size() == 4);
  CHECK(traj.snapshots.back().tau == 1.0);
  CHECK(traj.steps.size() == 1000);
  CHECK(barrier <= 5 * dx * dx);

  double err = 0.0;
  const auto& last = traj.snapshots.back();
  for (std::size_t i = 0; i < last.u.size(); ++i) {
    if (std::abs(last.grid.x(i)) <= 20.0) err = std::max(err, std::abs(last.u[i] - wave(last.grid.x(i), 1.0)));
  }
  MESSAGE("tracking error " << err << " barrier excess " << barrier);
  CHECK(err < 5e-3);

  // Centered differences of mass_p against the right-hand side.
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < traj.steps.size(); ++k) {
    const auto& a = traj.steps[k - 1].report;
    const auto& b = traj.steps[k].report;
    const auto& c = traj.steps[k + 1].report;
    const double dm = (c.mass_p - a.mass_p) / (traj.steps[k + 1].tau - traj.steps[k - 1].tau);
    worst = std::max(worst, std::abs(dm - (b.mass_p - b.mass_1)) / (1.0 + b.mass_p));
  }
  MESSAGE("mass balance " << worst);
  CHECK(worst < 10 * (cfg.dtau + dx * dx));

  for (const auto& r : traj.steps) CHECK(r.report.final_residual <= cfg.newton_tol);
}

TEST_CASE("evolve bookkeeping") {
  const auto s0 = sample(-1.0, -10, 10, 0.05, [](double x) { return steady_state(1.0, 3, x); });
  SolverConfig cfg;
  SUBCASE("trivial horizon") {
    const auto traj = evolve(s0, -1.0, cfg, 10);
    CHECK(traj.snapshots.empty());
    CHECK(traj.steps.empty());
  }
  SUBCASE("step times stay on the lattice and the last step lands on tau_end") {
    cfg.dtau = 0.03;
    const auto traj = evolve(s0, -0.5, cfg, 5);
    CHECK(traj.steps.size() == 17);
    CHECK(traj.steps[9].tau == -1.0 + 10 * 0.03);
    CHECK(traj.steps.back().tau == -0.5);
    CHECK(traj.steps.back().dtau == doctest::Approx(0.02));
    CHECK(traj.snapshots.size() == 4);
  }
  SUBCASE("failed steps are halved") {
    const auto bump = sample(-1.0, -10, 10, 0.05, [](double x) { return steady_state(1.0, 3, x) + 0.5 * std::exp(-x * x); });
    cfg.dtau = 0.5;
    cfg.newton_max_iter = 3;
    const auto traj = evolve(bump, 0.0, cfg, 1);
    MESSAGE("halvings " << traj.halvings);
    CHECK(traj.halvings > 0);
    CHECK(traj.snapshots.back().tau == 0.0);
    cfg.max_halvings = 0;
    cfg.newton_max_iter = 1;
    CHECK_THROWS_AS(evolve(s0, 0.0, cfg, 1), StepFailure);
  }
  SUBCASE("argument checks") {
    CHECK_THROWS_AS(evolve(s0, -2.0, cfg, 1), std::invalid_argument);
    CHECK_THROWS_AS(evolve(s0, 0.0, cfg, 0), std::invalid_argument);
    cfg.dtau = 0.0;
    CHECK_THROWS_AS(evolve(s0, 0.0, cfg, 1), std::invalid_argument);
  }
}

TEST_CASE("small data goes extinct in finite time and stays positive before") {
  const auto s0 = sample(0.0, -15, 15, 0.05, [](double x) { return 0.3 / std::cosh(x); });
  SolverConfig cfg;
  cfg.dtau = 1e-3;
  bool positive = true;
  const auto traj = evolve(s0, 50.0, cfg, 100, [&](const FlowState&, const FlowState& after, const StepReport& r) {
    if (r.max_u >= cfg.extinction_threshold) {
      positive = positive && *std::min_element(after.u.begin(), after.u.end()) > 0.0;
    }
  });
  CHECK(traj.extinct);
  REQUIRE(traj.extinction_tau.has_value());
  MESSAGE("extinction at " << *traj.extinction_tau);
  CHECK(*traj.extinction_tau < 50.0);
  CHECK(positive);
  CHECK(traj.snapshots.back().tau == *traj.extinction_tau);
  const auto& last = traj.snapshots.back();
  CHECK(*std::max_element(last.u.begin(), last.u.end()) < cfg.extinction_threshold);
  CHECK_THROWS_AS(step_implicit(last, cfg), std::invalid_argument);
}

TEST_CASE("trajectory export") {
  const auto s0 = sample(0.0, -5, 5, 0.5, [](double x) { return steady_state(1.0, 3, x); });
  SolverConfig cfg;
  const auto a = evolve(s0, 0.01, cfg, 5);
  const auto b = evolve(s0, 0.01, cfg, 5);
  std::ostringstream ca, cb;
  write_trajectory_csv(ca, a);
  write_trajectory_csv(cb, b);
  CHECK(ca.str() == cb.str());
  CHECK(ca.str().rfind("tau,x,u\n", 0) == 0);
  const auto j = trajectory_manifest(a, cfg);
  CHECK(j["steps"]["tau"].size() == 10);
  CHECK(j["grid"]["size"] == 21);
  CHECK(j["extinct"] == false);
  CHECK(j.dump() == trajectory_manifest(b, cfg).dump());
}
