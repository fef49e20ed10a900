#include "yamabe/pde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "yamabe/io.hpp"

namespace yamabe {

namespace {

// Ghost-point closure u_x = a + b u at the boundary node.
std::pair<double, double> robin_coefficients(const BoundarySide& side, bool left) {
  if (side.kind == BoundaryKind::decay) return {0.0, left ? 1.0 : -1.0};
  return left ? std::pair{-side.gamma, side.gamma} : std::pair{side.gamma, -side.gamma};
}

// In-place Thomas elimination; sub/sup are the constant-free off-diagonals.
void solve_tridiagonal(std::vector<double>& sub, std::vector<double>& diag, std::vector<double>& sup,
                       std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = sub[i] / diag[i - 1];
    diag[i] -= m * sup[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

double max_of(const std::vector<double>& u) { return *std::max_element(u.begin(), u.end()); }

std::pair<FlowState, StepReport> step_with(const FlowState& state, const SolverConfig& cfg, double dt) {
  const std::size_t n = state.u.size();
  if (n < 3) throw std::invalid_argument("step_implicit: grid needs at least 3 points");
  const double dx = state.grid.dx;
  const double inv_dx2 = 1.0 / (dx * dx);
  const Power pw(cfg.p);
  const BoundaryRow lrow = apply_boundary(cfg.bc.left, true, dx);
  const BoundaryRow rrow = apply_boundary(cfg.bc.right, false, dx);

  std::vector<double> p_old(n);
  for (std::size_t i = 0; i < n; ++i) p_old[i] = pw(state.u[i]);

  std::vector<double> v = state.u;
  std::vector<double> f(n), sub(n), diag(n), sup(n);
  double res = 0.0;
  for (int it = 0;; ++it) {
    // F and its Jacobian at v.
    res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double lap_neg, d_lap;
      sub[i] = sup[i] = 0.0;
      if (i == 0) {
        lap_neg = lrow.diag * v[0] + lrow.off * v[1] + lrow.rhs;
        d_lap = lrow.diag;
        sup[i] = lrow.off;
      } else if (i == n - 1) {
        lap_neg = rrow.diag * v[i] + rrow.off * v[i - 1] + rrow.rhs;
        d_lap = rrow.diag;
        sub[i] = rrow.off;
      } else {
        lap_neg = (2.0 * v[i] - v[i - 1] - v[i + 1]) * inv_dx2;
        d_lap = 2.0 * inv_dx2;
        sub[i] = sup[i] = -inv_dx2;
      }
      const double pv = pw(v[i]);
      f[i] = (pv - p_old[i]) / dt + lap_neg - pv + v[i];
      diag[i] = pw.derivative(v[i]) * (1.0 / dt - 1.0) + d_lap + 1.0;
      if (!std::isfinite(f[i]) || !std::isfinite(diag[i])) {
        throw NumericalFailure("pde/step", "non-finite residual at tau=" + format_double(state.tau));
      }
      res = std::max(res, std::abs(f[i] / diag[i]));
    }
    if (res <= cfg.newton_tol) {
      StepReport rep;
      rep.newton_iters = it;
      rep.final_residual = res;
      FlowState out{state.tau + dt, state.grid, std::move(v)};
      const Mass m = mass_integrals(out, cfg.p);
      rep.mass_p = m.mass_p;
      rep.mass_1 = m.mass_1;
      rep.max_u = max_of(out.u);
      return {std::move(out), rep};
    }
    if (it >= cfg.newton_max_iter) {
      throw StepFailure("Newton did not converge in " + std::to_string(it) +
                            " iterations, residual " + format_double(res),
                        res);
    }
    for (std::size_t i = 0; i < n; ++i) f[i] = -f[i];
    solve_tridiagonal(sub, diag, sup, f);
    // Halve the update while it would leave the domain of u^p, then clamp.
    double alpha = 1.0;
    for (int k = 0; k < 30; ++k) {
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i) ok = v[i] + alpha * f[i] >= 0.0;
      if (ok) break;
      alpha *= 0.5;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = std::max(0.0, v[i] + alpha * f[i]);
  }
}

}  // namespace

void SolverConfig::validate() const {
  if (!(dtau > 0.0 && dtau < 1.0)) throw std::invalid_argument("solver: dtau must lie in (0, 1)");
  if (!(newton_tol > 0.0)) throw std::invalid_argument("solver: newton_tol must be positive");
  if (newton_max_iter < 1) throw std::invalid_argument("solver: newton_max_iter must be >= 1");
  if (!(p > 1.0)) throw std::invalid_argument("solver: p must exceed 1");
  if (!(extinction_threshold >= 0.0)) throw std::invalid_argument("solver: extinction_threshold must be >= 0");
  for (const auto* s : {&bc.left, &bc.right}) {
    if (s->kind == BoundaryKind::plateau && !(s->gamma > 0.0)) {
      throw std::invalid_argument("solver: plateau boundary needs gamma > 0");
    }
  }
}

BoundaryRow apply_boundary(const BoundarySide& side, bool left, double dx) {
  const auto [a, b] = robin_coefficients(side, left);
  const double inv_dx2 = 1.0 / (dx * dx);
  // left:  u_{-1} = u_1 - 2dx(a + b u_0);  right: u_{N+1} = u_{N-1} + 2dx(a + b u_N)
  if (left) return {2.0 * inv_dx2 + 2.0 * b / dx, -2.0 * inv_dx2, 2.0 * a / dx};
  return {2.0 * inv_dx2 - 2.0 * b / dx, -2.0 * inv_dx2, -2.0 * a / dx};
}

std::vector<double> second_difference(const std::vector<double>& u, double dx, const BoundaryConditions& bc) {
  const std::size_t n = u.size();
  if (n < 3) throw std::invalid_argument("second_difference: need at least 3 points");
  std::vector<double> out(n);
  const BoundaryRow l = apply_boundary(bc.left, true, dx);
  const BoundaryRow r = apply_boundary(bc.right, false, dx);
  out[0] = -(l.diag * u[0] + l.off * u[1] + l.rhs);
  out[n - 1] = -(r.diag * u[n - 1] + r.off * u[n - 2] + r.rhs);
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) / (dx * dx);
  return out;
}

Mass mass_integrals(const FlowState& state, double p) {
  const Power pw(p);
  std::vector<double> up(state.u.size());
  for (std::size_t i = 0; i < up.size(); ++i) up[i] = pw(state.u[i]);
  return {trapezoid(up, state.grid.dx), trapezoid(state.u, state.grid.dx)};
}

std::pair<FlowState, StepReport> step_implicit(const FlowState& state, const SolverConfig& cfg) {
  cfg.validate();
  if (state.u.size() != state.grid.size) throw std::invalid_argument("step_implicit: state/grid size mismatch");
  if (max_of(state.u) < cfg.extinction_threshold) throw std::invalid_argument("step_implicit: state is extinct");
  return step_with(state, cfg, cfg.dtau);
}

Trajectory evolve(const FlowState& state, double tau_end, const SolverConfig& cfg, int snapshot_every,
                  const StepObserver& observer) {
  cfg.validate();
  if (snapshot_every < 1) throw std::invalid_argument("evolve: snapshot_every must be >= 1");
  if (tau_end < state.tau) throw std::invalid_argument("evolve: tau_end precedes the initial time");
  if (state.u.size() != state.grid.size) throw std::invalid_argument("evolve: state/grid size mismatch");
  Trajectory traj;
  if (tau_end == state.tau) return traj;

  // Advances to t_target, splitting failed steps in halves.
  auto advance = [&](auto&& self, const FlowState& from, double t_target, int depth) -> FlowState {
    try {
      auto [next, rep] = step_with(from, cfg, t_target - from.tau);
      next.tau = t_target;
      traj.steps.push_back({t_target, t_target - from.tau, rep});
      if (observer) observer(from, next, rep);
      return std::move(next);
    } catch (const StepFailure&) {
      if (depth >= cfg.max_halvings) throw;
    }
    ++traj.halvings;
    const double mid = from.tau + 0.5 * (t_target - from.tau);
    const FlowState half = self(self, from, mid, depth + 1);
    return self(self, half, t_target, depth + 1);
  };

  const double tau0 = state.tau;
  const auto total = static_cast<long>(std::ceil((tau_end - tau0) / cfg.dtau - 1e-9));
  FlowState cur = state;
  for (long k = 1; k <= total; ++k) {
    const double target = k == total ? tau_end : tau0 + static_cast<double>(k) * cfg.dtau;
    cur = advance(advance, cur, target, 0);
    const double mx = max_of(cur.u);
    if (mx < cfg.extinction_threshold) {
      traj.extinct = true;
      traj.extinction_tau = cur.tau;
      traj.snapshots.push_back(std::move(cur));
      return traj;
    }
    if (k % snapshot_every == 0 || k == total) traj.snapshots.push_back(cur);
  }
  return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  CsvWriter csv(os, {"tau", "x", "u"});
  for (const auto& s : traj.snapshots) {
    for (std::size_t i = 0; i < s.u.size(); ++i) csv.row({s.tau, s.grid.x(i), s.u[i]});
  }
}

nlohmann::json trajectory_manifest(const Trajectory& traj, const SolverConfig& cfg) {
  auto num = [](double v) {
    if (!std::isfinite(v)) throw NumericalFailure("io", "refusing to emit a non-finite value");
    return v;
  };
  nlohmann::json j;
  j["solver"] = {{"dtau", num(cfg.dtau)},
                 {"p", num(cfg.p)},
                 {"newton_tol", num(cfg.newton_tol)},
                 {"newton_max_iter", cfg.newton_max_iter},
                 {"extinction_threshold", num(cfg.extinction_threshold)}};
  if (!traj.snapshots.empty()) {
    const auto& g = traj.snapshots.front().grid;
    j["grid"] = {{"x_min", num(g.x_min)}, {"dx", num(g.dx)}, {"size", g.size}};
  }
  j["extinct"] = traj.extinct;
  j["extinction_tau"] = traj.extinction_tau ? nlohmann::json(num(*traj.extinction_tau)) : nlohmann::json();
  j["halvings"] = traj.halvings;
  j["snapshot_tau"] = nlohmann::json::array();
  for (const auto& s : traj.snapshots) j["snapshot_tau"].push_back(num(s.tau));
  auto& steps = j["steps"];
  for (const char* key : {"tau", "dtau", "newton_iters", "final_residual", "mass_p", "mass_1", "max_u"}) {
    steps[key] = nlohmann::json::array();
  }
  for (const auto& r : traj.steps) {
    steps["tau"].push_back(num(r.tau));
    steps["dtau"].push_back(num(r.dtau));
    steps["newton_iters"].push_back(r.report.newton_iters);
    steps["final_residual"].push_back(num(r.report.final_residual));
    steps["mass_p"].push_back(num(r.report.mass_p));
    steps["mass_1"].push_back(num(r.report.mass_1));
    steps["max_u"].push_back(num(r.report.max_u));
  }
  return j;
}

}  // namespace yamabe
