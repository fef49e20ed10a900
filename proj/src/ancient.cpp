#include "yamabe/ancient.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <stdexcept>

#include "yamabe/io.hpp"

namespace yamabe {

namespace {

double left_arg(const SupersolutionSpec& s, double x, double tau) {
  return x - s.params.lambda * tau + s.params.h;
}

double right_arg(const SupersolutionSpec& s, double x, double tau) {
  return -x - s.params.lambda_prime * tau + s.params.h_prime;
}

FlowState sample_state(const UniformGrid& grid, double tau, const std::function<double(double)>& f) {
  FlowState s;
  s.tau = tau;
  s.grid = grid;
  s.u.resize(grid.size);
  for (std::size_t i = 0; i < grid.size; ++i) s.u[i] = f(grid.x(i));
  return s;
}

std::vector<double> tau_samples(double lo, double hi, int samples) {
  if (!(hi > lo) || samples < 2) throw std::invalid_argument("tau window must satisfy lo < hi with >= 2 samples");
  std::vector<double> t(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) t[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (samples - 1);
  return t;
}

}  // namespace

SupersolutionSpec make_supersolution(const ModelParams& params, const ProfileResolution& res) {
  params.validate();
  const double p = params.p();
  SupersolutionSpec s;
  s.params = params;
  s.left_profile = shoot_profile(params.lambda, p, res.x_min, res.x_max, res.dx);
  s.right_profile = params.lambda_prime == params.lambda
                        ? s.left_profile
                        : shoot_profile(params.lambda_prime, p, res.x_min, res.x_max, res.dx);
  s.decay_left = s.left_profile.decay;
  s.decay_right = s.right_profile.decay;
  const double d = merge_rate_d(s.decay_left.gamma, s.decay_right.gamma, p);
  s.decay_left.d = d;
  s.decay_right.d = d;
  return s;
}

SupersolutionSpec with_shifts(const SupersolutionSpec& spec, double h, double h_prime) {
  SupersolutionSpec out = spec;
  out.params.h = h;
  out.params.h_prime = h_prime;
  return out;
}

double supersolution_eval(const SupersolutionSpec& spec, double x, double tau) {
  return std::min(spec.left_profile.value(left_arg(spec, x, tau)), spec.right_profile.value(right_arg(spec, x, tau)));
}

double left_deficit(const SupersolutionSpec& spec, double x, double tau) {
  return spec.left_profile.deficit_at(left_arg(spec, x, tau));
}

double right_deficit(const SupersolutionSpec& spec, double x, double tau) {
  return spec.right_profile.deficit_at(right_arg(spec, x, tau));
}

double intersection_slope(const SupersolutionSpec& spec) {
  return (spec.decay_left.gamma - spec.decay_right.gamma) / spec.p();
}

IntersectionRecord intersection_numeric(const SupersolutionSpec& spec, double tau) {
  const auto& pr = spec.params;
  // Fronts (v = 1/2) of the two branches.
  double a = pr.lambda * tau - pr.h;
  double b = -pr.lambda_prime * tau + pr.h_prime;
  auto g = [&](double x) {
    const double dl = left_deficit(spec, x, tau), dr = right_deficit(spec, x, tau);
    if (!(dl > 0.0 && dr > 0.0)) {
      throw NumericalFailure("ancient/intersection", "deficit underflow at x=" + format_double(x));
    }
    return std::log(dl) - std::log(dr);
  };
  if (!(a < b) || !(g(a) > 0.0) || !(g(b) < 0.0)) {
    throw NumericalFailure("ancient/intersection",
                           "no sign change between the fronts at tau=" + format_double(tau) + "; fronts have merged");
  }
  for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
    const double c = 0.5 * (a + b);
    (g(c) > 0.0 ? a : b) = c;
  }
  IntersectionRecord r;
  r.tau = tau;
  r.x_numeric = 0.5 * (a + b);
  const double dl = left_deficit(spec, r.x_numeric, tau);
  const double dr = right_deficit(spec, r.x_numeric, tau);
  r.one_minus_value = dl;
  r.value_at_intersection = 1.0 - dl;
  r.root_residual = std::abs(dl - dr);
  const double gl = spec.decay_left.gamma, gr = spec.decay_right.gamma;
  r.x_asymptotic = intersection_slope(spec) * tau +
                   (std::log(spec.decay_left.c_tail / spec.decay_right.c_tail) + pr.h_prime * gr - pr.h * gl) / (gl + gr);
  return r;
}

double fit_merge_constant(const SupersolutionSpec& spec, double tau_lo, double tau_hi, int samples) {
  double acc = 0.0;
  const auto taus = tau_samples(tau_lo, tau_hi, samples);
  for (double t : taus) acc += std::log(intersection_numeric(spec, t).one_minus_value) - spec.d() * t;
  return std::exp(acc / static_cast<double>(taus.size()));
}

IntersectionFit fit_intersection_law(const SupersolutionSpec& spec, double tau_lo, double tau_hi, int samples) {
  const auto taus = tau_samples(tau_lo, tau_hi, samples);
  std::vector<double> xs, lv;
  for (double t : taus) {
    const auto r = intersection_numeric(spec, t);
    xs.push_back(r.x_numeric);
    lv.push_back(std::log(r.one_minus_value));
  }
  return {fit_line(taus, xs), fit_line(taus, lv)};
}

SupersolutionMass supersolution_mass(const SupersolutionSpec& spec, double tau) {
  const auto& pr = spec.params;
  const double x = intersection_numeric(spec, tau).x_numeric;
  const double zl = left_arg(spec, x, tau), zr = right_arg(spec, x, tau);
  const double base = -(pr.lambda + pr.lambda_prime) * tau + pr.h + pr.h_prime;
  const auto& L = spec.left_profile;
  const auto& R = spec.right_profile;
  SupersolutionMass m;
  m.linear_p = base + L.plateau_offset_p + R.plateau_offset_p;
  m.linear_1 = base + L.plateau_offset_1 + R.plateau_offset_1;
  m.tail_p = L.tail_integral(zl, true) + R.tail_integral(zr, true);
  m.tail_1 = L.tail_integral(zl, false) + R.tail_integral(zr, false);
  return m;
}

MassResidual supersolution_mass_residual(const SupersolutionSpec& spec, double tau, double dtau_probe,
                                         double merge_constant) {
  if (!(dtau_probe > 0.0)) throw std::invalid_argument("mass residual: dtau_probe must be positive");
  const SupersolutionMass lo = supersolution_mass(spec, tau - dtau_probe);
  const SupersolutionMass hi = supersolution_mass(spec, tau + dtau_probe);
  const SupersolutionMass mid = supersolution_mass(spec, tau);
  // d/dtau of the linear part is -(l + l') and int v^p - int v has linear part -(l + l').
  const double dtail = (hi.tail_p - lo.tail_p) / (2.0 * dtau_probe);
  MassResidual r;
  r.correction = (spec.decay_left.gamma + spec.decay_right.gamma) * merge_constant * std::exp(spec.d() * tau);
  r.residual = dtail - (mid.tail_p - mid.tail_1) - r.correction;
  const auto& L = spec.left_profile;
  const auto& R = spec.right_profile;
  r.offset_defect = (L.plateau_offset_1 - L.plateau_offset_p - spec.params.lambda) +
                    (R.plateau_offset_1 - R.plateau_offset_p - spec.params.lambda_prime);
  return r;
}

double default_half_width(const SupersolutionSpec& spec, double m) {
  double L = std::max(30.0, 2.0 * m * std::max(spec.params.lambda, spec.params.lambda_prime));
  while (std::max(supersolution_eval(spec, -L, -m), supersolution_eval(spec, L, -m)) >= 1e-8) L += 5.0;
  return L;
}

FlowState build_initial_data(const SupersolutionSpec& spec, double m, const UniformGrid& grid) {
  if (!(m > 0.0)) throw std::invalid_argument("build_initial_data: m must be positive");
  FlowState s = sample_state(grid, -m, [&](double x) { return supersolution_eval(spec, x, -m); });
  if (s.u.front() >= 1e-8 || s.u.back() >= 1e-8) {
    throw std::invalid_argument("build_initial_data: boundary values " + format_double(s.u.front()) + ", " +
                                format_double(s.u.back()) + " are not below 1e-8; widen the grid");
  }
  return s;
}

AncientRun run_um(const SupersolutionSpec& spec, double m, double tau_end, const AncientOptions& opts) {
  if (!(tau_end > -m)) throw std::invalid_argument("run_um: tau_end must exceed -m");
  const double L = opts.half_width > 0.0 ? opts.half_width : default_half_width(spec, m);
  const UniformGrid grid = UniformGrid::spanning(-L, L, opts.dx);
  const FlowState u0 = build_initial_data(spec, m, grid);
  const double p = spec.p();
  const Power pw(p);

  SolverConfig cfg = opts.solver;
  cfg.p = p;
  cfg.bc = {};

  AncientRun run;
  run.m = m;
  auto observe = [&](const FlowState& before, const FlowState& after, const StepReport&) {
    double bar = -1.0, mono = -1.0;
    for (std::size_t i = 0; i < after.u.size(); ++i) {
      bar = std::max(bar, after.u[i] - supersolution_eval(spec, after.grid.x(i), after.tau));
      mono = std::max(mono, after.u[i] - before.u[i]);
    }
    run.max_barrier_violation = std::max(run.max_barrier_violation, bar);
    run.max_monotonicity_violation = std::max(run.max_monotonicity_violation, mono);
  };

  // Single waves evolved by the same scheme; their minimum is a discrete supersolution.
  auto companion = [&](bool left) {
    SolverConfig c = cfg;
    c.extinction_threshold = 0.0;
    if (left) {
      c.bc.right = {BoundaryKind::plateau, spec.decay_left.gamma};
    } else {
      c.bc.left = {BoundaryKind::plateau, spec.decay_right.gamma};
    }
    const FlowState s0 = sample_state(grid, -m, [&](double x) {
      return left ? spec.left_profile.value(left_arg(spec, x, -m)) : spec.right_profile.value(right_arg(spec, x, -m));
    });
    return evolve(s0, tau_end, c, opts.snapshot_every);
  };
  std::future<Trajectory> fl, fr;
  if (opts.companions) {
    fl = std::async(std::launch::async, companion, true);
    fr = std::async(std::launch::async, companion, false);
  }
  Trajectory traj = evolve(u0, tau_end, cfg, opts.snapshot_every, observe);
  std::optional<Trajectory> tl, tr;
  if (opts.companions) {
    tl = fl.get();
    tr = fr.get();
  }

  run.steps = std::move(traj.steps);
  run.halvings = traj.halvings;
  run.extinction_time = traj.extinction_tau;
  run.snapshots.reserve(traj.snapshots.size() + 1);
  run.snapshots.push_back(u0);
  for (auto& s : traj.snapshots) run.snapshots.push_back(std::move(s));

  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    const FlowState& s = run.snapshots[k];
    AncientSnapshot d;
    d.tau = s.tau;
    std::vector<double> gap(s.u.size()), gap_num(s.u.size());
    d.barrier_violation = -1.0;
    const FlowState* cl = nullptr;
    const FlowState* cr = nullptr;
    if (opts.companions && k > 0 && k - 1 < tl->snapshots.size() && k - 1 < tr->snapshots.size()) {
      cl = &tl->snapshots[k - 1];
      cr = &tr->snapshots[k - 1];
      if (cl->tau != s.tau || cr->tau != s.tau) throw NumericalFailure("ancient/run", "companion snapshots out of step");
    }
    for (std::size_t i = 0; i < s.u.size(); ++i) {
      const double v = supersolution_eval(spec, s.grid.x(i), s.tau);
      const double up = pw(s.u[i]);
      gap[i] = pw(v) - up;
      d.barrier_violation = std::max(d.barrier_violation, s.u[i] - v);
      if (k == 0) {
        gap_num[i] = 0.0;
      } else if (cl) {
        const double vn = std::min(cl->u[i], cr->u[i]);
        gap_num[i] = pw(vn) - up;
        d.companion_error = std::max(d.companion_error, std::abs(vn - v));
      } else {
        gap_num[i] = gap[i];
      }
    }
    d.q_analytic = trapezoid(gap, s.grid.dx);
    d.q = k == 0 ? 0.0 : trapezoid(gap_num, s.grid.dx);
    const auto it = std::max_element(s.u.begin(), s.u.end());
    d.max_u = *it;
    d.argmax_x = s.grid.x(static_cast<std::size_t>(it - s.u.begin()));
    const Mass ms = mass_integrals(s, p);
    d.mass_p = ms.mass_p;
    d.mass_1 = ms.mass_1;
    try {
      const auto rec = intersection_numeric(spec, s.tau);
      d.x_intersection_numeric = rec.x_numeric;
      d.x_intersection_asymptotic = rec.x_asymptotic;
    } catch (const NumericalFailure&) {
      d.x_intersection_numeric = d.x_intersection_asymptotic = std::nan("");
    }
    run.series.push_back(d);
  }
  return run;
}

DecayFit fit_decay_rate(std::span<const double> tau, std::span<const double> q) {
  if (tau.size() != q.size() || tau.size() < 2) throw std::invalid_argument("fit_decay_rate: need >= 2 paired samples");
  for (double v : q) {
    if (!(v > 0.0)) throw std::invalid_argument("fit_decay_rate: nonpositive Q in the fit window");
  }
  const ExpFit e = fit_exponential(tau, q);
  return {e.rate, e.prefactor, e.max_log_residual, tau.size()};
}

DecayFit fit_decay_rate(const AncientRun& run, double tau_lo, double tau_hi) {
  std::vector<double> t, q;
  for (const auto& s : run.series) {
    if (s.tau >= tau_lo && s.tau <= tau_hi) {
      t.push_back(s.tau);
      q.push_back(s.q);
    }
  }
  return fit_decay_rate(t, q);
}

double envelope_constant(const AncientRun& run, double d, double tau_lo, double tau_hi) {
  double best = 0.0;
  for (const auto& s : run.series) {
    if (s.tau >= tau_lo && s.tau <= tau_hi) best = std::max(best, s.q * std::exp(-d * s.tau));
  }
  return best;
}

MaxBoundFit max_bound_check(const AncientRun& run, const SupersolutionSpec& spec, double tau_lo, double tau_hi) {
  std::vector<double> t, lg;
  MaxBoundFit f;
  f.lower_prefactor = INFINITY;
  for (const auto& s : run.series) {
    if (s.tau < tau_lo || s.tau > tau_hi) continue;
    const double gap = 1.0 - s.max_u;
    if (!(gap > 0.0)) throw NumericalFailure("ancient/max-bound", "max u reached 1 at tau=" + format_double(s.tau));
    t.push_back(s.tau);
    lg.push_back(std::log(gap));
    const double pref = gap * std::exp(-spec.d() * s.tau);
    f.lower_prefactor = std::min(f.lower_prefactor, pref);
    f.upper_prefactor = std::max(f.upper_prefactor, pref);
    f.max_u = std::max(f.max_u, s.max_u);
    f.argmax_offset = std::max(f.argmax_offset, std::abs(s.argmax_x - s.x_intersection_numeric));
  }
  if (t.size() < 2) throw std::invalid_argument("max_bound_check: fewer than 2 snapshots in the window");
  f.slope = fit_line(t, lg).slope;
  f.count = t.size();
  return f;
}

double distinguish_functional(const SupersolutionSpec& a, const SupersolutionSpec& b, double tau) {
  if (a.params.n != b.params.n || a.params.lambda != b.params.lambda ||
      a.params.lambda_prime != b.params.lambda_prime) {
    throw std::invalid_argument("distinguish_functional: both supersolutions need the same n, lambda and lambda'");
  }
  const SupersolutionMass ma = supersolution_mass(a, tau), mb = supersolution_mass(b, tau);
  return std::abs((ma.linear_p - mb.linear_p) + (ma.tail_p - mb.tail_p));
}

void write_run_csv(std::ostream& os, const AncientRun& run) {
  CsvWriter csv(os, {"tau", "Q", "Q_analytic", "max_u", "argmax", "mass_p", "mass_1", "barrier_violation",
                     "x_intersection_numeric", "x_intersection_asymptotic", "companion_error"});
  for (const auto& s : run.series) {
    const double row[] = {s.tau,    s.q,      s.q_analytic,        s.max_u,
                          s.argmax_x, s.mass_p, s.mass_1,            s.barrier_violation,
                          s.x_intersection_numeric, s.x_intersection_asymptotic, s.companion_error};
    csv.row_with_gaps(row);
  }
}

nlohmann::json run_summary(const AncientRun& run, const SupersolutionSpec& spec) {
  nlohmann::json j;
  j["m"] = run.m;
  j["params"] = {{"n", spec.params.n},
                 {"lambda", spec.params.lambda},
                 {"lambda_prime", spec.params.lambda_prime},
                 {"h", spec.params.h},
                 {"h_prime", spec.params.h_prime}};
  j["d"] = spec.d();
  j["snapshots"] = run.series.size();
  j["steps"] = run.steps.size();
  j["halvings"] = run.halvings;
  j["max_barrier_violation"] = run.max_barrier_violation;
  j["max_monotonicity_violation"] = run.max_monotonicity_violation;
  j["extinction_time"] = run.extinction_time ? nlohmann::json(*run.extinction_time) : nlohmann::json();
  if (!run.snapshots.empty()) {
    const auto& g = run.snapshots.front().grid;
    j["grid"] = {{"x_min", g.x_min}, {"dx", g.dx}, {"size", g.size}};
  }
  return j;
}

}  // namespace yamabe
