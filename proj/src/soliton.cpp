#include "yamabe/soliton.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <string>

#include "yamabe/io.hpp"

namespace yamabe {

namespace {

using State = std::array<double, 4>;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

// Accepted integration node: abscissa, state, and state derivative.
struct Node {
  double s;
  State y;
  State dy;
  long mark = -1;  ///< grid index when the node sits exactly on a grid point
};

// Grid points the integrator must land on: origin + k dx.
struct Marks {
  double origin = 0.0;
  double dx = 0.0;  ///< <= 0 disables landing
};

State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
  State out = y;
  for (const auto& [coef, k] : terms) {
    for (std::size_t i = 0; i < 4; ++i) out[i] += h * coef * (*k)[i];
  }
  return out;
}

bool finite(const State& y) {
  return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

/**
 * Adaptive DOPRI5 over nodes. Error control covers components 0 and 1 only;
 * components 2 and 3 are running quadratures. `stop` is checked after each
 * accepted step and returns true to finish.
 */
template <class Rhs, class Stop>
void integrate(std::vector<Node>& nodes, Rhs&& rhs, Stop&& stop, double h0, const ShootingOptions& opts,
               const char* stage, const Marks& marks = {}) {
  double h_free = h0;
  std::size_t guard = 0;
  while (true) {
    if (++guard > 50'000'000) throw NumericalFailure(stage, "step budget exhausted");
    const Node& cur = nodes.back();
    double h = std::min(h_free, opts.max_step);
    long mark = -1;
    double s_next = cur.s + h;
    if (marks.dx > 0.0) {
      auto k = static_cast<long>(std::floor((cur.s - marks.origin) / marks.dx)) + 1;
      if (marks.origin + static_cast<double>(k) * marks.dx <= cur.s) ++k;
      const double s_k = marks.origin + static_cast<double>(k) * marks.dx;
      if (s_k <= s_next) {
        s_next = s_k;
        h = s_k - cur.s;
        mark = k;
      }
    }
    const State& y = cur.y;
    const State& k1 = cur.dy;
    const State k2 = rhs(axpy(y, h, {{a21, &k1}}));
    const State k3 = rhs(axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    const State k4 = rhs(axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State k5 = rhs(axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State k6 = rhs(axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State yn = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const State k7 = rhs(yn);
    if (!finite(yn) || !finite(k7)) {
      if (h < 1e-12) throw NumericalFailure(stage, "non-finite state during integration");
      h_free = 0.25 * h;
      continue;
    }
    double err = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = 1e-300 + opts.rtol * std::max(std::abs(y[i]), std::abs(yn[i]));
      err = std::max(err, std::abs(ei) / sc);
    }
    if (err <= 1.0) {
      nodes.push_back({s_next, yn, k7, mark});
      const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h_free = mark >= 0 ? std::max(h_free, h * fac) : h * fac;
      if (stop(nodes.back())) return;
    } else {
      h_free = h * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
      if (h_free < 1e-14) throw NumericalFailure(stage, "step size underflow");
    }
  }
}

// Hermite interpolation of component i between nodes a and b.
double node_interp(const Node& a, const Node& b, std::size_t i, double s) {
  const double h = b.s - a.s;
  return hermite(a.y[i], a.dy[i], b.y[i], b.dy[i], h, (s - a.s) / h);
}

std::size_t locate(const std::vector<Node>& nodes, double s) {
  auto it = std::upper_bound(nodes.begin(), nodes.end(), s,
                             [](double value, const Node& n) { return value < n.s; });
  std::size_t j = static_cast<std::size_t>(it - nodes.begin());
  if (j == 0) return 0;
  return std::min(j - 1, nodes.size() - 2);
}

// Index and local coordinate for Hermite evaluation on a uniform grid.
std::pair<std::size_t, double> cell(const UniformGrid& g, double z) {
  double r = (z - g.x_min) / g.dx;
  auto i = static_cast<std::ptrdiff_t>(std::floor(r));
  i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(g.size) - 2);
  return {static_cast<std::size_t>(i), r - static_cast<double>(i)};
}

}  // namespace

double steady_state(double c, int n, double x) {
  if (!(c > 0.0)) throw std::invalid_argument("steady_state: c must be positive");
  const double g = 2.0 / (n - 2);
  const double k = std::sqrt(4.0 * n / (n - 2));
  // k c e^{gx} / (1 + c^2 e^{2gx}) = k / (2 cosh(g x + ln c))
  const double base = k / (2.0 * std::cosh(g * x + std::log(c)));
  return std::pow(base, 0.5 * (n - 2));
}

double steady_state_xx(double c, int n, double x) {
  // v = A sech^m(y), y = g x + ln c, m = (n-2)/2, g = 1/m:
  // v'' = g^2 A m sech^m (m tanh^2 - sech^2).
  const double m = 0.5 * (n - 2);
  const double g = 1.0 / m;
  const double y = g * x + std::log(c);
  const double sech = 1.0 / std::cosh(y);
  const double th = std::tanh(y);
  const double v = steady_state(c, n, x);
  return g * g * m * v * (m * th * th - sech * sech);
}

double barenblatt(double c, double p, double x) {
  if (!(c > 0.0)) throw std::invalid_argument("barenblatt: c must be positive");
  // (1 + c e^{-(p-1)x})^{-1/(p-1)}, evaluated through log1p for large |x|.
  const double e = std::log(c) - (p - 1.0) * x;
  const double lg = e > 30.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
  return std::exp(-lg / (p - 1.0));
}

double barenblatt_x(double c, double p, double x) {
  const double v = barenblatt(c, p, x);
  const double q = c * std::exp(-(p - 1.0) * x);
  return v * q / (1.0 + q);
}

double barenblatt_normalizing_c(double p) { return std::pow(2.0, p - 1.0) - 1.0; }

SolitonProfile shoot_profile(double lambda, double p, double x_min, double x_max, double dx,
                             const ShootingOptions& opts) {
  (void)gamma_of_lambda(lambda, p);  // rejects the oscillatory regime
  if (!(lambda >= 1.0)) throw std::invalid_argument("shoot_profile: lambda must be >= 1");
  if (!(opts.eps_seed > 0.0 && opts.eps_seed < 1e-2)) {
    throw std::invalid_argument("shoot_profile: eps_seed must lie in (0, 1e-2)");
  }
  if (!(x_max > 0.0 && x_min < 0.0)) throw std::invalid_argument("shoot_profile: need x_min < 0 < x_max");

  const Power pw(p);
  const double gamma = tail_exponent(lambda, p);

  // Phase 1: (v, v', int v^p, int v).
  auto rhs_v = [&](const State& y) -> State {
    const double v = y[0], vx = y[1];
    return {vx, -lambda * pw.derivative(v) * vx - pw(v) + v, pw(v), v};
  };
  const double eps = opts.eps_seed;
  auto run_head = [&](const Marks& marks) {
    std::vector<Node> nodes;
    const State y0{eps, eps, pw(eps) / p, eps};
    nodes.push_back({0.0, y0, rhs_v(y0)});
    integrate(
        nodes, rhs_v,
        [&](const Node& n) {
          if (n.y[1] < 0.0 && n.y[0] < 0.5) {
            throw NumericalFailure("soliton/shoot", "collapse: v' < 0 while v < 1/2 at s=" + format_double(n.s));
          }
          if (n.y[0] > 1.0 + 1e-10) throw NumericalFailure("soliton/shoot", "blow-up: v > 1 before crossing 1/2");
          return n.y[0] >= 0.5;
        },
        1e-3, opts, "soliton/shoot", marks);
    return nodes;
  };

  // First pass locates v = 1/2 by Newton on the Hermite cubic of the last step.
  double s_half = 0.0;
  {
    const std::vector<Node> probe = run_head({});
    const Node& na = probe[probe.size() - 2];
    const Node& nb = probe.back();
    s_half = na.s + (nb.s - na.s) * (0.5 - na.y[0]) / (nb.y[0] - na.y[0]);
    for (int it = 0; it < 50; ++it) {
      const double hstep = nb.s - na.s;
      const double t = (s_half - na.s) / hstep;
      const double f = hermite(na.y[0], na.dy[0], nb.y[0], nb.dy[0], hstep, t) - 0.5;
      const double fp = hermite_slope(na.y[0], na.dy[0], nb.y[0], nb.dy[0], hstep, t);
      const double ds = f / fp;
      s_half -= ds;
      if (std::abs(ds) < 1e-15) break;
    }
  }
  // Second pass lands on every output grid point so sampled values carry no interpolation error.
  const Marks marks{s_half + x_min, dx};
  const std::vector<Node> head = run_head(marks);
  const Node& na = head[head.size() - 2];
  const Node& nb = head.back();

  // Phase 2: (w, w', int (1 - v^p), int w) from the switch point.
  auto rhs_w = [&](const State& y) -> State {
    const double w = y[0], wx = y[1];
    const double omp = one_minus_pow_of_complement(w, p);
    return {wx, -lambda * pw.derivative(1.0 - w) * wx + w - omp, omp, w};
  };
  const double s_sw = nb.s;
  const double ip_sw = nb.y[2];
  const double i1_sw = nb.y[3];
  std::vector<Node> tail;
  {
    const State y0{1.0 - nb.y[0], -nb.y[1], 0.0, 0.0};
    tail.push_back({s_sw, y0, rhs_w(y0)});
  }
  const double s_target = s_half + x_max + 1.0;
  integrate(
      tail, rhs_w,
      [&](const Node& n) {
        if (n.y[0] < -1e-12) throw NumericalFailure("soliton/shoot", "blow-up: v exceeded 1 at s=" + format_double(n.s));
        return n.s >= s_target || n.y[0] < 1e-280;
      },
      nb.s - na.s, opts, "soliton/shoot", marks);

  const Node& last = tail.back();
  const double w_end = last.y[0];
  const double rate_end = w_end > 0.0 && last.y[1] < 0.0 ? -last.y[1] / w_end : gamma;
  // Tail integrals accumulated from the far end so that small values keep
  // their relative precision; per step, the integral of the Hermite cubic.
  std::vector<double> tail_ip(tail.size()), tail_i1(tail.size());
  auto dd = [&](const Node& n, std::size_t c) { return c == 2 ? pw.derivative(1.0 - n.y[0]) * n.y[1] : n.y[1]; };
  tail_ip.back() = one_minus_pow_of_complement(w_end, p) / rate_end;
  tail_i1.back() = w_end / rate_end;
  for (std::size_t k = tail.size() - 1; k-- > 0;) {
    const Node& a = tail[k];
    const Node& b = tail[k + 1];
    const double h = b.s - a.s;
    auto step = [&](std::size_t c) { return 0.5 * h * (a.dy[c] + b.dy[c]) + h * h * (dd(a, c) - dd(b, c)) / 12.0; };
    tail_ip[k] = tail_ip[k + 1] + step(2);
    tail_i1[k] = tail_i1[k + 1] + step(3);
  }
  const double tp_total = tail_ip.front();
  const double t1_total = tail_i1.front();

  SolitonProfile prof;
  prof.lambda = lambda;
  prof.p = p;
  prof.grid = UniformGrid::spanning(x_min, x_max, dx);
  const std::size_t n = prof.grid.size;
  prof.v.resize(n);
  prof.v_x.resize(n);
  prof.deficit.resize(n);
  prof.head_p.resize(n);
  prof.head_1.resize(n);
  prof.tail_p.resize(n);
  prof.tail_1.resize(n);

  std::vector<const Node*> on_head(n, nullptr), on_tail(n, nullptr);
  for (const Node& nd : head) {
    if (nd.mark >= 0 && static_cast<std::size_t>(nd.mark) < n) on_head[nd.mark] = &nd;
  }
  for (const Node& nd : tail) {
    if (nd.mark >= 0 && static_cast<std::size_t>(nd.mark) < n) on_tail[nd.mark] = &nd;
  }
  auto sample = [](const std::vector<Node>& nodes, const Node* hit, std::size_t c, double s) {
    if (hit) return hit->y[c];
    const std::size_t j = locate(nodes, s);
    return node_interp(nodes[j], nodes[j + 1], c, s);
  };

  for (std::size_t i = 0; i < n; ++i) {
    const double s = marks.origin + static_cast<double>(i) * dx;
    double v, vx, w, hp, h1, tp, t1;
    if (s <= s_sw) {
      if (s < 0.0) {
        v = eps * std::exp(s);
        vx = v;
        hp = pw(v) / p;
        h1 = v;
      } else {
        v = sample(head, on_head[i], 0, s);
        vx = sample(head, on_head[i], 1, s);
        hp = sample(head, on_head[i], 2, s);
        h1 = sample(head, on_head[i], 3, s);
      }
      w = 1.0 - v;
      tp = (s_sw - s) - (ip_sw - hp) + tp_total;
      t1 = (s_sw - s) - (i1_sw - h1) + t1_total;
    } else if (s <= last.s) {
      w = sample(tail, on_tail[i], 0, s);
      vx = -sample(tail, on_tail[i], 1, s);
      const double fp = sample(tail, on_tail[i], 2, s);
      const double f1 = sample(tail, on_tail[i], 3, s);
      v = 1.0 - w;
      if (on_tail[i]) {
        const auto k = static_cast<std::size_t>(on_tail[i] - tail.data());
        tp = tail_ip[k];
        t1 = tail_i1[k];
      } else {
        tp = tp_total - fp;
        t1 = t1_total - f1;
      }
      hp = ip_sw + (s - s_sw) - fp;
      h1 = i1_sw + (s - s_sw) - f1;
    } else {
      w = w_end * std::exp(-rate_end * (s - last.s));
      vx = rate_end * w;
      v = 1.0 - w;
      tp = one_minus_pow_of_complement(w, p) / rate_end;
      t1 = w / rate_end;
      hp = ip_sw + (s - s_sw) - (tp_total - tp);
      h1 = i1_sw + (s - s_sw) - (t1_total - t1);
    }
    prof.v[i] = v;
    prof.v_x[i] = vx;
    prof.deficit[i] = w;
    prof.head_p[i] = hp;
    prof.head_1[i] = h1;
    prof.tail_p[i] = tp;
    prof.tail_1[i] = t1;
  }

  const double z_sw = s_sw - s_half;
  prof.plateau_offset_p = ip_sw - z_sw - tp_total;
  prof.plateau_offset_1 = i1_sw - z_sw - t1_total;
  prof.left_amplitude = prof.v.front() * std::exp(-prof.grid.x_min);
  prof.decay.gamma = gamma;

  // Amplitude with the analytic exponent over the tail window.
  {
    const TailFit tf = [&] {
      try {
        return fit_tail(prof);
      } catch (const std::invalid_argument&) {
        return TailFit{};
      }
    }();
    if (tf.samples > 0) {
      double acc = 0.0;
      std::size_t cnt = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double x = prof.grid.x(i);
        if (x >= tf.x_lo && x <= tf.x_hi) {
          acc += std::log(prof.deficit[i]) + gamma * x;
          ++cnt;
        }
      }
      prof.decay.c_tail = std::exp(acc / static_cast<double>(cnt));
    } else {
      prof.decay.c_tail = prof.deficit.back() * std::exp(gamma * prof.grid.x_max());
    }
  }

  if (prof.v.front() >= 1e-4) {
    throw NumericalFailure("soliton/shoot", "v(x_min) = " + format_double(prof.v.front()) +
                                                " >= 1e-4; decrease x_min");
  }
  if (prof.deficit.back() >= 1e-3) {
    throw NumericalFailure("soliton/shoot", "1 - v(x_max) = " + format_double(prof.deficit.back()) +
                                                " >= 1e-3: no convergence to 1; increase x_max");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(prof.v_x[i] > 0.0) && prof.deficit[i] > 0.0) {
      throw NumericalFailure("soliton/shoot", "profile not monotone at x=" + format_double(prof.grid.x(i)));
    }
  }
  return prof;
}

double SolitonProfile::value(double z) const {
  if (z < grid.x_min) return left_amplitude * std::exp(z);
  if (z > grid.x_max()) return 1.0 - deficit_at(z);
  const auto [i, t] = cell(grid, z);
  if (deficit[i] < 0.25) return 1.0 - deficit_at(z);
  return hermite(v[i], v_x[i], v[i + 1], v_x[i + 1], grid.dx, t);
}

double SolitonProfile::slope(double z) const {
  if (z < grid.x_min) return left_amplitude * std::exp(z);
  if (z > grid.x_max()) return decay.gamma * deficit_at(z);
  const auto [i, t] = cell(grid, z);
  // Interpolate v_x with the Hermite cubic of v' itself (slopes from v'' via the ODE).
  const Power pw(p);
  auto vxx = [&](std::size_t k) { return -lambda * pw.derivative(v[k]) * v_x[k] - pw(v[k]) + v[k]; };
  return hermite(v_x[i], vxx(i), v_x[i + 1], vxx(i + 1), grid.dx, t);
}

double SolitonProfile::deficit_at(double z) const {
  if (z < grid.x_min) return 1.0 - left_amplitude * std::exp(z);
  if (z > grid.x_max()) return deficit.back() * std::exp(-decay.gamma * (z - grid.x_max()));
  const auto [i, t] = cell(grid, z);
  return hermite(deficit[i], -v_x[i], deficit[i + 1], -v_x[i + 1], grid.dx, t);
}

double SolitonProfile::head_integral(double z, bool power) const {
  const auto& arr = power ? head_p : head_1;
  if (z < grid.x_min) {
    const double vz = left_amplitude * std::exp(z);
    return power ? std::pow(vz, p) / p : vz;
  }
  if (z > grid.x_max()) {
    return z + (power ? plateau_offset_p : plateau_offset_1) + tail_integral(z, power);
  }
  const auto [i, t] = cell(grid, z);
  const Power pw(power ? p : 1.0);
  return hermite(arr[i], pw(v[i]), arr[i + 1], pw(v[i + 1]), grid.dx, t);
}

double SolitonProfile::tail_integral(double z, bool power) const {
  const auto& arr = power ? tail_p : tail_1;
  if (z > grid.x_max()) return arr.back() * std::exp(-decay.gamma * (z - grid.x_max()));
  if (z < grid.x_min) {
    return arr.front() + (grid.x_min - z) - (head_integral(grid.x_min, power) - head_integral(z, power));
  }
  const auto [i, t] = cell(grid, z);
  auto integrand = [&](std::size_t k) {
    return power ? one_minus_pow_of_complement(deficit[k], p) : deficit[k];
  };
  return hermite(arr[i], -integrand(i), arr[i + 1], -integrand(i + 1), grid.dx, t);
}

TailFit fit_tail_samples(const std::vector<double>& x, const std::vector<double>& deficit) {
  if (x.size() < 10) throw std::invalid_argument("fit_tail: window has fewer than 10 samples");
  const ExpFit ef = fit_exponential(x, deficit);
  TailFit tf;
  tf.x_lo = x.front();
  tf.x_hi = x.back();
  tf.gamma_fit = -ef.rate;
  tf.c_fit = ef.prefactor;
  tf.residual = ef.max_log_residual;
  tf.samples = x.size();
  return tf;
}

TailFit fit_tail(const SolitonProfile& profile, double window_fraction) {
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
    throw std::invalid_argument("fit_tail: window_fraction must lie in (0, 1]");
  }
  std::vector<double> xs, ws;
  for (std::size_t i = 0; i < profile.grid.size; ++i) {
    const double w = profile.deficit[i];
    if (w > 1e-8 && w < 1e-2 && profile.grid.x(i) > 0.0) {
      xs.push_back(profile.grid.x(i));
      ws.push_back(w);
    }
  }
  if (xs.empty()) throw std::invalid_argument("fit_tail: no samples with 1 - v in (1e-8, 1e-2)");
  const double x_cut = xs.back() - window_fraction * (xs.back() - xs.front());
  std::vector<double> wx, ww;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] >= x_cut) {
      wx.push_back(xs[i]);
      ww.push_back(ws[i]);
    }
  }
  return fit_tail_samples(wx, ww);
}

double check_derivative_tail(const SolitonProfile& profile, double window_fraction) {
  const TailFit tf = fit_tail(profile, window_fraction);
  const double g = profile.decay.gamma;
  const double c = profile.decay.c_tail;
  double worst = 0.0;
  for (std::size_t i = 0; i < profile.grid.size; ++i) {
    const double x = profile.grid.x(i);
    if (x < tf.x_lo || x > tf.x_hi) continue;
    const double model = c * g * std::exp(-g * x);
    worst = std::max(worst, std::abs(profile.v_x[i] - model) / model);
  }
  return worst;
}

double traveling_wave_eval(const SolitonProfile& profile, double x, double tau, double h,
                           Orientation orientation) {
  const double z = orientation == Orientation::left ? x - profile.lambda * tau + h
                                                    : -x - profile.lambda * tau + h;
  return profile.value(z);
}

std::vector<double> ode_residual(const SolitonProfile& profile) {
  const Power pw(profile.p);
  const auto& g = profile.grid;
  std::vector<double> r;
  if (g.size < 3) return r;
  r.reserve(g.size - 2);
  const double inv = 1.0 / (g.dx * g.dx);
  for (std::size_t i = 1; i + 1 < g.size; ++i) {
    const double v = profile.v[i];
    // Second difference in the deficit avoids cancellation near the plateau.
    const double vxx = v < 0.5 ? (profile.v[i + 1] - 2.0 * v + profile.v[i - 1]) * inv
                               : -(profile.deficit[i + 1] - 2.0 * profile.deficit[i] + profile.deficit[i - 1]) * inv;
    const double vpv = v < 0.5 ? pw(v) - v
                               : profile.deficit[i] - one_minus_pow_of_complement(profile.deficit[i], profile.p);
    r.push_back(std::abs(vxx + profile.lambda * pw.derivative(v) * profile.v_x[i] + vpv));
  }
  return r;
}

void write_profile_csv(std::ostream& os, const SolitonProfile& profile) {
  CsvWriter csv(os, {"x", "v", "v_x"});
  for (std::size_t i = 0; i < profile.grid.size; ++i) csv.row({profile.grid.x(i), profile.v[i], profile.v_x[i]});
}

}  // namespace yamabe
