#include "fwkit/mpp.hpp"

#include "fwkit/mechanics.hpp"
#include "fwkit/quadrature.hpp"

#include <cmath>
#include <limits>

namespace fwkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double minimum_energy(const DriftField& field, double q1, double q2) {
  const double lo = std::min(q1, q2);
  const double hi = std::max(q1, q2);
  constexpr int kScan = 4096;
  double best = kInf;
  double best_q = lo;
  for (int i = 0; i <= kScan; ++i) {
    const double q = lo + (hi - lo) * i / kScan;
    const double b = field.drift1(q);
    if (b * b < best) {
      best = b * b;
      best_q = q;
    }
  }
  // Golden-section polish of min b^2 around the best scan cell.
  double a = std::max(lo, best_q - (hi - lo) / kScan);
  double c = std::min(hi, best_q + (hi - lo) / kScan);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  auto f = [&](double q) {
    const double b = field.drift1(q);
    return b * b;
  };
  for (int it = 0; it < 100 && c - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
    const double x1 = c - g * (c - a);
    const double x2 = a + g * (c - a);
    if (f(x1) < f(x2)) {
      c = x2;
    } else {
      a = x1;
    }
  }
  best = std::min({best, f(a), f(c), f(0.5 * (a + c))});
  return -best / 4.0;
}

double travel_time(const DriftField& field, double q1, double q2, double E) {
  auto integrand = [&](double q) {
    const double b = field.drift1(q);
    const double disc = b * b + 4.0 * E;
    return disc > 0.0 ? 1.0 / std::sqrt(disc) : kInf;
  };
  const double lo = std::min(q1, q2);
  const double hi = std::max(q1, q2);
  return adaptive_simpson(integrand, lo, hi, 1e-13 * (hi - lo), 40);
}

MppResult mpp_shoot_1d(const DriftField& field, double q1, double q2, double T, int path_steps) {
  if (field.dim() != 1) throw ConfigError("mpp_shoot_1d: field must be one-dimensional");
  if (q1 == q2) throw ConfigError("mpp_shoot_1d: endpoints must differ");
  if (!(T > 0.0)) throw ConfigError("mpp_shoot_1d: T must be positive");
  if (path_steps < 2) throw ConfigError("mpp_shoot_1d: path_steps must be at least 2");

  const double e_min = minimum_energy(field, q1, q2);
  const double scale = std::max(1.0, std::abs(e_min));
  auto tau = [&](double E) { return travel_time(field, q1, q2, E); };

  double e_hi = std::max(1.0, e_min + 1.0);
  for (int it = 0; tau(e_hi) > T; ++it) {
    if (it > 200) throw NumericalError("mpp_shoot_1d: no monotone path (upper bracket)");
    e_hi = e_min + 2.0 * (e_hi - e_min);
  }
  double e_lo = kInf;
  for (double delta = 1e-2 * scale; delta >= 1e-15 * scale; delta /= 10.0) {
    const double e = e_min + delta;
    if (e >= e_hi) continue;
    if (tau(e) >= T) {
      e_lo = e;
      break;
    }
  }
  if (!std::isfinite(e_lo)) {
    throw NumericalError("mpp_shoot_1d: no monotone path (T exceeds the largest travel time)");
  }

  double E = 0.5 * (e_lo + e_hi);
  for (int it = 0; it < 400; ++it) {
    E = 0.5 * (e_lo + e_hi);
    const double t = tau(E);
    if (std::abs(t - T) <= 1e-8 * T) break;
    if (t > T) {
      e_lo = E;
    } else {
      e_hi = E;
    }
    if (e_hi - e_lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(E))) {
      break;
    }
  }
  if (std::abs(tau(E) - T) > 1e-8 * T) {
    throw NumericalError("mpp_shoot_1d: travel-time tolerance not met");
  }

  const double dir = q2 > q1 ? 1.0 : -1.0;
  auto speed = [&](double q) {
    const double b = field.drift1(q);
    return dir * std::sqrt(std::max(0.0, b * b + 4.0 * E));
  };

  MppResult res;
  res.method = MppMethod::shooting;
  res.energy = E;
  // S = int p dq - E T with p = (qdot - b) / 2 along the path.
  const double p_dq = adaptive_simpson(
      [&](double q) { return 0.5 * (speed(q) - field.drift1(q)); }, q1, q2,
      1e-12 * std::abs(q2 - q1), 40);
  res.action = p_dq - E * T;

  const double dt = T / path_steps;
  double q = q1;
  auto push = [&](double t) {
    const double qd = speed(q);
    const double b = field.drift1(q);
    const double p = 0.5 * (qd - b);
    const double h = p * p + b * p;
    res.path.times.push_back(t);
    res.path.states.push_back(make_vec({q}));
    res.path.momentum.push_back(make_vec({p}));
    res.path.energy.push_back(h);
    res.max_energy_deviation = std::max(res.max_energy_deviation, std::abs(h - E));
  };
  push(0.0);
  for (int k = 0; k < path_steps; ++k) {
    const double k1 = speed(q);
    const double k2 = speed(q + 0.5 * dt * k1);
    const double k3 = speed(q + 0.5 * dt * k2);
    const double k4 = speed(q + dt * k3);
    q += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(q)) throw BlowUpError("mpp_shoot_1d: path became non-finite", k + 1);
    push((k + 1) * dt);
  }
  return res;
}

double discrete_action(const DriftField& field, const std::vector<Vec>& nodes, double h) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const Vec v = (nodes[k + 1] - nodes[k]) / h;
    s += (v - field.drift(nodes[k])).squaredNorm() + (v - field.drift(nodes[k + 1])).squaredNorm();
  }
  return s * h / 8.0;
}

std::vector<Vec> discrete_action_gradient(const DriftField& field, const std::vector<Vec>& nodes,
                                          double h) {
  const std::size_t n = nodes.size();
  std::vector<Vec> drift(n), rl(n - 1), rr(n - 1);
  std::vector<Mat> jac(n);
  for (std::size_t k = 0; k < n; ++k) {
    drift[k] = field.drift(nodes[k]);
    jac[k] = field.jacobian(nodes[k]);
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Vec v = (nodes[k + 1] - nodes[k]) / h;
    rl[k] = v - drift[k];
    rr[k] = v - drift[k + 1];
  }
  // Interval k contributes (h/8)(|rl_k|^2 + |rr_k|^2).
  std::vector<Vec> g(n, Vec::Zero(nodes.front().size()));
  for (std::size_t j = 1; j + 1 < n; ++j) {
    g[j] = 0.25 * (-rl[j] - h * jac[j].transpose() * rl[j] - rr[j]) +
           0.25 * (rl[j - 1] + rr[j - 1] - h * jac[j].transpose() * rr[j - 1]);
  }
  return g;
}

MppResult mpp_minimize(const DriftField& field, const Vec& q1, const Vec& q2, double T, int knots,
                       const MinimizeOptions& opts) {
  if (knots < 8) throw ConfigError("mpp_minimize: at least 8 interior knots required");
  if (!(T > 0.0)) throw ConfigError("mpp_minimize: T must be positive");
  if (q1.size() != field.dim() || q2.size() != field.dim()) {
    throw ConfigError("mpp_minimize: endpoint dimension mismatch");
  }
  const int n = knots + 2;
  const int dim = field.dim();
  const double h = T / (knots + 1);

  std::vector<Vec> x(n);
  for (int k = 0; k < n; ++k) {
    const double s = static_cast<double>(k) / (n - 1);
    x[k] = (1.0 - s) * q1 + s * q2;
  }

  // Descent direction: gradient preconditioned by the Hessian of the free
  // kinetic part, (1 / 2h) tridiag(-1, 2, -1), solved per component.
  auto precondition = [&](const std::vector<Vec>& g) {
    std::vector<Vec> d(n, Vec::Zero(dim));
    const int m = knots;
    std::vector<double> cp(m), dp(m);
    for (int c = 0; c < dim; ++c) {
      const double diag = 2.0 / (2.0 * h);
      const double off = -1.0 / (2.0 * h);
      cp[0] = off / diag;
      dp[0] = g[1](c) / diag;
      for (int i = 1; i < m; ++i) {
        const double den = diag - off * cp[i - 1];
        cp[i] = off / den;
        dp[i] = (g[i + 1](c) - off * dp[i - 1]) / den;
      }
      // Back substitution; d = -P^{-1} g.
      double y = dp[m - 1];
      d[m](c) = -y;
      for (int i = m - 2; i >= 0; --i) {
        y = dp[i] - cp[i] * y;
        d[i + 1](c) = -y;
      }
    }
    return d;
  };

  MppResult res;
  res.method = MppMethod::minimization;
  double s_cur = discrete_action(field, x, h);
  std::vector<Vec> g = discrete_action_gradient(field, x, h);
  auto sup = [](const std::vector<Vec>& v) {
    double m = 0.0;
    for (const auto& e : v) m = std::max(m, e.lpNorm<Eigen::Infinity>());
    return m;
  };
  res.converged = false;
  long long it = 0;
  for (; it < opts.max_iter; ++it) {
    if (sup(g) <= opts.grad_tol) {
      res.converged = true;
      break;
    }
    const std::vector<Vec> d = precondition(g);
    double slope = 0.0;
    for (int k = 1; k + 1 < n; ++k) slope += g[k].dot(d[k]);
    if (!(slope < 0.0)) break;
    double step = 1.0;
    std::vector<Vec> trial = x;
    double s_trial = s_cur;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int k = 1; k + 1 < n; ++k) trial[k] = x[k] + step * d[k];
      s_trial = discrete_action(field, trial, h);
      if (std::isfinite(s_trial) && s_trial <= s_cur + opts.armijo_c * step * slope) {
        accepted = true;
        break;
      }
      step *= opts.shrink;
    }
    if (!accepted) break;
    x.swap(trial);
    s_cur = s_trial;
    g = discrete_action_gradient(field, x, h);
  }
  res.iterations = it;
  res.gradient_norm = sup(g);
  if (!res.converged && res.gradient_norm <= opts.grad_tol) res.converged = true;

  res.action = s_cur;
  // H on each interval from p = (v - b(mid)) / 2 at the interval midpoint.
  std::vector<double> hs;
  for (int k = 0; k + 1 < n; ++k) {
    const Vec mid = 0.5 * (x[k] + x[k + 1]);
    const Vec v = (x[k + 1] - x[k]) / h;
    const Vec b = field.drift(mid);
    const Vec p = 0.5 * (v - b);
    hs.push_back(p.squaredNorm() + b.dot(p));
  }
  double mean = 0.0;
  for (double e : hs) mean += e;
  mean /= static_cast<double>(hs.size());
  res.energy = mean;
  for (double e : hs) res.max_energy_deviation = std::max(res.max_energy_deviation, std::abs(e - mean));

  for (int k = 0; k < n; ++k) {
    const Vec v = k == 0        ? (x[1] - x[0]) / h
                  : k == n - 1 ? (x[n - 1] - x[n - 2]) / h
                               : (x[k + 1] - x[k - 1]) / (2.0 * h);
    const Vec p = 0.5 * (v - field.drift(x[k]));
    res.path.times.push_back(k * h);
    res.path.states.push_back(x[k]);
    res.path.momentum.push_back(p);
    res.path.energy.push_back(hamiltonian(field, x[k], p));
  }
  return res;
}

double uphill_action_1d(const DriftField& field, double a, double c) {
  if (field.dim() != 1) throw ConfigError("uphill_action_1d: field must be one-dimensional");
  if (std::abs(field.drift1(a)) > 1e-8 || !(field.derivative1(a) < 0.0)) {
    throw ConfigError("uphill_action_1d: a is not a stable zero of b");
  }
  if (a == c) return 0.0;
  // No zero of b strictly inside (a, c).
  constexpr int kScan = 4096;
  const double lo = std::min(a, c), hi = std::max(a, c);
  const double margin = 1e-6 * (hi - lo);
  double prev = field.drift1(lo + margin);
  for (int i = 1; i <= kScan; ++i) {
    const double cur = field.drift1(lo + margin + (hi - lo - 2.0 * margin) * i / kScan);
    if (prev == 0.0 || (prev < 0.0) != (cur < 0.0)) {
      throw ConfigError("uphill_action_1d: b vanishes strictly between a and c");
    }
    prev = cur;
  }
  return adaptive_simpson([&](double x) { return -field.drift1(x); }, a, c, 1e-10);
}

}  // namespace fwkit
