#include "fwkit/hje.hpp"

#include "fwkit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fwkit {

Vec GridFn::point(std::size_t flat) const {
  if (dim() == 1) return make_vec({axes[0].coord(static_cast<int>(flat))});
  const int n1 = axes[1].n;
  const int i = static_cast<int>(flat / n1);
  const int j = static_cast<int>(flat % n1);
  return make_vec({axes[0].coord(i), axes[1].coord(j)});
}

double GridFn::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (mask.empty() || mask[k]) m = std::min(m, values[k]);
  }
  return m;
}

GridFn make_grid(std::vector<Axis> axes) {
  if (axes.empty() || axes.size() > 2) throw ConfigError("grid: dimension must be 1 or 2");
  std::size_t total = 1;
  for (const Axis& a : axes) {
    if (a.n < 16) throw ConfigError("grid: at least 16 points per axis");
    if (!(a.max > a.min) || !std::isfinite(a.min) || !std::isfinite(a.max)) {
      throw ConfigError("grid: axis needs finite min < max");
    }
    total *= static_cast<std::size_t>(a.n);
  }
  GridFn g;
  g.axes = std::move(axes);
  g.values.assign(total, 0.0);
  return g;
}

double sup_distance(const GridFn& a, const GridFn& b) {
  if (a.values.size() != b.values.size()) throw ConfigError("sup_distance: grid mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    m = std::max(m, std::abs(a.values[k] - b.values[k]));
  }
  return m;
}

namespace {

// Quadratic extrapolation of the outermost layer from the three layers inside
// it. Linear extrapolation discards the curvature that enters through inflow
// boundaries.
double extrap(double a, double b, double c) { return 3.0 * a - 3.0 * b + c; }

void extrapolate_boundary(GridFn& g) {
  auto& v = g.values;
  if (g.dim() == 1) {
    const int n = g.axes[0].n;
    v[0] = extrap(v[1], v[2], v[3]);
    v[n - 1] = extrap(v[n - 2], v[n - 3], v[n - 4]);
    return;
  }
  const int n0 = g.axes[0].n, n1 = g.axes[1].n;
  for (int i = 1; i < n0 - 1; ++i) {
    v[g.index(i, 0)] = extrap(v[g.index(i, 1)], v[g.index(i, 2)], v[g.index(i, 3)]);
    v[g.index(i, n1 - 1)] =
        extrap(v[g.index(i, n1 - 2)], v[g.index(i, n1 - 3)], v[g.index(i, n1 - 4)]);
  }
  for (int j = 0; j < n1; ++j) {
    v[g.index(0, j)] = extrap(v[g.index(1, j)], v[g.index(2, j)], v[g.index(3, j)]);
    v[g.index(n0 - 1, j)] =
        extrap(v[g.index(n0 - 2, j)], v[g.index(n0 - 3, j)], v[g.index(n0 - 4, j)]);
  }
}

}  // namespace

HjeResult hje_evolve(const DriftField& field, const GridFn& u0, double T, double eps_viscous,
                     int snapshots) {
  if (u0.dim() != field.dim()) throw ConfigError("hje_evolve: grid and field dimensions differ");
  if (!(T > 0.0)) throw ConfigError("hje_evolve: T must be positive");
  if (!(eps_viscous >= 0.0)) throw ConfigError("hje_evolve: eps_viscous must be non-negative");
  if (snapshots < 1) throw ConfigError("hje_evolve: at least one snapshot");
  for (double v : u0.values) {
    if (!std::isfinite(v)) throw ConfigError("hje_evolve: initial values must be finite");
  }

  const int dim = u0.dim();
  const std::size_t total = u0.size();
  std::vector<double> dx(dim);
  for (int a = 0; a < dim; ++a) dx[a] = u0.axes[a].dx();

  // Drift and divergence are static; tabulate once.
  std::vector<Vec> drift(total);
  std::vector<double> div(total, 0.0);
  for (std::size_t k = 0; k < total; ++k) {
    const Vec x = u0.point(k);
    drift[k] = field.drift(x);
    if (eps_viscous > 0.0) div[k] = field.divergence(x);
  }

  const int n0 = u0.axes[0].n;
  const int n1 = dim == 2 ? u0.axes[1].n : 1;
  auto interior = [&](int i, int j) {
    return i > 0 && i < n0 - 1 && (dim == 1 || (j > 0 && j < n1 - 1));
  };
  const std::size_t stride[2] = {dim == 2 ? static_cast<std::size_t>(n1) : 1u, 1u};

  HjeResult res;
  std::vector<double> targets;
  if (snapshots == 1) {
    targets.push_back(T);
  } else {
    for (int s = 0; s < snapshots; ++s) targets.push_back(T * s / (snapshots - 1));
  }

  GridFn u = u0;
  GridFn next = u0;
  double t = 0.0;
  std::size_t target = 0;
  auto take_snapshots = [&] {
    while (target < targets.size() && targets[target] <= t) {
      res.times.push_back(targets[target]);
      res.snapshots.push_back(u);
      ++target;
    }
  };
  take_snapshots();

  std::vector<double> pbar(total * dim, 0.0), jump(total * dim, 0.0);
  // One-sided differences of v and the per-axis global dissipation speed.
  auto differences = [&](const std::vector<double>& v, std::vector<double>& alpha) {
    alpha.assign(dim, 0.0);
    for (int i = 0; i < n0; ++i) {
      for (int j = 0; j < n1; ++j) {
        if (!interior(i, j)) continue;
        const std::size_t k = u.index(i, j);
        for (int a = 0; a < dim; ++a) {
          const double pm = (v[k] - v[k - stride[a]]) / dx[a];
          const double pp = (v[k + stride[a]] - v[k]) / dx[a];
          pbar[k * dim + a] = 0.5 * (pm + pp);
          jump[k * dim + a] = pp - pm;
          alpha[a] = std::max(alpha[a], std::abs(2.0 * pbar[k * dim + a] + drift[k](a)));
        }
      }
    }
  };
  // out = v + dt L(v) on the interior, using the current differences.
  auto euler = [&](const std::vector<double>& v, const std::vector<double>& alpha, double dt,
                   std::vector<double>& out) {
    for (int i = 0; i < n0; ++i) {
      for (int j = 0; j < n1; ++j) {
        if (!interior(i, j)) continue;
        const std::size_t k = u.index(i, j);
        double h = 0.0;
        double lap = 0.0;
        for (int a = 0; a < dim; ++a) {
          const double p = pbar[k * dim + a];
          h += p * p + drift[k](a) * p - 0.5 * alpha[a] * jump[k * dim + a];
          lap += jump[k * dim + a] / dx[a];
        }
        double rhs = -h;
        if (eps_viscous > 0.0) rhs += eps_viscous * (lap + div[k]);
        out[k] = v[k] + dt * rhs;
      }
    }
  };

  GridFn stage = u0;
  std::vector<double> alpha, alpha2;
  while (target < targets.size()) {
    differences(u.values, alpha);
    double rate = 0.0;
    for (int a = 0; a < dim; ++a) rate += alpha[a] / dx[a];
    double dt = std::numeric_limits<double>::infinity();
    if (rate > 0.0) dt = 0.4 / rate;
    if (eps_viscous > 0.0) {
      for (int a = 0; a < dim; ++a) dt = std::min(dt, 0.2 * dx[a] * dx[a] / eps_viscous);
    }
    const double remaining = targets[target] - t;
    if (!std::isfinite(dt)) {
      // No transport and no diffusion: u only changes through H(x, pbar).
      bool still = true;
      for (std::size_t k = 0; k < total && still; ++k) {
        for (int a = 0; a < dim; ++a) {
          if (drift[k](a) != 0.0 || pbar[k * dim + a] != 0.0) still = false;
        }
      }
      if (still) {
        res.degenerate = true;
        t = targets.back();
        take_snapshots();
        break;
      }
      dt = remaining;
    }
    if (dt >= remaining) dt = remaining;

    // Two-stage strong-stability-preserving Runge-Kutta (Heun).
    euler(u.values, alpha, dt, stage.values);
    extrapolate_boundary(stage);
    differences(stage.values, alpha2);
    euler(stage.values, alpha2, dt, next.values);
    for (std::size_t k = 0; k < total; ++k) next.values[k] = 0.5 * (u.values[k] + next.values[k]);
    extrapolate_boundary(next);
    std::swap(u.values, next.values);
    ++res.steps;
    for (double v : u.values) {
      if (!std::isfinite(v)) throw BlowUpError("hje_evolve: non-finite value", res.steps);
    }
    res.dt_history.push_back(dt);
    res.alpha_history.push_back(alpha);
    t = (dt == remaining) ? targets[target] : t + dt;
    take_snapshots();
  }
  return res;
}

GridFn stationary_rate_1d(const DriftField& field, const Axis& axis, double x_ref) {
  if (field.dim() != 1 || field.domain() != Domain::line) {
    throw ConfigError("stationary_rate_1d: field must live on the line");
  }
  GridFn g = make_grid({axis});
  const int n = axis.n;
  std::vector<double> b(n);
  for (int i = 0; i < n; ++i) b[i] = field.drift1(axis.coord(i));
  g.values[0] = 0.0;
  for (int i = 1; i < n; ++i) {
    const double h = axis.coord(i) - axis.coord(i - 1);
    g.values[i] = g.values[i - 1] - 0.5 * h * (b[i - 1] + b[i]);
  }
  // Anchor at x_ref (linear interpolation), then shift to min 0.
  const double pos = std::clamp((x_ref - axis.min) / axis.dx(), 0.0, n - 1.0);
  const int i0 = std::min(static_cast<int>(pos), n - 2);
  const double w = pos - i0;
  const double ref = (1.0 - w) * g.values[i0] + w * g.values[i0 + 1];
  for (double& v : g.values) v -= ref;
  const double m = g.min_value();
  for (double& v : g.values) v -= m;
  return g;
}

GridFn characteristic_solution(const DriftField& field, const Axis& axis, double E, double x0,
                               Branch branch, double t) {
  if (field.dim() != 1) throw ConfigError("characteristic_solution: field must be one-dimensional");
  GridFn g = make_grid({axis});
  g.mask.assign(g.size(), true);

  auto momentum = [&](double x) {
    const double b = field.drift1(x);
    const double disc = b * b + 4.0 * E;
    if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
    const double r = std::sqrt(disc);
    const double sb = b >= 0.0 ? 1.0 : -1.0;
    switch (branch) {
      case Branch::plus: return 0.5 * (-b + r);
      case Branch::minus: return 0.5 * (-b - r);
      case Branch::trivial: return 0.5 * (-b + sb * r);
      case Branch::reversed: return 0.5 * (-b - sb * r);
    }
    return 0.0;
  };

  // Real on the whole segment between x0 and x? Checked on a fine scan.
  constexpr int kSub = 64;
  const int n = axis.n;
  for (int i = 0; i < n; ++i) {
    const double x = axis.coord(i);
    const double lo = std::min(x, x0), hi = std::max(x, x0);
    bool ok = true;
    for (int s = 0; s <= kSub && ok; ++s) {
      if (std::isnan(momentum(lo + (hi - lo) * s / kSub))) ok = false;
    }
    g.mask[i] = ok;
  }
  for (int i = 0; i < n; ++i) {
    if (!g.mask[i]) {
      g.values[i] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double x = axis.coord(i);
    g.values[i] = adaptive_simpson(momentum, x0, x, 1e-11) - E * t;
  }
  return g;
}

ModalTrace track_minimum(const std::vector<GridFn>& snapshots, const std::vector<double>& times) {
  if (snapshots.size() != times.size()) throw ConfigError("track_minimum: length mismatch");
  ModalTrace tr;
  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    const GridFn& g = snapshots[s];
    std::size_t best = 0;
    for (std::size_t k = 1; k < g.size(); ++k) {
      if (g.values[k] < g.values[best]) best = k;
    }
    const int dim = g.dim();
    int idx[2] = {static_cast<int>(best), 0};
    if (dim == 2) {
      idx[0] = static_cast<int>(best / g.axes[1].n);
      idx[1] = static_cast<int>(best % g.axes[1].n);
    }
    bool on_boundary = false;
    for (int a = 0; a < dim; ++a) {
      if (idx[a] == 0 || idx[a] == g.axes[a].n - 1) on_boundary = true;
    }
    if (on_boundary) {
      tr.truncated = true;
      break;
    }
    Vec x = g.point(best);
    double umin = g.values[best];
    double curv = 0.0;
    for (int a = 0; a < dim; ++a) {
      const std::size_t st = dim == 2 && a == 0 ? static_cast<std::size_t>(g.axes[1].n) : 1u;
      const double um = g.values[best - st];
      const double u0 = g.values[best];
      const double up = g.values[best + st];
      const double den = um - 2.0 * u0 + up;
      const double h = g.axes[a].dx();
      if (den > 0.0) {
        const double delta = 0.5 * (um - up) / den;
        x(a) += delta * h;
        umin -= 0.25 * (um - up) * delta;
      }
      if (a == 0) curv = den / (h * h);
    }
    tr.times.push_back(times[s]);
    tr.argmin.push_back(x);
    tr.min_value.push_back(umin);
    if (dim == 1) tr.curvature.push_back(curv);
  }
  return tr;
}

}  // namespace fwkit
