#include "fwkit/mechanics.hpp"

#include "fwkit/quadrature.hpp"

#include <cmath>

namespace fwkit {

namespace {

void check_dims(const DriftField& field, const Vec& a, const Vec& b) {
  if (a.size() != field.dim() || b.size() != field.dim()) {
    throw ConfigError("dimension mismatch: field has dimension " + std::to_string(field.dim()));
  }
}

struct HamiltonRhs {
  Vec qdot;
  Vec pdot;
};

HamiltonRhs hamilton_rhs(const DriftField& field, const Vec& q, const Vec& p) {
  return {2.0 * p + field.drift(q), -field.jacobian(q).transpose() * p};
}

}  // namespace

PathSample HamiltonianTrajectory::as_path() const {
  PathSample path;
  path.times = times;
  path.states = q;
  path.momentum = p;
  path.energy = H;
  return path;
}

double hamiltonian(const DriftField& field, const Vec& q, const Vec& p) {
  check_dims(field, q, p);
  return p.squaredNorm() + field.drift(q).dot(p);
}

double lagrangian(const DriftField& field, const Vec& q, const Vec& qdot) {
  check_dims(field, q, qdot);
  return (qdot - field.drift(q)).squaredNorm() / 4.0;
}

double action(const DriftField& field, const PathSample& path) {
  if (path.size() < 2) throw ConfigError("action: fewer than 2 points");
  const double dt = path.dt();
  const bool periodic = field.domain() == Domain::circle;
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    Vec dx = path.states[k + 1] - path.states[k];
    if (periodic) dx(0) -= std::round(dx(0));
    const Vec v = dx / dt;
    s += 0.5 * dt * ((v - field.drift(path.states[k])).squaredNorm() +
                     (v - field.drift(path.states[k + 1])).squaredNorm()) / 4.0;
  }
  return s;
}

HamiltonianTrajectory integrate_hamiltonian(const DriftField& field, const PhasePoint& start,
                                            double dt, double T) {
  check_dims(field, start.q, start.p);
  if (!start.q.allFinite() || !start.p.allFinite()) throw ConfigError("start: non-finite");
  const long long steps = step_count(dt, T);

  HamiltonianTrajectory tr;
  tr.times.reserve(steps + 1);
  Vec q = start.q;
  Vec p = start.p;
  double u = 0.0;
  const double h0 = hamiltonian(field, q, p);
  const double tol = 1e-6 * std::max(1.0, std::abs(h0));
  auto record = [&](double t) {
    const double h = hamiltonian(field, q, p);
    tr.times.push_back(t);
    tr.q.push_back(q);
    tr.p.push_back(p);
    tr.H.push_back(h);
    tr.u.push_back(u);
    tr.max_energy_drift = std::max(tr.max_energy_drift, std::abs(h - h0));
  };
  record(0.0);

  // u' = p.qdot - H rides along as a third RK4 component.
  auto udot = [&](const Vec& qq, const Vec& pp, const Vec& qd) {
    return pp.dot(qd) - (pp.squaredNorm() + field.drift(qq).dot(pp));
  };
  for (long long k = 0; k < steps; ++k) {
    const auto r1 = hamilton_rhs(field, q, p);
    const double u1 = udot(q, p, r1.qdot);
    const Vec q2 = q + 0.5 * dt * r1.qdot, p2 = p + 0.5 * dt * r1.pdot;
    const auto r2 = hamilton_rhs(field, q2, p2);
    const double u2 = udot(q2, p2, r2.qdot);
    const Vec q3 = q + 0.5 * dt * r2.qdot, p3 = p + 0.5 * dt * r2.pdot;
    const auto r3 = hamilton_rhs(field, q3, p3);
    const double u3 = udot(q3, p3, r3.qdot);
    const Vec q4 = q + dt * r3.qdot, p4 = p + dt * r3.pdot;
    const auto r4 = hamilton_rhs(field, q4, p4);
    const double u4 = udot(q4, p4, r4.qdot);
    q = q + dt / 6.0 * (r1.qdot + 2.0 * r2.qdot + 2.0 * r3.qdot + r4.qdot);
    p = p + dt / 6.0 * (r1.pdot + 2.0 * r2.pdot + 2.0 * r3.pdot + r4.pdot);
    u += dt / 6.0 * (u1 + 2.0 * u2 + 2.0 * u3 + u4);
    if (!q.allFinite() || !p.allFinite()) {
      throw BlowUpError("integrate_hamiltonian: state became non-finite", k + 1);
    }
    record(static_cast<double>(k + 1) * dt);
  }
  tr.energy_warning = tr.max_energy_drift > tol;
  return tr;
}

CharacteristicTrace solve_characteristics(const DriftField& field, double x0, double z0, double u0,
                                          double dt, double T) {
  if (field.dim() != 1) throw ConfigError("solve_characteristics: field must be one-dimensional");
  const long long steps = step_count(dt, T);
  const double y = -(z0 * z0 + z0 * field.drift1(x0));

  struct State {
    double x, z, u;
  };
  auto rhs = [&](const State& s) {
    const double b = field.drift1(s.x);
    const double xd = 2.0 * s.z + b;
    return State{xd, -s.z * field.derivative1(s.x), y + xd * s.z};
  };
  auto axpy = [](const State& s, double a, const State& d) {
    return State{s.x + a * d.x, s.z + a * d.z, s.u + a * d.u};
  };

  CharacteristicTrace tr;
  State s{x0, z0, u0};
  auto record = [&](double t) {
    tr.t.push_back(t);
    tr.x.push_back(s.x);
    tr.z.push_back(s.z);
    tr.u.push_back(s.u);
    tr.y.push_back(y);
  };
  record(0.0);
  for (long long k = 0; k < steps; ++k) {
    const State k1 = rhs(s);
    const State k2 = rhs(axpy(s, 0.5 * dt, k1));
    const State k3 = rhs(axpy(s, 0.5 * dt, k2));
    const State k4 = rhs(axpy(s, dt, k3));
    s.x += dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    s.z += dt / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z);
    s.u += dt / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
    if (!std::isfinite(s.x) || !std::isfinite(s.z) || !std::isfinite(s.u)) {
      throw BlowUpError("solve_characteristics: state became non-finite", k + 1);
    }
    record(static_cast<double>(k + 1) * dt);
  }
  return tr;
}

std::string to_string(EquilibriumType t) {
  switch (t) {
    case EquilibriumType::saddle: return "saddle";
    case EquilibriumType::center: return "center";
    case EquilibriumType::degenerate: return "degenerate";
  }
  return "unknown";
}

EquilibriumScan classify_equilibria(const DriftField& field, double q_lo, double q_hi, int cells) {
  if (field.dim() != 1) throw ConfigError("classify_equilibria: field must be one-dimensional");
  if (!(q_hi > q_lo) || cells < 1) throw ConfigError("classify_equilibria: bad scan range");

  EquilibriumScan scan;
  const double h = (q_hi - q_lo) / cells;
  const double tol = 1e-12 * std::max(1.0, std::max(std::abs(q_lo), std::abs(q_hi)));

  // Zeros of g on the scan grid: exact grid hits plus refined sign changes.
  auto roots_of = [&](auto g) {
    std::vector<double> roots;
    double a = q_lo;
    double ga = g(a);
    if (ga == 0.0) roots.push_back(a);
    for (int i = 1; i <= cells; ++i) {
      const double b = q_lo + i * h;
      const double gb = g(b);
      if (gb == 0.0) {
        roots.push_back(b);
      } else if (ga != 0.0 && ((ga < 0.0) != (gb < 0.0))) {
        const double r = bisect_root(g, a, b, tol);
        if (std::abs(g(r)) > 1e-8 * (1.0 + std::abs(ga) + std::abs(gb))) {
          scan.failures.emplace_back(a, b);
        } else {
          roots.push_back(r);
        }
      }
      a = b;
      ga = gb;
    }
    return roots;
  };

  auto classify = [&](double q, double p, char family) {
    const double db = field.derivative1(q);
    const double d2b = field.second_derivative1(q);
    // Linearisation [[b', 2], [-p b'', -b']] has eigenvalues +-sqrt(b'^2 - 2 p b'').
    const double ev = db * db - 2.0 * p * d2b;
    Equilibrium e;
    e.q = q;
    e.p = p;
    e.family = family;
    e.eigen_sq = ev;
    const double scale = 1e-10 * (1.0 + db * db + std::abs(2.0 * p * d2b));
    e.type = ev > scale ? EquilibriumType::saddle
                        : (ev < -scale ? EquilibriumType::center : EquilibriumType::degenerate);
    return e;
  };

  for (double q : roots_of([&](double x) { return field.drift1(x); })) {
    scan.points.push_back(classify(q, 0.0, 'A'));
  }
  for (double q : roots_of([&](double x) { return field.derivative1(x); })) {
    const double p = -field.drift1(q) / 2.0;
    // A point with b(q*) = 0 and b'(q*) = 0 belongs to both families.
    if (std::abs(p) <= 1e-12) continue;
    scan.points.push_back(classify(q, p, 'B'));
  }
  return scan;
}

std::vector<ContourPoint> phase_contour(const DriftField& field, double E,
                                        const std::vector<double>& q_grid) {
  if (field.dim() != 1) throw ConfigError("phase_contour: field must be one-dimensional");
  std::vector<ContourPoint> out;
  out.reserve(q_grid.size());
  for (double q : q_grid) {
    ContourPoint c;
    c.q = q;
    const double b = field.drift1(q);
    const double disc = b * b + 4.0 * E;
    if (disc >= 0.0) {
      const double r = std::sqrt(disc);
      c.p_plus = (-b + r) / 2.0;
      c.p_minus = (-b - r) / 2.0;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace fwkit
