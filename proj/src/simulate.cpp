#include "fwkit/simulate.hpp"

#include "fwkit/parallel.hpp"
#include "fwkit/rng.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace fwkit {

Region Region::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size()) throw ConfigError("region: box bounds differ in dimension");
  Region r;
  r.kind = Kind::box;
  r.lo = std::move(lo);
  r.hi = std::move(hi);
  return r;
}

Region Region::ball(Vec center, double radius) {
  if (!(radius >= 0.0)) throw ConfigError("region: ball radius must be non-negative");
  Region r;
  r.kind = Kind::ball;
  r.center = std::move(center);
  r.radius = radius;
  return r;
}

bool Region::contains(const Vec& x) const {
  switch (kind) {
    case Kind::all: return true;
    case Kind::box:
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x(i) < lo(i) || x(i) > hi(i)) return false;
      }
      return true;
    case Kind::ball: return (x - center).norm() <= radius;
  }
  return false;
}

std::string Region::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::all: os << "all"; break;
    case Kind::box:
      os << "box";
      for (Eigen::Index i = 0; i < lo.size(); ++i) os << " [" << lo(i) << ", " << hi(i) << "]";
      break;
    case Kind::ball:
      os << "ball center (";
      for (Eigen::Index i = 0; i < center.size(); ++i) os << (i ? ", " : "") << center(i);
      os << ") radius " << radius;
      break;
  }
  return os.str();
}

long long step_count(double dt, double T) {
  if (!(dt > 0.0) || !(T > 0.0) || !std::isfinite(dt) || !std::isfinite(T)) {
    throw ConfigError("dt and T must be positive and finite");
  }
  const double n = std::round(T / dt);
  if (n > 1e8) throw ConfigError("T / dt exceeds 1e8 steps");
  return std::max(1LL, static_cast<long long>(n));
}

namespace {

void check_start(const DriftField& field, const Vec& x0) {
  if (x0.size() != field.dim() || !x0.allFinite()) {
    throw ConfigError("x0: must be finite with dimension " + std::to_string(field.dim()));
  }
}

}  // namespace

PathSample euler_maruyama(const DriftField& field, const Vec& x0, double eps, double dt, double T,
                          std::uint64_t seed, std::uint64_t stream) {
  check_start(field, x0);
  if (eps < 0.0) throw ConfigError("eps: must be non-negative");
  const long long steps = step_count(dt, T);
  const CounterRng rng(seed, stream);
  const double amp = std::sqrt(2.0 * eps * dt);
  const int n = field.dim();

  PathSample path;
  path.times.reserve(steps + 1);
  path.states.reserve(steps + 1);
  Vec x = field.wrap(x0);
  path.times.push_back(0.0);
  path.states.push_back(x);
  for (long long k = 0; k < steps; ++k) {
    Vec next = x + field.drift(x) * dt;
    if (amp > 0.0) {
      double z0, z1;
      rng.normal_pair(static_cast<std::uint64_t>(k), z0, z1);
      next(0) += amp * z0;
      if (n > 1) next(1) += amp * z1;
    }
    x = field.wrap(next);
    if (!x.allFinite()) throw BlowUpError("euler_maruyama: state became non-finite", k + 1);
    path.times.push_back(static_cast<double>(k + 1) * dt);
    path.states.push_back(x);
  }
  return path;
}

Vec euler_maruyama_terminal(const DriftField& field, const Vec& x0, double eps, double dt,
                            long long steps, std::uint64_t seed, std::uint64_t stream) {
  const CounterRng rng(seed, stream);
  const double amp = std::sqrt(2.0 * eps * dt);
  if (field.dim() == 1 && field.domain() == Domain::line) {
    double x = x0(0);
    for (long long k = 0; k < steps; ++k) {
      double z0, z1;
      rng.normal_pair(static_cast<std::uint64_t>(k), z0, z1);
      x = x + field.drift1(x) * dt;
      x += amp * z0;
      if (!std::isfinite(x)) throw BlowUpError("euler_maruyama: state became non-finite", k + 1);
    }
    return make_vec({x});
  }
  const int n = field.dim();
  Vec x = field.wrap(x0);
  for (long long k = 0; k < steps; ++k) {
    Vec next = x + field.drift(x) * dt;
    double z0, z1;
    rng.normal_pair(static_cast<std::uint64_t>(k), z0, z1);
    next(0) += amp * z0;
    if (n > 1) next(1) += amp * z1;
    x = field.wrap(next);
    if (!x.allFinite()) throw BlowUpError("euler_maruyama: state became non-finite", k + 1);
  }
  return x;
}

PathSample ode_solve(const DriftField& field, const Vec& x0, double dt, double T) {
  check_start(field, x0);
  const long long steps = step_count(dt, T);
  PathSample path;
  path.times.reserve(steps + 1);
  path.states.reserve(steps + 1);
  Vec x = field.wrap(x0);
  path.times.push_back(0.0);
  path.states.push_back(x);
  for (long long k = 0; k < steps; ++k) {
    const Vec k1 = field.drift(x);
    const Vec k2 = field.drift(x + 0.5 * dt * k1);
    const Vec k3 = field.drift(x + 0.5 * dt * k2);
    const Vec k4 = field.drift(x + dt * k3);
    x = field.wrap(x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    if (!x.allFinite()) throw BlowUpError("ode_solve: state became non-finite", k + 1);
    path.times.push_back(static_cast<double>(k + 1) * dt);
    path.states.push_back(x);
  }
  return path;
}

RateRow rare_event_probability(const DriftField& field, const Vec& x0, double eps, double dt,
                               double T, const Region& event, long long N, std::uint64_t seed) {
  check_start(field, x0);
  if (N < 1) throw ConfigError("N: must be at least 1");
  if (eps < 0.0) throw ConfigError("eps: must be non-negative");
  const long long steps = step_count(dt, T);

  std::vector<unsigned char> hit(static_cast<std::size_t>(N), 0);
  parallel_for(hit.size(), [&](std::size_t k) {
    const Vec xt = euler_maruyama_terminal(field, x0, eps, dt, steps, seed, k);
    hit[k] = event.contains(xt) ? 1 : 0;
  });

  RateRow row;
  row.eps = eps;
  row.n = N;
  for (unsigned char h : hit) row.hits += h;
  row.p_hat = static_cast<double>(row.hits) / static_cast<double>(N);
  row.std_error = std::sqrt(row.p_hat * (1.0 - row.p_hat) / static_cast<double>(N));
  if (row.hits == 0) {
    row.underflow = true;
    row.rate = std::numeric_limits<double>::quiet_NaN();
  } else {
    row.rate = row.p_hat == 1.0 ? 0.0 : -eps * std::log(row.p_hat);
  }
  return row;
}

RateReport rare_event_sweep(const DriftField& field, const Vec& x0,
                            const std::vector<double>& eps_list, double dt, double T,
                            const Region& event, long long N, std::uint64_t seed,
                            std::optional<double> reference_action) {
  if (eps_list.empty()) throw ConfigError("eps_list: empty");
  for (std::size_t i = 1; i < eps_list.size(); ++i) {
    if (!(eps_list[i] < eps_list[i - 1])) {
      throw ConfigError("eps_list: must be strictly decreasing");
    }
  }
  RateReport rep;
  rep.event = event.describe();
  rep.reference_action = reference_action;
  for (double eps : eps_list) {
    rep.rows.push_back(rare_event_probability(field, x0, eps, dt, T, event, N, seed));
  }
  return rep;
}

PathWeight path_weight_exponent(const DriftField& field, const PathSample& path, double eps) {
  if (path.size() < 2) throw ConfigError("path_weight_exponent: fewer than 2 points");
  if (!(eps > 0.0)) throw ConfigError("path_weight_exponent: eps must be positive");
  const double dt = path.dt();
  const bool periodic = field.domain() == Domain::circle;
  PathWeight w;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const Vec& x = path.states[k];
    Vec dx = path.states[k + 1] - x;
    if (periodic) dx(0) -= std::round(dx(0));
    w.drift_term += (dx / dt - field.drift(x)).squaredNorm() * dt / 4.0;
    w.divergence_term += field.divergence(x) * dt;
  }
  w.divergence_term *= eps / 2.0;
  return w;
}

}  // namespace fwkit
