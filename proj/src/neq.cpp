#include "fwkit/neq.hpp"

#include "fwkit/parallel.hpp"
#include "fwkit/rng.hpp"
#include "fwkit/simulate.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace fwkit {

std::string to_string(PiSource s) { return s == PiSource::analytic ? "analytic" : "sampled"; }

PiSource pi_source_from_string(const std::string& s) {
  if (s == "analytic") return PiSource::analytic;
  if (s == "sampled" || s == "simulate") return PiSource::sampled;
  throw ConfigError("pi_source: expected \"analytic\" or \"sampled\", got \"" + s + "\"");
}

Vec eps_score(const DriftField& field, const Vec& x) {
  if (!field.has_decomposition()) {
    throw ConfigError("field " + to_string(field.kind()) + ": no closed-form stationary law");
  }
  return -field.grad_potential(x);
}

namespace {

void require_stationary(const DriftField& field) {
  if (!field.has_decomposition()) {
    throw ConfigError("field " + to_string(field.kind()) + ": no closed-form stationary law");
  }
  if (field.kind() == FieldKind::ou && !(field.spec().b_coef > 0.0)) {
    throw ConfigError("field.b_coef: stationary law needs b_coef > 0");
  }
}

// Gaussian pi = N(mean, eps A^{-1}) when U is quadratic with Hessian A > 0.
bool gaussian_law(const DriftField& field, Vec& mean, Mat& chol_cov_unit) {
  const int d = field.dim();
  Mat A(d, d);
  Vec g(d);
  switch (field.kind()) {
    case FieldKind::ou:
      A(0, 0) = field.spec().b_coef;
      g(0) = 0.0;
      break;
    case FieldKind::rot_ou:
      A = Mat::Identity(2, 2);
      g = Vec::Zero(2);
      break;
    case FieldKind::decomposed2d: {
      const auto& c = field.spec().potential;
      for (std::size_t i = 0; i < c.size(); ++i) {
        for (std::size_t j = 0; j < c[i].size(); ++j) {
          if (i + j > 2 && c[i][j] != 0.0) return false;
        }
      }
      auto at = [&](std::size_t i, std::size_t j) {
        return i < c.size() && j < c[i].size() ? c[i][j] : 0.0;
      };
      A(0, 0) = 2.0 * at(2, 0);
      A(1, 1) = 2.0 * at(0, 2);
      A(0, 1) = A(1, 0) = at(1, 1);
      g(0) = at(1, 0);
      g(1) = at(0, 1);
      break;
    }
    default: return false;
  }
  Eigen::LLT<Mat> llt(A);
  if (llt.info() != Eigen::Success) {
    throw ConfigError("field.U: quadratic potential is not positive definite");
  }
  mean = -llt.solve(g);
  // Cov / eps = A^{-1} = L^{-T} L^{-1}; x = mean + sqrt(eps) L^{-T} z.
  Mat Linv = llt.matrixL().solve(Mat::Identity(d, d));
  chol_cov_unit = Linv.transpose();
  return true;
}

double ep_integrand(const DriftField& field, const Vec& x, double eps) {
  return (field.drift(x) - eps_score(field, x)).squaredNorm() / eps;
}

}  // namespace

EpEstimate entropy_production(const DriftField& field, double eps, PiSource source, long long N,
                              std::uint64_t seed, const EpOptions& opts) {
  require_stationary(field);
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("sim.eps: must be positive");
  if (N < 2) throw ConfigError("sim.N: need at least 2 samples");
  EpEstimate est;
  est.eps = eps;
  est.method = source;
  est.samples = N;
  const int d = field.dim();

  if (source == PiSource::analytic) {
    Vec mean;
    Mat S;
    if (!gaussian_law(field, mean, S)) {
      throw ConfigError("pi_source: analytic sampling needs a quadratic potential; use \"sampled\"");
    }
    const double s = std::sqrt(eps);
    std::vector<double> vals(static_cast<std::size_t>(N));
    parallel_for(vals.size(), [&](std::size_t m) {
      const CounterRng rng(seed, m);
      double z0, z1;
      rng.normal_pair(0, z0, z1);
      Vec z(d);
      z(0) = z0;
      if (d > 1) z(1) = z1;
      vals[m] = ep_integrand(field, mean + s * (S * z), eps);
    });
    double sum = 0.0, sq = 0.0;
    for (double v : vals) sum += v;
    est.value = sum / N;
    for (double v : vals) sq += (v - est.value) * (v - est.value);
    est.std_error = std::sqrt(sq / (N - 1) / N);
    return est;
  }

  if (!(opts.dt > 0.0) || opts.thin < 1 || opts.batches < 2) {
    throw ConfigError("entropy: dt > 0, thin >= 1 and batches >= 2 required");
  }
  const CounterRng rng(seed, 0);
  const double amp = std::sqrt(2.0 * eps * opts.dt);
  Vec x = Vec::Zero(d);
  std::uint64_t k = 0;
  auto step = [&]() {
    const Vec b = field.drift(x);
    double z0, z1;
    rng.normal_pair(k++, z0, z1);
    x = x + b * opts.dt;
    x(0) += amp * z0;
    if (d > 1) x(1) += amp * z1;
    x = field.wrap(x);
    if (!std::isfinite(x.squaredNorm())) {
      throw BlowUpError("entropy: chain diverged", static_cast<long long>(k));
    }
  };
  const long long burn = step_count(opts.dt, opts.burn_in);
  for (long long i = 0; i < burn; ++i) step();

  const long long batches = std::min<long long>(opts.batches, N);
  const long long per = N / batches;
  std::vector<double> batch_mean;
  double sum = 0.0;
  long long used = 0;
  for (long long b = 0; b < batches; ++b) {
    double acc = 0.0;
    const long long count = b + 1 == batches ? N - used : per;
    for (long long m = 0; m < count; ++m) {
      for (int t = 0; t < opts.thin; ++t) step();
      acc += ep_integrand(field, x, eps);
    }
    used += count;
    sum += acc;
    batch_mean.push_back(acc / count);
  }
  est.value = sum / N;
  double sq = 0.0;
  for (double v : batch_mean) sq += (v - est.value) * (v - est.value);
  est.std_error = std::sqrt(sq / (batches - 1) / batches);
  return est;
}

DriftField time_reversed_drift(const DriftField& field) {
  require_stationary(field);
  FieldSpec s = field.spec();
  switch (s.kind) {
    case FieldKind::ou: break;
    case FieldKind::rot_ou: s.omega = -s.omega; break;
    case FieldKind::decomposed2d: s.gamma = -s.gamma; break;
    default: break;
  }
  return build_field(s);
}

ReversalCheck check_reversal(const DriftField& field, const DriftField& reversed,
                             const std::vector<Vec>& samples) {
  ReversalCheck r;
  for (const Vec& x : samples) {
    const Vec score = eps_score(field, x);
    const Vec b = field.drift(x);
    const Vec bt = reversed.drift(x);
    r.max_sum_residual = std::max(r.max_sum_residual, (b + bt - 2.0 * score).norm());
    r.max_ell_residual = std::max(r.max_ell_residual, ((bt - score) + (b - score)).norm());
  }
  return r;
}

namespace {

template <class F>
Vec rk4_step(F f, const Vec& x, double dt) {
  const Vec k1 = f(x);
  const Vec k2 = f(x + 0.5 * dt * k1);
  const Vec k3 = f(x + 0.5 * dt * k2);
  const Vec k4 = f(x + dt * k3);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vec uphill(const DriftField& field, const Vec& x) {
  return field.grad_potential(x) + field.rotational(x);
}

}  // namespace

MomentumLandscapeReport momentum_landscape_check(const DriftField& field, const Vec& x0, double dt,
                                                 double T) {
  if (!field.has_decomposition()) {
    throw ConfigError("field " + to_string(field.kind()) + " declares no decomposition");
  }
  if (x0.size() != field.dim()) throw ConfigError("x0: dimension does not match the field");
  MomentumLandscapeReport rep;
  rep.degenerate = uphill(field, x0).norm() < 1e-12;
  const long long steps = step_count(dt, T);
  Vec x = x0;
  for (long long k = 0; k <= steps; ++k) {
    const Vec qdot = uphill(field, x);
    const Vec p = 0.5 * (qdot - field.drift(x));
    const Vec grad = field.grad_potential(x);
    const Vec ell = field.rotational(x);
    rep.t.push_back(static_cast<double>(k) * dt);
    rep.x.push_back(x);
    rep.max_H_residual = std::max(rep.max_H_residual, std::abs(hamiltonian(field, x, p)));
    rep.max_p_ell_residual = std::max(rep.max_p_ell_residual, std::abs(p.dot(ell)));
    rep.max_p_grad_residual = std::max(rep.max_p_grad_residual, (p - grad).norm());
    if (k == steps) break;
    x = rk4_step([&](const Vec& y) { return uphill(field, y); }, x, dt);
    if (!std::isfinite(x.squaredNorm())) {
      throw BlowUpError("momentum_landscape_check: uphill flow diverged", k + 1);
    }
  }
  return rep;
}

LyapunovReport lyapunov_check(const DriftField& field, const Vec& x0, double dt, double T) {
  if (!field.has_decomposition()) {
    throw ConfigError("field " + to_string(field.kind()) + " declares no decomposition");
  }
  LyapunovReport rep;
  const long long steps = step_count(dt, T);
  auto run = [&](auto f, double sign) {
    Vec x = x0;
    double u = field.potential(x);
    double worst = 0.0;
    for (long long k = 0; k < steps; ++k) {
      x = rk4_step(f, x, dt);
      if (!std::isfinite(x.squaredNorm())) break;
      const double un = field.potential(x);
      // sign = +1: U should not decrease; -1: U should not increase.
      worst = std::max(worst, sign * (u - un));
      u = un;
    }
    return worst;
  };
  rep.uphill_worst = run([&](const Vec& y) { return uphill(field, y); }, 1.0);
  rep.downhill_worst = run([&](const Vec& y) { return field.drift(y); }, -1.0);
  const double tol = 1e-12 * (1.0 + std::abs(field.potential(x0)));
  rep.monotone = rep.uphill_worst <= tol && rep.downhill_worst <= tol;
  return rep;
}

double lorentz_residual(const DriftField& field, const HamiltonianTrajectory& traj) {
  if (traj.size() < 3) throw ConfigError("lorentz_residual: trajectory needs at least 3 points");
  const double dt = traj.times[1] - traj.times[0];
  const bool periodic = field.domain() == Domain::circle;
  // Offsets q[k+j] - q[k], unwrapped on the circle.
  auto offset = [&](std::size_t k, long j) {
    Vec d = traj.q[k + j] - traj.q[k];
    if (periodic) d(0) -= std::round(d(0));
    return d;
  };
  // Fourth-order central differences where two neighbours exist on each
  // side, the three-point stencil otherwise.
  const bool wide = traj.size() >= 5;
  const std::size_t first = wide ? 2 : 1;
  double worst = 0.0;
  for (std::size_t k = first; k + first < traj.size(); ++k) {
    const Vec& q = traj.q[k];
    Vec qdot, qddot;
    if (wide) {
      const Vec m2 = offset(k, -2), m1 = offset(k, -1), p1 = offset(k, 1), p2 = offset(k, 2);
      qdot = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * dt);
      qddot = (-m2 + 16.0 * m1 + 16.0 * p1 - p2) / (12.0 * dt * dt);
    } else {
      const Vec m1 = offset(k, -1), p1 = offset(k, 1);
      qdot = (p1 - m1) / (2.0 * dt);
      qddot = (p1 + m1) / (dt * dt);
    }
    const Mat J = eval_jacobian(field, q);
    const Mat A = J - J.transpose();
    const Vec r = qddot - A * qdot - J.transpose() * field.drift(q);
    worst = std::max(worst, r.norm());
  }
  return worst;
}

}  // namespace fwkit
