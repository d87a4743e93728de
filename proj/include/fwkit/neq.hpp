// Nonequilibrium diagnostics: entropy production, the time-reversed drift,
// the momentum/landscape relation along uphill paths and the Lorentz-force
// form of the equations of motion.
#pragma once

#include "fwkit/fields.hpp"
#include "fwkit/mechanics.hpp"

#include <cstdint>
#include <string>

namespace fwkit {

enum class PiSource { analytic, sampled };
std::string to_string(PiSource s);
PiSource pi_source_from_string(const std::string& s);

/// eps grad log pi for fields whose stationary law is exp(-U / eps): this is
/// -grad U, independent of eps. Throws ConfigError for other fields.
Vec eps_score(const DriftField& field, const Vec& x);

struct EpEstimate {
  double eps = 0.0;
  PiSource method = PiSource::analytic;
  long long samples = 0;
  double value = 0.0;
  double std_error = 0.0;
};

struct EpOptions {
  double dt = 1e-2;
  double burn_in = 20.0;
  int thin = 10;
  int batches = 50;
};

/// Monte Carlo mean of (1/eps) |b - eps grad log pi|^2 over N draws from pi.
/// Analytic draws need a Gaussian pi (ou, rot_ou, quadratic decomposed2d);
/// sampled draws come from one long Euler-Maruyama chain.
EpEstimate entropy_production(const DriftField& field, double eps, PiSource source, long long N,
                              std::uint64_t seed, const EpOptions& opts = {});

/// Catalog field for b~ = 2 eps grad log pi - b = -2 grad U - b.
DriftField time_reversed_drift(const DriftField& field);

struct ReversalCheck {
  /// max |b + b~ - 2 eps grad log pi|.
  double max_sum_residual = 0.0;
  /// max |ell~ + ell| with ell = b - eps grad log pi.
  double max_ell_residual = 0.0;
};

ReversalCheck check_reversal(const DriftField& field, const DriftField& reversed,
                             const std::vector<Vec>& samples);

struct MomentumLandscapeReport {
  std::vector<double> t;
  std::vector<Vec> x;
  double max_H_residual = 0.0;
  double max_p_ell_residual = 0.0;
  double max_p_grad_residual = 0.0;
  /// Start point is a rest point of the uphill flow.
  bool degenerate = false;
};

/// RK4 along x' = grad U + ell, forming p = (x' - b) / 2 at every step.
MomentumLandscapeReport momentum_landscape_check(const DriftField& field, const Vec& x0, double dt,
                                                 double T);

struct LyapunovReport {
  /// Largest decrease of U along x' = grad U + ell (<= tolerance passes).
  double uphill_worst = 0.0;
  /// Largest increase of U along x' = b.
  double downhill_worst = 0.0;
  bool monotone = true;
};

LyapunovReport lyapunov_check(const DriftField& field, const Vec& x0, double dt, double T);

/// max over interior samples of |qddot - A qdot - J^T b| with
/// A_ij = d b_i/d q_j - d b_j/d q_i; qdot and qddot by fourth-order central
/// differences (three-point when the trajectory has fewer than 5 samples).
double lorentz_residual(const DriftField& field, const HamiltonianTrajectory& traj);

}  // namespace fwkit
