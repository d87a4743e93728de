// Most probable paths between fixed endpoints in fixed time.
#pragma once

#include "fwkit/fields.hpp"
#include "fwkit/simulate.hpp"

#include <string>

namespace fwkit {

enum class MppMethod { shooting, minimization };

struct MppResult {
  PathSample path;
  double action = 0.0;
  /// Shooting: the conserved energy E. Minimization: mean of the H profile.
  double energy = 0.0;
  double max_energy_deviation = 0.0;
  MppMethod method = MppMethod::shooting;
  bool converged = true;
  long long iterations = 0;
  double gradient_norm = 0.0;
};

/// Travel time tau(E) = |int_{q1}^{q2} dq / sqrt(b^2 + 4E)|.
double travel_time(const DriftField& field, double q1, double q2, double E);

/// Lowest admissible energy -min_{[q1, q2]} b^2 / 4 (on a fine scan).
double minimum_energy(const DriftField& field, double q1, double q2);

/// Monotone 1-D most probable path by energy shooting. Throws NumericalError
/// ("no monotone path") when T is outside the achievable travel times.
MppResult mpp_shoot_1d(const DriftField& field, double q1, double q2, double T,
                       int path_steps = 1000);

struct MinimizeOptions {
  double grad_tol = 1e-8;
  long long max_iter = 100000;
  double armijo_c = 1e-4;
  double shrink = 0.5;
};

/// Discrete action minimisation over `knots` interior points with the
/// endpoints pinned, starting from the straight line.
MppResult mpp_minimize(const DriftField& field, const Vec& q1, const Vec& q2, double T, int knots,
                       const MinimizeOptions& opts = {});

/// Discrete action used by mpp_minimize and its gradient (zero at the pinned
/// endpoints).
double discrete_action(const DriftField& field, const std::vector<Vec>& nodes, double h);
std::vector<Vec> discrete_action_gradient(const DriftField& field, const std::vector<Vec>& nodes,
                                          double h);

/// Quasipotential gap int_a^c -b(x) dx from a stable zero a of b.
double uphill_action_1d(const DriftField& field, double a, double c);

}  // namespace fwkit
