// The fictitious mechanics H(q, p) = |p|^2 + b(q).p, its Lagrangian
// |qdot - b(q)|^2 / 4, and the characteristic ODEs of the Hamilton-Jacobi
// equation.
#pragma once

#include "fwkit/fields.hpp"
#include "fwkit/simulate.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fwkit {

struct PhasePoint {
  Vec q;
  Vec p;
};

struct HamiltonianTrajectory {
  std::vector<double> times;
  std::vector<Vec> q;
  std::vector<Vec> p;
  std::vector<double> H;
  /// Accumulated integral of p.qdot - H along the trajectory.
  std::vector<double> u;
  double max_energy_drift = 0.0;
  /// Set when |H(t) - H(0)| exceeded 1e-6 max(1, |H(0)|).
  bool energy_warning = false;

  std::size_t size() const { return q.size(); }
  PathSample as_path() const;
};

double hamiltonian(const DriftField& field, const Vec& q, const Vec& p);
double lagrangian(const DriftField& field, const Vec& q, const Vec& qdot);

/// Discrete action of a uniformly sampled path. Interval k contributes
/// dt * (L(x_k, v_k) + L(x_{k+1}, v_k)) / 2 with v_k = (x_{k+1} - x_k) / dt.
double action(const DriftField& field, const PathSample& path);

/// RK4 for qdot = 2p + b(q), pdot = -J_b(q)^T p, with u' = p.qdot - H.
HamiltonianTrajectory integrate_hamiltonian(const DriftField& field, const PhasePoint& start,
                                            double dt, double T);

/// Channels of the one-dimensional characteristic system
/// x' = 2z + b, z' = -z b'(x), u' = y + (2z + b) z, y = -(z0^2 + z0 b(x0)).
struct CharacteristicTrace {
  std::vector<double> t, x, z, u, y;
};

CharacteristicTrace solve_characteristics(const DriftField& field, double x0, double z0, double u0,
                                          double dt, double T);

enum class EquilibriumType { saddle, center, degenerate };
std::string to_string(EquilibriumType t);

struct Equilibrium {
  double q = 0.0;
  double p = 0.0;
  EquilibriumType type = EquilibriumType::degenerate;
  /// Squared eigenvalue of the linearisation (eigenvalues are +-sqrt of it).
  double eigen_sq = 0.0;
  /// 'A' for p* = 0, b(q*) = 0; 'B' for b'(q*) = 0, p* = -b(q*)/2.
  char family = 'A';
};

struct EquilibriumScan {
  std::vector<Equilibrium> points;
  /// Subintervals on which bisection failed to meet tolerance.
  std::vector<std::pair<double, double>> failures;
};

/// Equilibria of the one-dimensional (q, p) system on [q_lo, q_hi] by
/// sign-change scanning over `cells` cells and bisection.
EquilibriumScan classify_equilibria(const DriftField& field, double q_lo, double q_hi,
                                    int cells = 1024);

struct ContourPoint {
  double q = 0.0;
  std::optional<double> p_plus;
  std::optional<double> p_minus;
};

/// Level set H(q, p) = E: p = (-b +- sqrt(b^2 + 4E)) / 2 where real.
std::vector<ContourPoint> phase_contour(const DriftField& field, double E,
                                        const std::vector<double>& q_grid);

}  // namespace fwkit
