// Motion of the rate-function minimum on the circle, limit cycles, and the
// fixed points of the Hamiltonian system on the torus.
#pragma once

#include "fwkit/fields.hpp"
#include "fwkit/mechanics.hpp"

#include <optional>
#include <vector>

namespace fwkit {

/// Trace of x' = b(x), y' = -2 (b'(x) + y) y with x wrapped to [0, 1).
/// phi = ln|b(x(t))| - ln|b(x(0))| and v = y exp(2 phi) are filled when b
/// keeps one sign along the whole trace.
struct CircleTrace {
  std::vector<double> t, x, y;
  std::vector<double> phi, v;
  bool has_phi = false;
};

CircleTrace circle_flow(const DriftField& field, double x0, double y0, double dt, double T);

/// Period of the cyclic motion, int_0^1 dtheta / |b|, when b has no zero.
std::optional<double> limit_cycle_period(const DriftField& field);

struct CurvatureDecayReport {
  bool non_increasing = true;
  /// Largest v(t_{k+1}) - v(t_k) seen (<= 1e-8 passes).
  double max_increase = 0.0;
  double final_y = 0.0;
  double final_v = 0.0;
};

CurvatureDecayReport curvature_decay_check(const CircleTrace& trace);

struct TorusFixedPoint {
  double theta = 0.0;
  double omega = 0.0;
  /// 1: omega = 0, U'(theta) = b0.  2: U''(theta) = 0, omega = (U' - b0) / 2.
  int family = 1;
  EquilibriumType type = EquilibriumType::degenerate;
};

/// Circle field b = b0 - U' for U(theta) = sum_k alpha_k cos(2 pi k theta) +
/// beta_k sin(2 pi k theta), k = 1, 2, ...
DriftField torus_field(double b0, const std::vector<double>& alpha, const std::vector<double>& beta);

/// Fixed points of theta' = 2 omega + b(theta), omega' = -omega b'(theta)
/// for b = b0 - U' on a 4096-cell scan with bisection to 1e-10.
std::vector<TorusFixedPoint> torus_fixed_points(const DriftField& field);

}  // namespace fwkit
