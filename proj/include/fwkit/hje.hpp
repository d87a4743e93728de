// Grid solvers for the Hamilton-Jacobi equation u_t + |Du|^2 + b.Du = 0 and
// its viscous WKB form, plus stationary and characteristic solutions and
// tracking of the moving minimum.
#pragma once

#include "fwkit/fields.hpp"

#include <optional>
#include <vector>

namespace fwkit {

struct Axis {
  double min = 0.0;
  double max = 1.0;
  int n = 16;

  double dx() const { return (max - min) / (n - 1); }
  double coord(int i) const { return i == n - 1 ? max : min + i * dx(); }
};

/// Scalar values on a uniform 1-D or 2-D grid, row-major with axis 0 slowest.
struct GridFn {
  std::vector<Axis> axes;
  std::vector<double> values;
  /// Optional validity mask (false where the value is undefined).
  std::vector<bool> mask;

  int dim() const { return static_cast<int>(axes.size()); }
  std::size_t size() const { return values.size(); }
  std::size_t index(int i, int j = 0) const {
    return dim() == 1 ? static_cast<std::size_t>(i)
                      : static_cast<std::size_t>(i) * axes[1].n + static_cast<std::size_t>(j);
  }
  Vec point(std::size_t flat) const;
  double min_value() const;
};

/// Empty grid with the given axes; validates n >= 16 and max > min.
GridFn make_grid(std::vector<Axis> axes);

/// Grid filled with f(point).
template <class F>
GridFn tabulate(std::vector<Axis> axes, F f) {
  GridFn g = make_grid(std::move(axes));
  for (std::size_t k = 0; k < g.size(); ++k) g.values[k] = f(g.point(k));
  return g;
}

struct HjeResult {
  std::vector<double> times;
  std::vector<GridFn> snapshots;
  std::vector<double> dt_history;
  /// Per step, the largest |dH/dp_i| over the grid for each axis.
  std::vector<std::vector<double>> alpha_history;
  long long steps = 0;
  bool degenerate = false;
};

/// Explicit local Lax-Friedrichs time stepping to time T. With
/// eps_viscous > 0 the right-hand side gains eps (Laplacian u + div b).
/// Snapshots are evenly spaced in [0, T], first at t = 0 and last at t = T
/// (a single snapshot is taken at T).
HjeResult hje_evolve(const DriftField& field, const GridFn& u0, double T, double eps_viscous,
                     int snapshots);

/// u^st(x) = -int_{x_ref}^x b by cumulative trapezoid, shifted to min 0.
GridFn stationary_rate_1d(const DriftField& field, const Axis& axis, double x_ref = 0.0);

/// Branch of the constant-energy momentum p(x) with H(x, p) = E.
///   plus / minus: p = (-b +- sqrt(b^2 + 4E)) / 2
///   trivial / reversed: the continuations through b = 0 of p = 0 and p = -b
///   (they coincide with plus/minus where b > 0 and swap where b < 0).
enum class Branch { plus, minus, trivial, reversed };

/// u(x, t) = int_{x0}^x p dq - E t; masked where the branch is complex
/// anywhere between x0 and x.
GridFn characteristic_solution(const DriftField& field, const Axis& axis, double E, double x0,
                               Branch branch, double t);

struct ModalTrace {
  std::vector<double> times;
  std::vector<Vec> argmin;
  std::vector<double> min_value;
  /// Second difference at the argmin (1-D grids only).
  std::vector<double> curvature;
  /// Set when a snapshot had its argmin on the boundary; the trace stops there.
  bool truncated = false;
};

ModalTrace track_minimum(const std::vector<GridFn>& snapshots, const std::vector<double>& times);

/// Largest |a - b| over the grid (grids must share axes).
double sup_distance(const GridFn& a, const GridFn& b);

}  // namespace fwkit
