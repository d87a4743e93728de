// Sampling of noisy and noiseless trajectories, terminal-time rare-event
// estimates, and the discrete path-weight exponent.
#pragma once

#include "fwkit/fields.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fwkit {

/// Uniformly time-stamped trajectory. The momentum and energy channels are
/// filled only by the Hamiltonian integrators.
struct PathSample {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> momentum;
  std::vector<double> energy;

  std::size_t size() const { return states.size(); }
  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
  int dim() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
};

/// Terminal-state event: the whole space, an axis-aligned box (bounds may be
/// infinite) or a closed ball.
struct Region {
  enum class Kind { all, box, ball };
  Kind kind = Kind::all;
  Vec lo, hi;
  Vec center;
  double radius = 0.0;

  static Region everything() { return {}; }
  static Region box(Vec lo, Vec hi);
  static Region ball(Vec center, double radius);

  bool contains(const Vec& x) const;
  std::string describe() const;
};

struct RateRow {
  double eps = 0.0;
  long long n = 0;
  long long hits = 0;
  double p_hat = 0.0;
  double std_error = 0.0;
  /// -eps ln p_hat; NaN when no run hit the event.
  double rate = 0.0;
  bool underflow = false;
};

struct RateReport {
  std::string event;
  std::vector<RateRow> rows;
  std::optional<double> reference_action;
};

/// Number of steps for horizon T at step dt (T / dt rounded to nearest).
long long step_count(double dt, double T);

/// X_{k+1} = X_k + b(X_k) dt + sqrt(2 eps dt) xi_k with xi_k drawn from the
/// counter-based generator keyed by (seed, stream, k).
PathSample euler_maruyama(const DriftField& field, const Vec& x0, double eps, double dt, double T,
                          std::uint64_t seed, std::uint64_t stream = 0);

/// Terminal state only; same noise as euler_maruyama with the same key.
Vec euler_maruyama_terminal(const DriftField& field, const Vec& x0, double eps, double dt,
                            long long steps, std::uint64_t seed, std::uint64_t stream);

/// Classical RK4 for x' = b(x).
PathSample ode_solve(const DriftField& field, const Vec& x0, double dt, double T);

/// Fraction of N independent Euler-Maruyama runs (run k keyed by (seed, k))
/// whose terminal state lies in `event`.
RateRow rare_event_probability(const DriftField& field, const Vec& x0, double eps, double dt,
                               double T, const Region& event, long long N, std::uint64_t seed);

/// One row per eps; eps_list must be strictly decreasing.
RateReport rare_event_sweep(const DriftField& field, const Vec& x0,
                            const std::vector<double>& eps_list, double dt, double T,
                            const Region& event, long long N, std::uint64_t seed,
                            std::optional<double> reference_action = std::nullopt);

struct PathWeight {
  double drift_term = 0.0;       // sum |dx/dt - b(x_k)|^2 dt / 4
  double divergence_term = 0.0;  // (eps/2) sum div b(x_k) dt
  double total() const { return drift_term + divergence_term; }
};

/// Exponent S in A exp(-S / eps) for the discretised path density.
PathWeight path_weight_exponent(const DriftField& field, const PathSample& path, double eps);

}  // namespace fwkit
