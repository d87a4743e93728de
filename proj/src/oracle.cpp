#include "fwkit/oracle.hpp"

#include "fwkit/types.hpp"

#include <cmath>

namespace fwkit {

OuState ou_params(const OuState& s0, double t) {
  if (!(t >= 0.0)) throw ConfigError("ou_params: t must be non-negative");
  if (!(s0.b_coef > 0.0)) throw ConfigError("ou_params: b_coef must be positive");
  if (!(s0.sigma2 > 0.0)) throw ConfigError("ou_params: sigma2 must be positive");
  OuState s = s0;
  const double b = s0.b_coef;
  const double decay = std::exp(-b * t);
  s.mu = s0.mu * decay;
  if (s0.flat()) {
    // Limit sigma2(0) -> infinity: (1/b) / (1 - e^{-2bt}).
    s.sigma2 = t == 0.0 ? s0.sigma2 : (1.0 / b) / -std::expm1(-2.0 * b * t);
  } else {
    s.sigma2 = 1.0 / b + (s0.sigma2 - 1.0 / b) * decay * decay;
  }
  if (s0.eps != 0.0 && t != 0.0) {
    s.a = s0.flat() ? -std::numeric_limits<double>::infinity()
                    : s0.a + 0.5 * s0.eps * std::log(s.sigma2 / s0.sigma2);
  }
  return s;
}

double ou_rate(const OuState& state0, double x, double t) {
  const OuState s = ou_params(state0, t);
  if (s.flat()) return 0.0;
  const double d = x - s.mu;
  return d * d / (2.0 * s.sigma2);
}

GaussianMoments ou_transition_kernel(double b_lin, double eps, double x_prev, double dt) {
  if (!(dt > 0.0)) throw ConfigError("ou_transition_kernel: dt must be positive");
  GaussianMoments m;
  m.mean = x_prev * std::exp(b_lin * dt);
  if (std::abs(b_lin) < 1e-12) {
    m.variance = 2.0 * eps * dt;
  } else {
    m.variance = (eps / b_lin) * std::expm1(2.0 * b_lin * dt);
  }
  return m;
}

}  // namespace fwkit
