// Closed-form Ornstein-Uhlenbeck results: the Gaussian solution of the
// Hamilton-Jacobi equation for b(x) = -b_coef x and the transition kernel of
// the linear SDE. Used as ground truth by the test suites.
#pragma once

#include <limits>

namespace fwkit {

/// u_eps(x, t) = a + (x - mu)^2 / (2 sigma2) for drift -b_coef x.
/// sigma2 = +infinity marks the flat initial state u(x, 0) = a.
struct OuState {
  double b_coef = 1.0;
  double mu = 0.0;
  double sigma2 = 1.0;
  double a = 0.0;
  double eps = 0.0;

  bool flat() const { return sigma2 == std::numeric_limits<double>::infinity(); }
};

/// State at time t >= 0.
OuState ou_params(const OuState& state0, double t);

/// (x - mu(t))^2 / (2 sigma2(t)); a(t) is left out so the minimum is 0.
double ou_rate(const OuState& state0, double x, double t);

struct GaussianMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Transition law of dX = b_lin X dt + sqrt(2 eps) dW over dt.
GaussianMoments ou_transition_kernel(double b_lin, double eps, double x_prev, double dt);

}  // namespace fwkit
