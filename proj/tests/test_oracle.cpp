#include "fwkit/hje.hpp"
#include "fwkit/oracle.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace fwkit;
using namespace fwkit::testing;
using doctest::Approx;

namespace {
OuState start(double eps = 0.0) {
  OuState s;
  s.b_coef = 1.0;
  s.mu = 3.0;
  s.sigma2 = 2.0;
  s.a = 0.5;
  s.eps = eps;
  return s;
}
}  // namespace

TEST_CASE("OU parameters") {
  const OuState s0 = start(0.3);
  const OuState z = ou_params(s0, 0.0);
  CHECK(z.mu == s0.mu);
  CHECK(z.sigma2 == s0.sigma2);
  CHECK(z.a == s0.a);

  const OuState h = ou_params(start(), std::log(2.0));
  CHECK(h.sigma2 == Approx(1.25));
  CHECK(h.mu == Approx(1.5));

  const OuState inf = ou_params(start(), 60.0);
  CHECK(inf.sigma2 == Approx(1.0));
  CHECK(std::abs(inf.mu) < 1e-20);

  OuState flat = start();
  flat.sigma2 = std::numeric_limits<double>::infinity();
  CHECK(ou_params(flat, 1.0).sigma2 == Approx(1.0 / (1.0 - std::exp(-2.0))));
  CHECK(ou_params(flat, 0.0).flat());

  CHECK_THROWS_AS(ou_params(start(), -1.0), ConfigError);
}

TEST_CASE("OU rate") {
  const double t = std::log(2.0);
  CHECK(ou_rate(start(), 1.5, t) == Approx(0.0).epsilon(1e-12));
  CHECK(ou_rate(start(), 2.5, t) == Approx(0.4));
  CHECK(ou_rate(start(), 2.0, 60.0) == Approx(2.0));
}

TEST_CASE("OU parameters solve their ODE system") {
  const OuState s0 = start(0.2);
  const double h = 1e-5;
  for (double t : {0.1, 0.5, 1.3}) {
    const OuState m = ou_params(s0, t - h), c = ou_params(s0, t), p = ou_params(s0, t + h);
    CHECK(std::abs((p.sigma2 - m.sigma2) / (2 * h) - 2.0 * (1.0 - c.sigma2)) <= 1e-6);
    CHECK(std::abs((p.mu - m.mu) / (2 * h) + c.mu) <= 1e-6);
    CHECK(std::abs((p.a - m.a) / (2 * h) - 0.2 * (1.0 / c.sigma2 - 1.0)) <= 1e-6);
  }
}

TEST_CASE("transition kernel") {
  const GaussianMoments bm = ou_transition_kernel(0.0, 0.3, 1.2, 2.0);
  CHECK(bm.mean == 1.2);
  CHECK(bm.variance == Approx(1.2));
  const GaussianMoments k = ou_transition_kernel(-1.0, 1.0, 1.0, 1.0);
  CHECK(k.mean == Approx(0.36788).epsilon(1e-5));
  CHECK(k.variance == Approx(0.86466).epsilon(1e-5));
  const GaussianMoments far = ou_transition_kernel(-1.0, 0.4, 5.0, 80.0);
  CHECK(std::abs(far.mean) < 1e-30);
  CHECK(far.variance == Approx(0.4));
  CHECK_THROWS_AS(ou_transition_kernel(-1.0, 1.0, 0.0, 0.0), ConfigError);
}

TEST_CASE("transition kernel semigroup") {
  for (double b : {-1.3, 0.4}) {
    const double eps = 0.2, x = 0.9, d1 = 0.3, d2 = 0.7;
    const GaussianMoments a = ou_transition_kernel(b, eps, x, d1);
    const GaussianMoments two = ou_transition_kernel(b, eps, a.mean, d2);
    const double var = std::exp(2 * b * d2) * a.variance + two.variance;
    const GaussianMoments all = ou_transition_kernel(b, eps, x, d1 + d2);
    CHECK(two.mean == Approx(all.mean).epsilon(1e-13));
    CHECK(var == Approx(all.variance).epsilon(1e-13));
  }
}

TEST_CASE("long-time rate equals the stationary rate") {
  const Axis ax{-4.0, 4.0, 801};
  const GridFn st = stationary_rate_1d(ou(), ax);
  double worst = 0.0;
  for (int i = 0; i < ax.n; ++i) {
    worst = std::max(worst, std::abs(st.values[i] - ou_rate(start(), ax.coord(i), 50.0)));
  }
  CHECK(worst <= 1e-3);
}
