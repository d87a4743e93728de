#include "fwkit/ratefn.hpp"
#include "fwkit/types.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fwkit;
using doctest::Approx;

TEST_CASE("cumulant generating functions") {
  const auto th = symmetric_grid(3.0, 61);
  for (const MeanSource& s : {MeanSource::gaussian(0.4, 2.0), MeanSource::bernoulli(0.3), MeanSource::point(1.5)}) {
    const CgfTable t = cgf(s, th);
    CHECK(std::abs(t.lambda[30]) <= 1e-12);
    for (std::size_t k = 1; k + 1 < th.size(); ++k) {
      CHECK(t.lambda[k - 1] - 2 * t.lambda[k] + t.lambda[k + 1] >= -1e-9);
    }
  }
  CHECK(cgf_value(MeanSource::gaussian(0.0, 1.0), 2.0) == Approx(2.0));
  CHECK(cgf_value(MeanSource::bernoulli(0.5), std::log(3.0)) == Approx(std::log(2.0)));
  CHECK(cgf_value(MeanSource::bernoulli(0.5), 800.0) == Approx(800.0 + std::log(0.5)));

  std::mt19937_64 gen(4);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> xs(5000);
  for (double& x : xs) x = nd(gen);
  const CgfTable e = cgf(MeanSource::empirical(xs), th);
  CHECK(e.lambda[30] == Approx(0.0));
  CHECK(e.lambda[40] == Approx(0.5).epsilon(0.1));
  CHECK_THROWS_AS(cgf(MeanSource::empirical({1.0, 2.0}), th), ConfigError);
  CHECK_THROWS_AS(MeanSource::empirical({}), ConfigError);
  CHECK_THROWS_AS(MeanSource::bernoulli(1.0), ConfigError);
  CHECK_THROWS_AS(symmetric_grid(1.0, 10), ConfigError);
}

TEST_CASE("Legendre transforms") {
  const CgfTable g = cgf(MeanSource::gaussian(0.0, 1.0), symmetric_grid(5.0, 1001));
  CHECK(legendre(g, 2.0).value == Approx(2.0).epsilon(1e-8));
  CHECK(legendre(g, 0.0).value <= 1e-8);
  CHECK(legendre(g, 2.0).theta_star == Approx(2.0));
  CHECK(legendre(g, 8.0).unreliable);

  const CgfTable b = cgf(MeanSource::bernoulli(0.5), symmetric_grid(30.0, 6001));
  CHECK(legendre(b, 0.5).value <= 1e-8);
  CHECK(legendre(b, 1.0).value == Approx(std::log(2.0)).epsilon(1e-3));
  const double x = 0.8;
  CHECK(legendre(b, x).value ==
        Approx(x * std::log(x / 0.5) + (1 - x) * std::log((1 - x) / 0.5)).epsilon(1e-6));
}

TEST_CASE("Legendre transform is nonnegative, convex and an involution") {
  const CgfTable g = cgf(MeanSource::gaussian(0.3, 0.5), symmetric_grid(6.0, 1201));
  std::vector<double> xs, us;
  for (int i = -20; i <= 20; ++i) {
    xs.push_back(0.3 + 0.1 * i);
    us.push_back(legendre(g, xs.back()).value);
    CHECK(us.back() >= 0.0);
  }
  for (std::size_t i = 1; i + 1 < us.size(); ++i) CHECK(us[i - 1] - 2 * us[i] + us[i + 1] >= -1e-8);

  CgfTable dual;
  dual.theta = symmetric_grid(6.0, 2401);
  for (double x : dual.theta) dual.lambda.push_back(legendre(g, x).value);
  for (double th : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    CHECK(std::abs(legendre(dual, th).value - cgf_value(g.source, th)) <= 1e-6);
  }
}

TEST_CASE("rate properties") {
  const auto th = symmetric_grid(1.0, 201);
  const RateProperties g = rate_properties(cgf(MeanSource::gaussian(0.7, 0.25), th));
  CHECK(g.argmin == Approx(0.7));
  CHECK(std::abs(g.min) <= 1e-12);
  CHECK(g.curvature == Approx(4.0));
  const RateProperties b = rate_properties(cgf(MeanSource::bernoulli(0.5), th));
  CHECK(b.argmin == Approx(0.5));
  CHECK(b.curvature == Approx(4.0).epsilon(1e-4));

  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::vector<double> xs(4000), shifted;
  for (double& x : xs) x = ud(gen);
  for (double x : xs) shifted.push_back(x + 2.0);
  const RateProperties a = rate_properties(cgf(MeanSource::empirical(xs), th));
  const RateProperties s = rate_properties(cgf(MeanSource::empirical(shifted), th));
  CHECK(s.argmin == Approx(a.argmin + 2.0));
  CHECK(s.curvature == Approx(a.curvature));
  CHECK_THROWS_AS(rate_properties(cgf(MeanSource::point(1.0), th)), NumericalError);
}

TEST_CASE("empirical sample-mean rates") {
  const MeanSource g = MeanSource::gaussian(0.0, 1.0);
  const auto zero = sample_mean_rate(g, {100}, {0.0}, 20000, 3);
  REQUIRE(zero[0].rate[0]);
  CHECK(std::abs(*zero[0].rate[0]) <= 0.02);

  const auto rows = sample_mean_rate(g, {50, 100, 200}, {0.5}, 20000, 5);
  double prev = INFINITY;
  for (const auto& r : rows) {
    REQUIRE(r.rate[0]);
    const double gap = std::abs(*r.rate[0] - 0.125);
    CHECK(gap <= prev + 0.03);
    prev = gap;
  }
  CHECK(prev <= 0.03);

  const auto again = sample_mean_rate(g, {50, 100, 200}, {0.5}, 20000, 5);
  CHECK(*again[2].rate[0] == *rows[2].rate[0]);

  const auto pt = sample_mean_rate(MeanSource::point(1.0), {10}, {0.0, 1.0}, 100, 1);
  CHECK(pt[0].degenerate);
  CHECK_FALSE(pt[0].rate[0]);
  REQUIRE(pt[0].rate[1]);

  SampleMeanOptions plain;
  plain.tilt = false;
  const auto h = sample_mean_rate(MeanSource::bernoulli(0.5), {20}, {0.5, 0.6}, 20000, 2, plain);
  CHECK(h[0].tilt[0] == 0.0);
  REQUIRE(h[0].rate[0]);
}
