#include "fwkit/mechanics.hpp"
#include "fwkit/simulate.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace fwkit;
using namespace fwkit::testing;
using doctest::Approx;

TEST_CASE("Hamiltonian and Lagrangian evaluations") {
  CHECK(hamiltonian(ou(), make_vec({2.0}), make_vec({1.0})) == Approx(-1.0));
  CHECK(hamiltonian(double_well(), make_vec({0.4}), make_vec({0.0})) == 0.0);
  const Vec q = make_vec({0.3});
  CHECK(lagrangian(double_well(), q, double_well().drift(q)) == 0.0);
  CHECK(lagrangian(poly({1.0}), q, make_vec({2.0})) == Approx(0.25));
  const Vec v = make_vec({0.7});
  CHECK(lagrangian(double_well(), q, double_well().drift(q) + 2.0 * v) == Approx(0.49));
}

TEST_CASE("action quadrature") {
  const PathSample ode = ode_solve(double_well(), make_vec({0.1}), 1e-3, 4.0);
  CHECK(action(double_well(), ode) <= 1e-4);

  PathSample line;
  for (int k = 0; k <= 50; ++k) {
    line.times.push_back(0.01 * k);
    line.states.push_back(make_vec({k / 50.0}));
  }
  CHECK(action(poly({1.0}), line) == Approx(0.125).epsilon(1e-12));

  const double T = 8.0, dt = 1e-4;
  PathSample up;
  for (long long k = 0; k <= step_count(dt, T); ++k) {
    up.times.push_back(k * dt);
    up.states.push_back(make_vec({std::exp(k * dt - T)}));
  }
  CHECK(action(ou(), up) == Approx(0.5 * (1.0 - std::exp(-2.0 * T))).epsilon(1e-4));

  PathSample one{{0.0}, {make_vec({0.0})}, {}, {}};
  CHECK_THROWS_AS(action(ou(), one), ConfigError);
}

TEST_CASE("Hamiltonian trajectories") {
  const auto zero = integrate_hamiltonian(double_well(), {make_vec({0.2}), make_vec({0.0})}, 1e-3, 2.0);
  const PathSample ode = ode_solve(double_well(), make_vec({0.2}), 1e-3, 2.0);
  CHECK(std::abs(zero.q.back()(0) - ode.states.back()(0)) <= 1e-12);
  for (double h : zero.H) CHECK(h == 0.0);

  const auto line = integrate_hamiltonian(poly({1.0}), {make_vec({0.0}), make_vec({0.5})}, 1e-2, 1.0);
  CHECK(line.q.back()(0) == Approx(2.0));
  CHECK(line.H.front() == Approx(0.75));
  CHECK(line.max_energy_drift <= 1e-12);

  const auto o = integrate_hamiltonian(ou(), {make_vec({0.7}), make_vec({-0.4})}, 1e-3, 5.0);
  CHECK(o.max_energy_drift <= 1e-8);
  CHECK_FALSE(o.energy_warning);
}

TEST_CASE("Hamiltonian invariants across the catalog") {
  std::vector<std::pair<DriftField, PhasePoint>> cases = {
      {ou(), {make_vec({1.0}), make_vec({0.3})}},
      {double_well(), {make_vec({0.6}), make_vec({-0.18})}},
      {circle(1.0, {0.3}, {0.2}), {make_vec({0.1}), make_vec({0.1})}},
      {rot_ou(1.5), {make_vec({1.0, -0.5}), make_vec({0.2, 0.4})}},
      {decomposed({{0.0, 0.0, 0.7}, {0.0, 0.3}, {0.5}}, 0.5), {make_vec({0.5, 0.5}), make_vec({0.1, -0.3})}},
  };
  for (const auto& [f, start] : cases) {
    INFO(to_string(f.kind()));
    const auto tr = integrate_hamiltonian(f, start, 1e-3, 5.0);
    CHECK(tr.max_energy_drift <= 1e-6);
    const double H0 = tr.H.front();
    double excess = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const Vec qdot = 2.0 * tr.p[k] + f.drift(tr.q[k]);
      excess = std::max(excess, std::abs(qdot.squaredNorm() - f.drift(tr.q[k]).squaredNorm() - 4.0 * H0));
    }
    CHECK(excess <= 1e-6);
  }
}

TEST_CASE("characteristics") {
  const auto rest = solve_characteristics(double_well(), 0.3, 0.0, 1.5, 1e-3, 2.0);
  CHECK(rest.u.back() == 1.5);
  CHECK(rest.y.front() == 0.0);
  const PathSample ode = ode_solve(double_well(), make_vec({0.3}), 1e-3, 2.0);
  CHECK(rest.x.back() == Approx(ode.states.back()(0)));

  const auto c = solve_characteristics(double_well(), 0.2, -0.05, 0.0, 1e-3, 2.0);
  for (std::size_t k = 0; k < c.t.size(); ++k) {
    const double H = hamiltonian(double_well(), make_vec({c.x[k]}), make_vec({c.z[k]}));
    CHECK(std::abs(c.y[k] + H) <= 1e-8);
  }

  const auto o = solve_characteristics(ou(), 1.0, 1.0, 0.0, 1e-4, 1.0);
  CHECK(o.y.front() == 0.0);
  PathSample p;
  p.times = o.t;
  for (double x : o.x) p.states.push_back(make_vec({x}));
  CHECK(std::abs(o.u.back() - action(ou(), p)) <= 1e-6);
}

TEST_CASE("equilibria of the phase plane") {
  const auto o = classify_equilibria(ou(), -2.0, 2.0);
  REQUIRE(o.points.size() == 1);
  CHECK(o.points[0].q == Approx(0.0));
  CHECK(o.points[0].p == 0.0);
  CHECK(o.points[0].type == EquilibriumType::saddle);
  CHECK(o.points[0].eigen_sq == Approx(1.0));

  const auto d = classify_equilibria(double_well(), -2.0, 2.0);
  int a = 0, b = 0;
  for (const auto& e : d.points) {
    if (e.family == 'A') {
      ++a;
      CHECK(e.p == 0.0);
      CHECK(e.type == EquilibriumType::saddle);
    } else {
      ++b;
      CHECK(std::abs(e.q) == Approx(1.0 / std::sqrt(3.0)));
      CHECK(e.p == Approx(-e.q / 3.0));
      CHECK(e.type == EquilibriumType::center);
    }
  }
  CHECK(a == 3);
  CHECK(b == 2);
  CHECK(d.failures.empty());
}

TEST_CASE("phase contours") {
  const std::vector<double> qs = {-1.0, 0.0, 0.5};
  for (const auto& c : phase_contour(double_well(), 0.0, qs)) {
    const double b = c.q - c.q * c.q * c.q;
    REQUIRE(c.p_plus);
    REQUIRE(c.p_minus);
    CHECK(std::min(*c.p_plus, *c.p_minus) == Approx(std::min(0.0, -b)));
    CHECK(std::max(*c.p_plus, *c.p_minus) == Approx(std::max(0.0, -b)));
  }
  const auto one = phase_contour(poly({1.0}), 0.75, {0.0});
  CHECK(*one[0].p_plus == Approx(0.5));
  CHECK(*one[0].p_minus == Approx(-1.5));
  for (const auto& c : phase_contour(poly({1.0}), -1.0, qs)) {
    CHECK_FALSE(c.p_plus);
    CHECK_FALSE(c.p_minus);
  }
}
