// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion;
// `acceptance N` runs criterion N only.
#include "fwkit/circle.hpp"
#include "fwkit/cli.hpp"
#include "fwkit/fields.hpp"
#include "fwkit/hje.hpp"
#include "fwkit/mechanics.hpp"
#include "fwkit/mpp.hpp"
#include "fwkit/neq.hpp"
#include "fwkit/oracle.hpp"
#include "fwkit/ratefn.hpp"
#include "fwkit/simulate.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace fwkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [failed]");
  }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

DriftField ou(double b = 1.0) {
  FieldSpec s;
  s.kind = FieldKind::ou;
  s.b_coef = b;
  return build_field(s);
}

DriftField poly(std::vector<double> c) {
  FieldSpec s;
  s.kind = FieldKind::poly1d;
  s.coeffs = std::move(c);
  return build_field(s);
}

DriftField circle(double b0, std::vector<double> a, std::vector<double> c) {
  FieldSpec s;
  s.kind = FieldKind::circle;
  s.b0 = b0;
  s.cos_coeffs = std::move(a);
  s.sin_coeffs = std::move(c);
  return build_field(s);
}

DriftField rot_ou(double omega) {
  FieldSpec s;
  s.kind = FieldKind::rot_ou;
  s.omega = omega;
  return build_field(s);
}

DriftField decomposed(std::vector<std::vector<double>> U, double gamma) {
  FieldSpec s;
  s.kind = FieldKind::decomposed2d;
  s.potential = std::move(U);
  s.gamma = gamma;
  return build_field(s);
}

// Sup distance after shifting both grids to grid minimum 0.
double shape_error(const GridFn& u, const GridFn& exact) {
  const double mu = u.min_value(), me = exact.min_value();
  double e = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    e = std::max(e, std::abs((u.values[k] - mu) - (exact.values[k] - me)));
  }
  return e;
}

OuState ou_start() {
  OuState s;
  s.b_coef = 1.0;
  s.mu = 3.0;
  s.sigma2 = 2.0;
  return s;
}

GridFn ou_run(const Axis& ax, double T, int snaps, HjeResult* out = nullptr) {
  const DriftField f = ou();
  const OuState s0 = ou_start();
  const GridFn u0 = tabulate({ax}, [&](const Vec& x) { return ou_rate(s0, x(0), 0.0); });
  HjeResult r = hje_evolve(f, u0, T, 0.0, snaps);
  GridFn last = r.snapshots.back();
  if (out) *out = std::move(r);
  return last;
}

Outcome criterion1() {
  Outcome o;
  const OuState s0 = ou_start();
  double err[2];
  const int ns[2] = {401, 801};
  for (int i = 0; i < 2; ++i) {
    const GridFn u = ou_run(Axis{-6.0, 6.0, ns[i]}, 1.0, 1);
    const GridFn exact = tabulate(u.axes, [&](const Vec& x) { return ou_rate(s0, x(0), 1.0); });
    err[i] = shape_error(u, exact);
  }
  o.check(err[0] <= 5e-3, "sup error n=401 " + num(err[0]) + " (<= 5e-3)");
  o.check(err[0] / err[1] >= 1.5, "refinement ratio " + num(err[0] / err[1]) + " (>= 1.5)");
  return o;
}

Outcome criterion2() {
  Outcome o;
  // The minimum sweeps [3/e, 3]; the window keeps a margin on both sides.
  const Axis ax{0.5, 4.0, 401};
  HjeResult r;
  ou_run(ax, 1.0, 51, &r);
  const ModalTrace tr = track_minimum(r.snapshots, r.times);
  const double dx = ax.dx();
  o.check(!tr.truncated && tr.times.size() == 51, "trace complete");
  double pos = 0.0, drift = 0.0, curv = 0.0;
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    pos = std::max(pos, std::abs(tr.argmin[k](0) - 3.0 * std::exp(-tr.times[k])));
    drift = std::max(drift, std::abs(tr.min_value[k] - tr.min_value[0]));
  }
  // y' = -2 (b'(x*) + y) y with b' = -1, central differences in time.
  for (std::size_t k = 1; k + 1 < tr.times.size(); ++k) {
    const double dydt = (tr.curvature[k + 1] - tr.curvature[k - 1]) / (tr.times[k + 1] - tr.times[k - 1]);
    const double y = tr.curvature[k];
    const double rhs = -2.0 * (-1.0 + y) * y;
    curv = std::max(curv, std::abs(dydt - rhs) / std::abs(rhs));
  }
  o.check(pos <= 2.0 * dx, "max |x* - 3e^-t| " + num(pos) + " (<= " + num(2 * dx) + ")");
  o.check(drift <= 1e-2, "u* drift on [0.5, 4] " + num(drift) + " (<= 1e-2)");
  o.check(curv <= 0.1, "curvature ODE rel. error " + num(curv) + " (<= 0.1)");
  return o;
}

Outcome criterion3() {
  Outcome o;
  const DriftField f = poly({0.0, 1.0, 0.0, -1.0});
  const Axis ax{-1.2, 1.2, 401};
  const GridFn ust = stationary_rate_1d(f, ax, 0.0);
  const HjeResult r = hje_evolve(f, ust, 1.0, 0.0, 1);
  const double change = sup_distance(r.snapshots.back(), ust);
  o.check(change <= 5e-3, "sup change over T=1 on [-1.2, 1.2] " + num(change) + " (<= 5e-3)");
  const double left = uphill_action_1d(f, -1.0, 0.0);
  const double right = uphill_action_1d(f, 1.0, 0.0);
  const double e = std::max(std::abs(left - 0.25), std::abs(right - 0.25));
  o.check(e <= 1e-10, "barrier error " + num(e) + " (<= 1e-10)");
  return o;
}

Outcome criterion4() {
  Outcome o;
  std::mt19937_64 gen(20240611);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<DriftField> fields = {
      ou(1.0),
      poly({0.0, 1.0, 0.0, -1.0}),
      circle(2.0, {0.3}, {std::sqrt(3.0)}),
      rot_ou(1.0),
      decomposed({{0.0, 0.0, 0.7}, {0.0, 0.3}, {0.5}}, 0.5),
  };
  double dH = 0.0, excess = 0.0, lorentz = 0.0;
  int warned = 0;
  for (int k = 0; k < 100; ++k) {
    const DriftField& f = fields[k % fields.size()];
    const int d = f.dim();
    Vec q(d), p(d);
    for (int i = 0; i < d; ++i) {
      q(i) = U(gen);
      p(i) = 0.2 * U(gen);
    }
    if (f.kind() == FieldKind::poly1d) {
      // Closed orbits around the centre at b'(q) = 0, p = -b/2; open energy
      // surfaces of the double well run off to infinity in finite time.
      const double c = (k % 2 ? 1.0 : -1.0) / std::sqrt(3.0);
      q(0) = c + 0.2 * U(gen);
      p(0) = -0.5 * f.drift1(c) + 0.05 * U(gen);
    }
    const HamiltonianTrajectory tr = integrate_hamiltonian(f, {q, p}, 1e-3, 5.0);
    if (tr.energy_warning) ++warned;
    dH = std::max(dH, std::abs(tr.H.back() - tr.H.front()));
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const Vec b = f.drift(tr.q[i]);
      const Vec qdot = 2.0 * tr.p[i] + b;
      excess = std::max(excess, std::abs(qdot.squaredNorm() - b.squaredNorm() - 4.0 * tr.H.front()));
    }
    lorentz = std::max(lorentz, lorentz_residual(f, tr));
  }
  o.check(dH <= 1e-6, "max |H(T)-H(0)| " + num(dH) + " (<= 1e-6)");
  o.check(excess <= 1e-6, "max excess-kinetic residual " + num(excess) + " (<= 1e-6)");
  o.check(lorentz <= 1e-3, "max Lorentz residual " + num(lorentz) + " (<= 1e-3)");
  if (warned) o.detail += "; " + std::to_string(warned) + " energy warnings";
  return o;
}

Outcome criterion5() {
  Outcome o;
  const DriftField one = poly({1.0});
  const MppResult s = mpp_shoot_1d(one, 0.0, 1.0, 0.5);
  const MppResult m = mpp_minimize(one, make_vec({0.0}), make_vec({1.0}), 0.5, 128);
  o.check(std::abs(s.action - 0.125) <= 1e-4 && std::abs(m.action - 0.125) <= 1e-4,
          "b=1 actions " + num(s.action) + ", " + num(m.action));
  o.check(std::abs(s.energy - 0.75) <= 1e-6 && std::abs(m.energy - 0.75) <= 1e-6,
          "b=1 energies " + num(s.energy) + ", " + num(m.energy));

  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> c0(-1.5, 1.5), c1(-1.0, 1.0), a(-1.0, 0.0), b(0.5, 1.5),
      T(0.3, 1.5);
  int done = 0, tries = 0;
  double rel = 0.0, flat = 0.0;
  while (done < 20 && tries < 1000) {
    ++tries;
    const DriftField f = poly({c0(gen), c1(gen)});
    const double q1 = a(gen), q2 = b(gen), t = T(gen);
    MppResult sh;
    try {
      sh = mpp_shoot_1d(f, q1, q2, t);
    } catch (const NumericalError&) {
      continue;
    }
    // Relative flatness needs an energy bounded away from zero.
    if (std::abs(sh.energy) < 0.05) continue;
    const MppResult mn = mpp_minimize(f, make_vec({q1}), make_vec({q2}), t, 128);
    rel = std::max(rel, std::abs(sh.action - mn.action) / std::abs(sh.action));
    flat = std::max(flat, mn.max_energy_deviation / std::abs(mn.energy));
    ++done;
  }
  o.check(done == 20, std::to_string(done) + " random instances");
  o.check(rel <= 1e-3, "max relative action gap " + num(rel) + " (<= 1e-3)");
  o.check(flat <= 1e-2, "max energy-profile deviation " + num(flat) + " (<= 1e-2)");
  return o;
}

Outcome criterion6() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const DriftField f = poly({0.0, 1.0, 0.0, -1.0});
  const Region event = Region::box(make_vec({0.0}), make_vec({INFINITY}));
  const RateReport rep =
      rare_event_sweep(f, make_vec({-1.0}), {0.5, 0.25, 0.125}, 1e-2, 10.0, event, 100000, 99, 0.25);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string rates;
  bool increasing = true;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    rates += (i ? ", " : "") + num(rep.rows[i].rate);
    if (i && !(rep.rows[i].rate > rep.rows[i - 1].rate)) increasing = false;
  }
  o.check(increasing, "-eps ln p = " + rates + " increasing");
  const double last = rep.rows.back().rate;
  o.check(last >= 0.15 && last <= 0.30, "eps=0.125 value " + num(last) + " in [0.15, 0.30]");
  o.check(secs <= 600.0, "runtime " + num(secs) + " s");
  return o;
}

Outcome criterion7() {
  Outcome o;
  const MeanSource g = MeanSource::gaussian(0.0, 1.0);
  const CgfTable tab = cgf(g, symmetric_grid(10.0, 4001));
  double e = 0.0;
  for (int i = -200; i <= 200; ++i) {
    const double x = i / 100.0;
    e = std::max(e, std::abs(legendre(tab, x).value - 0.5 * x * x));
  }
  o.check(e <= 1e-6, "max |u*(x) - x^2/2| " + num(e));
  const RateProperties p = rate_properties(tab);
  const double pe = std::max({std::abs(p.argmin), std::abs(p.min), std::abs(p.curvature - 1.0)});
  o.check(pe <= 1e-6, "rate properties error " + num(pe));
  const auto rows = sample_mean_rate(g, {200}, {0.5}, 100000, 11);
  const auto r = rows.front().rate.front();
  o.check(r && std::abs(*r - 0.125) <= 0.03,
          "empirical rate at 0.5 (n=200) " + (r ? num(*r) : std::string("none")));
  return o;
}

Outcome criterion8() {
  Outcome o;
  const DriftField cyc = circle(2.0, {}, {std::sqrt(3.0)});
  const auto period = limit_cycle_period(cyc);
  o.check(period && std::abs(*period - 1.0) <= 1e-8,
          "period " + (period ? num(*period) : std::string("none")));
  const CircleTrace tr = circle_flow(cyc, 0.25, 1.0, 1e-3, 20.0);
  const CurvatureDecayReport rep = curvature_decay_check(tr);
  o.check(rep.final_y <= 1e-3, "y(20) " + num(rep.final_y) + " (<= 1e-3)");
  o.check(rep.non_increasing, "v non-increasing (max rise " + num(rep.max_increase) + ")");
  const DriftField grad = circle(0.0, {}, {-1.0});
  const CircleTrace g = circle_flow(grad, 0.3, 1.0, 1e-3, 20.0);
  double xd = g.x.back();
  xd = std::min(xd, 1.0 - xd);
  const double target = -grad.derivative1(0.0);
  const double ye = std::abs(g.y.back() - target);
  o.check(xd <= 1e-4 && ye <= 1e-4, "gradient case |x - x+| " + num(xd) + ", |y + b'| " + num(ye));
  return o;
}

Outcome criterion9() {
  Outcome o;
  const EpEstimate e0 = entropy_production(ou(), 0.5, PiSource::analytic, 100000, 3);
  o.check(e0.value <= 3.0 * e0.std_error, "e_p(ou) " + num(e0.value) + " +- " + num(e0.std_error));
  const DriftField r = rot_ou(1.0);
  const EpEstimate ea = entropy_production(r, 0.5, PiSource::analytic, 100000, 5);
  o.check(std::abs(ea.value - 2.0) <= 0.1, "e_p(rot_ou) analytic " + num(ea.value));
  const EpEstimate es = entropy_production(r, 0.5, PiSource::sampled, 100000, 6);
  o.check(std::abs(es.value - 2.0) <= 0.2, "e_p(rot_ou) sampled " + num(es.value));

  bool exact = true;
  for (const DriftField& f : {ou(), r, decomposed({{0.0, 0.0, 0.5, 0.0, 0.1}, {0.0, 0.2}, {0.5}}, 0.7)}) {
    const DriftField twice = time_reversed_drift(time_reversed_drift(f));
    for (const Vec& x : domain_lattice(f, 15)) {
      exact = exact && (twice.drift(x).array() == f.drift(x).array()).all();
    }
  }
  o.check(exact, "double reversal exact");

  bool mono = true;
  double worst = 0.0;
  const DriftField quartic = decomposed({{0.0, 0.0, 0.5, 0.0, 0.1}, {0.0, 0.2}, {0.5, 0.0}, {}, {0.05}}, 0.7);
  for (const DriftField& f : {ou(), r, quartic}) {
    for (const Vec& x0 : domain_lattice(f, 5)) {
      if (x0.norm() == 0.0) continue;
      const LyapunovReport rep = lyapunov_check(f, x0 / 3.0, 1e-3, 2.0);
      mono = mono && rep.monotone;
      worst = std::max({worst, rep.uphill_worst, rep.downhill_worst});
    }
  }
  o.check(mono, "Lyapunov monotone (worst violation " + num(worst) + ")");
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
  std::size_t nb = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++nb;
  if (names.size() != nb) {
    why = "file count differs";
    return false;
  }
  for (const auto& n : names) {
    if (slurp(a / n) != slurp(b / n)) {
      why = n + " differs";
      return false;
    }
  }
  return true;
}

Outcome criterion10() {
  Outcome o;
  using nlohmann::json;
  const fs::path root = fs::temp_directory_path() / "fwkit_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const json ou1 = {{"kind", "ou"}, {"b_coef", 1.0}};
  const json dw = {{"kind", "poly1d"}, {"coeffs", {0.0, 1.0, 0.0, -1.0}}};
  const json cyc = {{"kind", "circle"}, {"b0", 2.0}, {"c", {std::sqrt(3.0)}}};
  const json rot = {{"kind", "rot_ou"}, {"omega", 1.0}};
  const std::vector<std::pair<std::string, json>> runs = {
      {"simulate", {{"field", dw}, {"sim", {{"eps", 0.1}, {"dt", 0.01}, {"T", 2.0}, {"x0", -1.0}, {"paths", 3}}}}},
      {"rate-mc",
       {{"field", dw},
        {"sim", {{"dt", 0.01}, {"T", 2.0}, {"N", 2000}, {"x0", -1.0}}},
        {"eps_list", {0.5, 0.25}},
        {"event", {{"kind", "box"}, {"lo", {0.0}}, {"hi", {nullptr}}}}}},
      {"hamilton", {{"field", rot}, {"hamilton", {{"q0", {1.0, 0.0}}, {"p0", {0.1, 0.2}}, {"T", 1.0}}}}},
      {"phase-portrait", {{"field", dw}, {"phase", {{"energies", {0.0, 0.05}}}}}},
      {"mpp", {{"field", dw}, {"mpp", {{"q1", -1.0}, {"q2", -0.2}, {"T", 2.0}, {"knots", 32}}}}},
      {"hje",
       {{"field", ou1},
        {"grid", {{"min", -6}, {"max", 6}, {"n", 101}}},
        {"hje", {{"T", 0.5}, {"snapshots", 3}, {"u0", {{"kind", "quadratic"}, {"mu", 3.0}, {"sigma2", 2.0}}}}}}},
      {"stationary", {{"field", dw}, {"grid", {{"min", -1.5}, {"max", 1.5}, {"n", 101}}}}},
      {"oracle", {{"field", ou1}, {"oracle", {{"mu0", 3.0}, {"sigma2_0", 2.0}, {"times", {0.0, 0.5, 1.0}}}}}},
      {"legendre", {{"source", {{"kind", "bernoulli"}, {"p", 0.3}}}, {"legendre", {{"x", {0.1, 0.3, 0.6}}}}}},
      {"lln",
       {{"source", {{"kind", "gaussian"}}},
        {"lln", {{"n_list", {10, 50}}, {"x", {0.0, 0.5}}, {"M", 5000}}}}},
      {"circle", {{"field", cyc}, {"circle", {{"x0", 0.25}, {"T", 2.0}}}}},
      {"torus", {{"field", cyc}}},
      {"entropy", {{"field", rot}, {"entropy", {{"eps", 0.5}, {"pi_source", "sampled"}, {"N", 5000}}}}},
      {"reverse", {{"field", rot}, {"reverse", {{"landscape", {{"x0", {0.5, 0.2}}}}}}}},
      {"lorentz", {{"field", rot}, {"hamilton", {{"q0", {1.0, 0.0}}, {"p0", {0.1, 0.2}}, {"T", 1.0}}}}},
  };
  int ok = 0;
  std::string failures;
  for (const auto& [cmd, cfg] : runs) {
    const fs::path dir = root / cmd;
    fs::create_directories(dir);
    {
      std::ofstream(dir / "config.json") << cfg.dump(2);
    }
    const std::string a = (dir / "a").string(), b = (dir / "b").string(), c = (dir / "c").string();
    const int ra = cli::run({cmd, "--config", (dir / "config.json").string(), "--out", a, "--seed", "42"});
    const int rb = cli::run({cmd, "--config", (dir / "config.json").string(), "--out", b, "--seed", "42"});
    // Re-execution from the manifest, with a different thread count.
    setenv("FWKIT_THREADS", "3", 1);
    const int rc = cli::run({cmd, "--config", a + "/manifest.json", "--out", c});
    unsetenv("FWKIT_THREADS");
    std::string why;
    if (ra != 0 || rb != 0 || rc != 0) {
      why = "exit codes " + std::to_string(ra) + "/" + std::to_string(rb) + "/" + std::to_string(rc);
    } else if (same_tree(a, b, why) && same_tree(a, c, why)) {
      ++ok;
      continue;
    }
    failures += " " + cmd + "(" + why + ")";
  }
  o.check(ok == static_cast<int>(runs.size()),
          std::to_string(ok) + "/" + std::to_string(runs.size()) + " subcommands byte-identical" + failures);
  fs::remove_all(root);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> all = {
      {"HJE Gaussian oracle", criterion1},     {"modal dynamics", criterion2},
      {"stationary solution", criterion3},     {"mechanics conservation", criterion4},
      {"MPP cross-validation", criterion5},    {"rare-event trend", criterion6},
      {"Legendre toolkit", criterion7},        {"circle", criterion8},
      {"nonequilibrium", criterion9},          {"determinism", criterion10},
  };
  int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = all[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << " [" << all[i].first
              << ", " << num(secs) << " s] " << o.detail << std::endl;
    if (!o.pass) ++failed;
  }
  return failed ? 1 : 0;
}
