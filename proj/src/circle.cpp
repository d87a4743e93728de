#include "fwkit/circle.hpp"

#include "fwkit/quadrature.hpp"
#include "fwkit/simulate.hpp"

#include <cmath>

namespace fwkit {

namespace {

void require_circle(const DriftField& field, const char* who) {
  if (field.domain() != Domain::circle) throw ConfigError(std::string(who) + ": circle field required");
}

}  // namespace

CircleTrace circle_flow(const DriftField& field, double x0, double y0, double dt, double T) {
  require_circle(field, "circle_flow");
  if (!(y0 >= 0.0)) throw ConfigError("circle_flow: y0 must be non-negative");
  const long long steps = step_count(dt, T);

  auto rhs = [&](double x, double y, double& dx, double& dy) {
    dx = field.drift1(x);
    dy = -2.0 * (field.derivative1(x) + y) * y;
  };

  CircleTrace tr;
  auto wrap = [&](double v) { return field.wrap(make_vec({v}))(0); };
  double x = wrap(x0);
  double y = y0;
  tr.t.push_back(0.0);
  tr.x.push_back(x);
  tr.y.push_back(y);
  for (long long k = 0; k < steps; ++k) {
    double ax, ay, bx, by, cx, cy, dx, dy;
    rhs(x, y, ax, ay);
    rhs(x + 0.5 * dt * ax, y + 0.5 * dt * ay, bx, by);
    rhs(x + 0.5 * dt * bx, y + 0.5 * dt * by, cx, cy);
    rhs(x + dt * cx, y + dt * cy, dx, dy);
    x += dt / 6.0 * (ax + 2.0 * bx + 2.0 * cx + dx);
    y += dt / 6.0 * (ay + 2.0 * by + 2.0 * cy + dy);
    x = wrap(x);
    if (!std::isfinite(x) || !std::isfinite(y)) {
      throw BlowUpError("circle_flow: curvature became non-finite", k + 1);
    }
    tr.t.push_back(static_cast<double>(k + 1) * dt);
    tr.x.push_back(x);
    tr.y.push_back(y);
  }

  const double b_start = field.drift1(tr.x.front());
  bool one_sign = b_start != 0.0;
  for (std::size_t k = 0; k < tr.x.size() && one_sign; ++k) {
    const double b = field.drift1(tr.x[k]);
    if (b == 0.0 || (b > 0.0) != (b_start > 0.0)) one_sign = false;
  }
  if (one_sign) {
    tr.has_phi = true;
    const double l0 = std::log(std::abs(b_start));
    for (std::size_t k = 0; k < tr.x.size(); ++k) {
      const double phi = std::log(std::abs(field.drift1(tr.x[k]))) - l0;
      tr.phi.push_back(phi);
      tr.v.push_back(tr.y[k] * std::exp(2.0 * phi));
    }
  }
  return tr;
}

std::optional<double> limit_cycle_period(const DriftField& field) {
  require_circle(field, "limit_cycle_period");
  constexpr int kScan = 4096;
  double lo = std::abs(field.drift1(0.0));
  const double sign0 = field.drift1(0.0);
  for (int i = 0; i <= kScan; ++i) {
    const double b = field.drift1(static_cast<double>(i) / kScan);
    if (b == 0.0 || (b > 0.0) != (sign0 > 0.0)) return std::nullopt;
    lo = std::min(lo, std::abs(b));
  }
  if (!(lo > 0.0)) return std::nullopt;
  return adaptive_simpson([&](double t) { return 1.0 / std::abs(field.drift1(t)); }, 0.0, 1.0,
                          1e-13);
}

CurvatureDecayReport curvature_decay_check(const CircleTrace& trace) {
  if (!trace.has_phi) {
    throw ConfigError("curvature_decay_check: b vanishes or changes sign along the trace");
  }
  CurvatureDecayReport rep;
  for (std::size_t k = 1; k < trace.v.size(); ++k) {
    rep.max_increase = std::max(rep.max_increase, trace.v[k] - trace.v[k - 1]);
  }
  rep.non_increasing = rep.max_increase <= 1e-8;
  rep.final_y = trace.y.back();
  rep.final_v = trace.v.back();
  return rep;
}

DriftField torus_field(double b0, const std::vector<double>& alpha,
                       const std::vector<double>& beta) {
  constexpr double kTwoPi = 6.283185307179586;
  FieldSpec s;
  s.kind = FieldKind::circle;
  s.b0 = b0;
  const std::size_t n = std::max(alpha.size(), beta.size());
  s.cos_coeffs.assign(n, 0.0);
  s.sin_coeffs.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = kTwoPi * static_cast<double>(k + 1);
    if (k < beta.size()) s.cos_coeffs[k] = -w * beta[k];
    if (k < alpha.size()) s.sin_coeffs[k] = w * alpha[k];
  }
  return build_field(s);
}

std::vector<TorusFixedPoint> torus_fixed_points(const DriftField& field) {
  require_circle(field, "torus_fixed_points");
  constexpr int kScan = 4096;
  std::vector<TorusFixedPoint> out;

  auto scan = [&](auto g, int family) {
    double ga = g(0.0);
    for (int i = 0; i < kScan; ++i) {
      const double a = static_cast<double>(i) / kScan;
      const double b = static_cast<double>(i + 1) / kScan;
      const double gb = g(b);
      double root = -1.0;
      if (ga == 0.0) {
        root = a;
      } else if (gb != 0.0 && (ga < 0.0) != (gb < 0.0)) {
        root = bisect_root(g, a, b, 1e-10);
      }
      if (root >= 0.0) {
        TorusFixedPoint fp;
        fp.theta = root;
        fp.family = family;
        fp.omega = family == 1 ? 0.0 : -field.drift1(root) / 2.0;
        const double db = field.derivative1(root);
        const double ev = db * db - 2.0 * fp.omega * field.second_derivative1(root);
        const double tol = 1e-10 * (1.0 + db * db);
        fp.type = ev > tol ? EquilibriumType::saddle
                           : (ev < -tol ? EquilibriumType::center : EquilibriumType::degenerate);
        out.push_back(fp);
      }
      ga = gb;
    }
  };
  // U' - b0 = -b and U'' = -b'.
  scan([&](double t) { return field.drift1(t); }, 1);
  scan([&](double t) { return field.derivative1(t); }, 2);
  return out;
}

}  // namespace fwkit
