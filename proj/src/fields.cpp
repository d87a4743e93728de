#include "fwkit/fields.hpp"

#include <cmath>
#include <numbers>

namespace fwkit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw ConfigError(what + ": non-finite parameter");
}

// Horner evaluation of sum c_k x^k and its first two derivatives.
void poly_eval(const std::vector<double>& c, double x, double& f, double& df, double& d2f) {
  f = df = d2f = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) {
    d2f = d2f * x + 2.0 * df;
    df = df * x + f;
    f = f * x + c[k];
  }
}

// Partial derivatives of U(x, y) = sum c_ij x^i y^j up to second order.
struct PotentialDerivs {
  double u = 0, ux = 0, uy = 0, uxx = 0, uxy = 0, uyy = 0;
};

PotentialDerivs potential_derivs(const std::vector<std::vector<double>>& c, double x, double y) {
  PotentialDerivs d;
  auto pw = [](double base, int e) { return e < 0 ? 0.0 : std::pow(base, e); };
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j < c[i].size(); ++j) {
      const double a = c[i][j];
      if (a == 0.0) continue;
      const int ii = static_cast<int>(i);
      const int jj = static_cast<int>(j);
      d.u += a * pw(x, ii) * pw(y, jj);
      d.ux += a * ii * pw(x, ii - 1) * pw(y, jj);
      d.uy += a * jj * pw(x, ii) * pw(y, jj - 1);
      d.uxx += a * ii * (ii - 1) * pw(x, ii - 2) * pw(y, jj);
      d.uxy += a * ii * jj * pw(x, ii - 1) * pw(y, jj - 1);
      d.uyy += a * jj * (jj - 1) * pw(x, ii) * pw(y, jj - 2);
    }
  }
  return d;
}

// Fractional part snapped to multiples of 2^-52, the resolution of [1, 2), so
// that theta and fl(theta + 1) land on the same point.
double wrap_unit(double t) {
  constexpr double kScale = 4503599627370496.0;  // 2^52
  double f = t - std::floor(t);
  f = std::nearbyint(f * kScale) / kScale;
  return f >= 1.0 ? 0.0 : f;
}

void circle_eval(const FieldSpec& s, double theta, double& b, double& db, double& d2b) {
  const double t = wrap_unit(theta);
  b = s.b0;
  db = d2b = 0.0;
  const std::size_t n = std::max(s.cos_coeffs.size(), s.sin_coeffs.size());
  for (std::size_t k = 0; k < n; ++k) {
    const double w = kTwoPi * static_cast<double>(k + 1);
    const double a = k < s.cos_coeffs.size() ? s.cos_coeffs[k] : 0.0;
    const double c = k < s.sin_coeffs.size() ? s.sin_coeffs[k] : 0.0;
    const double cs = std::cos(w * t);
    const double sn = std::sin(w * t);
    b += a * cs + c * sn;
    db += w * (-a * sn + c * cs);
    d2b += -w * w * (a * cs + c * sn);
  }
}

}  // namespace

std::string to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::ou: return "ou";
    case FieldKind::poly1d: return "poly1d";
    case FieldKind::circle: return "circle";
    case FieldKind::rot_ou: return "rot_ou";
    case FieldKind::decomposed2d: return "decomposed2d";
    case FieldKind::custom: return "custom";
  }
  return "unknown";
}

std::string to_string(Domain domain) {
  switch (domain) {
    case Domain::line: return "line";
    case Domain::plane: return "plane";
    case Domain::circle: return "circle";
  }
  return "unknown";
}

DriftField build_field(const FieldSpec& spec) {
  DriftField f;
  f.spec_ = spec;
  require_finite(spec.half_width, "half_width");
  if (spec.half_width <= 0.0) throw ConfigError("half_width: must be positive");
  switch (spec.kind) {
    case FieldKind::ou:
      require_finite(spec.b_coef, "b_coef");
      if (spec.b_coef <= 0.0) throw ConfigError("b_coef: must be positive");
      f.dim_ = 1;
      f.domain_ = Domain::line;
      break;
    case FieldKind::poly1d:
      if (spec.coeffs.empty()) throw ConfigError("coeffs: empty coefficient list");
      for (double c : spec.coeffs) require_finite(c, "coeffs");
      f.dim_ = 1;
      f.domain_ = Domain::line;
      break;
    case FieldKind::circle:
      require_finite(spec.b0, "b0");
      for (double c : spec.cos_coeffs) require_finite(c, "a");
      for (double c : spec.sin_coeffs) require_finite(c, "c");
      f.dim_ = 1;
      f.domain_ = Domain::circle;
      break;
    case FieldKind::rot_ou:
      require_finite(spec.omega, "omega");
      f.dim_ = 2;
      f.domain_ = Domain::plane;
      break;
    case FieldKind::decomposed2d: {
      require_finite(spec.gamma, "gamma");
      if (spec.potential.empty()) throw ConfigError("U: empty coefficient table");
      bool any = false;
      for (std::size_t i = 0; i < spec.potential.size(); ++i) {
        for (std::size_t j = 0; j < spec.potential[i].size(); ++j) {
          require_finite(spec.potential[i][j], "U");
          if (spec.potential[i][j] != 0.0 && i + j > 4) {
            throw ConfigError("U: degree above 4");
          }
          any = true;
        }
      }
      if (!any) throw ConfigError("U: empty coefficient table");
      f.dim_ = 2;
      f.domain_ = Domain::plane;
      break;
    }
    case FieldKind::custom:
      throw ConfigError("kind: custom fields are built with DriftField::from_function");
  }
  return f;
}

DriftField DriftField::from_function(int dim, Domain domain, Fn drift, double half_width) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("dim: must be 1 or 2");
  if (!drift) throw ConfigError("custom field: empty evaluator");
  DriftField f;
  f.spec_.kind = FieldKind::custom;
  f.spec_.half_width = half_width;
  f.dim_ = dim;
  f.domain_ = domain;
  f.custom_ = std::move(drift);
  return f;
}

double DriftField::drift1(double x) const {
  switch (spec_.kind) {
    case FieldKind::ou: return -spec_.b_coef * x;
    case FieldKind::poly1d: {
      double r = 0.0;
      for (std::size_t k = spec_.coeffs.size(); k-- > 0;) r = r * x + spec_.coeffs[k];
      return r;
    }
    case FieldKind::circle: {
      double b, db, d2b;
      circle_eval(spec_, x, b, db, d2b);
      return b;
    }
    default: return drift(make_vec({x}))(0);
  }
}

Vec DriftField::drift(const Vec& x) const {
  switch (spec_.kind) {
    case FieldKind::ou:
    case FieldKind::poly1d:
    case FieldKind::circle: {
      Vec r(1);
      r(0) = drift1(x(0));
      return r;
    }
    case FieldKind::rot_ou: {
      const double w = spec_.omega;
      return make_vec({-x(0) + w * x(1), -x(1) - w * x(0)});
    }
    case FieldKind::decomposed2d: {
      const auto d = potential_derivs(spec_.potential, x(0), x(1));
      const double g = spec_.gamma;
      return make_vec({-d.ux + g * d.uy, -d.uy - g * d.ux});
    }
    case FieldKind::custom: return custom_(x);
  }
  return x;
}

Mat DriftField::jacobian(const Vec& x) const {
  Mat j(dim_, dim_);
  switch (spec_.kind) {
    case FieldKind::ou:
    case FieldKind::poly1d:
    case FieldKind::circle:
      j(0, 0) = derivative1(x(0));
      return j;
    case FieldKind::rot_ou: {
      const double w = spec_.omega;
      j << -1.0, w, -w, -1.0;
      return j;
    }
    case FieldKind::decomposed2d: {
      const auto d = potential_derivs(spec_.potential, x(0), x(1));
      const double g = spec_.gamma;
      // b_x = -U_x + g U_y, b_y = -U_y - g U_x
      j << -d.uxx + g * d.uxy, -d.uxy + g * d.uyy,
           -d.uxy - g * d.uxx, -d.uyy - g * d.uxy;
      return j;
    }
    case FieldKind::custom: return finite_difference_jacobian(*this, x);
  }
  return j;
}

double DriftField::divergence(const Vec& x) const { return jacobian(x).trace(); }

double DriftField::derivative1(double x) const {
  if (dim_ != 1) throw ConfigError("derivative1: field is not one-dimensional");
  switch (spec_.kind) {
    case FieldKind::ou: return -spec_.b_coef;
    case FieldKind::poly1d: {
      double f, df, d2f;
      poly_eval(spec_.coeffs, x, f, df, d2f);
      return df;
    }
    case FieldKind::circle: {
      double b, db, d2b;
      circle_eval(spec_, x, b, db, d2b);
      return db;
    }
    default: return finite_difference_jacobian(*this, make_vec({x}))(0, 0);
  }
}

double DriftField::second_derivative1(double x) const {
  if (dim_ != 1) throw ConfigError("second_derivative1: field is not one-dimensional");
  switch (spec_.kind) {
    case FieldKind::ou: return 0.0;
    case FieldKind::poly1d: {
      double f, df, d2f;
      poly_eval(spec_.coeffs, x, f, df, d2f);
      return d2f;
    }
    case FieldKind::circle: {
      double b, db, d2b;
      circle_eval(spec_, x, b, db, d2b);
      return d2b;
    }
    default: {
      const double h = std::max(1e-4, 1e-4 * std::abs(x));
      return (drift1(x + h) - 2.0 * drift1(x) + drift1(x - h)) / (h * h);
    }
  }
}

bool DriftField::has_decomposition() const {
  return spec_.kind == FieldKind::ou || spec_.kind == FieldKind::rot_ou ||
         spec_.kind == FieldKind::decomposed2d;
}

double DriftField::potential(const Vec& x) const {
  switch (spec_.kind) {
    case FieldKind::ou: return 0.5 * spec_.b_coef * x(0) * x(0);
    case FieldKind::rot_ou: return 0.5 * x.squaredNorm();
    case FieldKind::decomposed2d: return potential_derivs(spec_.potential, x(0), x(1)).u;
    default: throw ConfigError("field " + to_string(spec_.kind) + " declares no decomposition");
  }
}

Vec DriftField::grad_potential(const Vec& x) const {
  switch (spec_.kind) {
    case FieldKind::ou: return make_vec({spec_.b_coef * x(0)});
    case FieldKind::rot_ou: return x;
    case FieldKind::decomposed2d: {
      const auto d = potential_derivs(spec_.potential, x(0), x(1));
      return make_vec({d.ux, d.uy});
    }
    default: throw ConfigError("field " + to_string(spec_.kind) + " declares no decomposition");
  }
}

Vec DriftField::rotational(const Vec& x) const {
  switch (spec_.kind) {
    case FieldKind::ou: return Vec::Zero(1);
    case FieldKind::rot_ou: return spec_.omega * make_vec({x(1), -x(0)});
    case FieldKind::decomposed2d: {
      const auto d = potential_derivs(spec_.potential, x(0), x(1));
      return spec_.gamma * make_vec({d.uy, -d.ux});
    }
    default: throw ConfigError("field " + to_string(spec_.kind) + " declares no decomposition");
  }
}

Vec DriftField::wrap(const Vec& x) const {
  if (domain_ != Domain::circle) return x;
  Vec r = x;
  r(0) = wrap_unit(x(0));
  return r;
}

Mat finite_difference_jacobian(const DriftField& field, const Vec& x) {
  const int n = field.dim();
  Mat j(n, n);
  for (int c = 0; c < n; ++c) {
    const double h = std::max(1e-6, 1e-6 * std::abs(x(c)));
    Vec xp = x, xm = x;
    xp(c) += h;
    xm(c) -= h;
    j.col(c) = (field.drift(xp) - field.drift(xm)) / (2.0 * h);
  }
  return j;
}

Mat eval_jacobian(const DriftField& field, const Vec& x) {
  if (x.size() != field.dim() || !x.allFinite()) {
    throw ConfigError("eval_jacobian: point must be finite with dimension " +
                      std::to_string(field.dim()));
  }
  Mat j = field.jacobian(x);
  if (!j.allFinite()) throw NumericalError("eval_jacobian: non-finite result");
  return j;
}

double curl_component(const DriftField& field, const Vec& x, int i, int j) {
  if (field.dim() < 2) throw ConfigError("curl_component: field dimension must be at least 2");
  if (i < 0 || j < 0 || i >= field.dim() || j >= field.dim()) {
    throw ConfigError("curl_component: index out of range");
  }
  const Mat jac = eval_jacobian(field, x);
  return jac(i, j) - jac(j, i);
}

DecompositionReport check_decomposition(const DriftField& field, const std::vector<Vec>& samples,
                                        double tol) {
  if (!field.has_decomposition()) {
    throw ConfigError("check_decomposition: field " + to_string(field.kind()) +
                      " declares no decomposition");
  }
  DecompositionReport rep;
  for (const Vec& x : samples) {
    if (!x.allFinite()) throw ConfigError("check_decomposition: non-finite sample");
    const Vec grad = field.grad_potential(x);
    const Vec ell = field.rotational(x);
    rep.max_reconstruction_residual = std::max(
        rep.max_reconstruction_residual, (field.drift(x) - (-grad + ell)).lpNorm<Eigen::Infinity>());
    rep.max_orthogonality_residual =
        std::max(rep.max_orthogonality_residual, std::abs(ell.dot(grad)));
  }
  rep.within_tolerance =
      rep.max_reconstruction_residual <= tol && rep.max_orthogonality_residual <= tol;
  return rep;
}

std::vector<Vec> domain_lattice(const DriftField& field, int per_axis) {
  std::vector<Vec> pts;
  const double lo = field.domain_lo();
  const double hi = field.domain_hi();
  const bool periodic = field.domain() == Domain::circle;
  const double step = periodic ? (hi - lo) / per_axis : (hi - lo) / (per_axis - 1);
  if (field.dim() == 1) {
    for (int i = 0; i < per_axis; ++i) pts.push_back(make_vec({lo + i * step}));
  } else {
    for (int i = 0; i < per_axis; ++i) {
      for (int k = 0; k < per_axis; ++k) pts.push_back(make_vec({lo + i * step, lo + k * step}));
    }
  }
  return pts;
}

namespace {

double get_number(const nlohmann::json& j, const std::string& key, const std::string& path,
                  double fallback, bool required) {
  if (!j.contains(key)) {
    if (required) throw ConfigError("config: " + path + "." + key + ": missing");
    return fallback;
  }
  if (!j.at(key).is_number()) throw ConfigError("config: " + path + "." + key + ": not a number");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw ConfigError("config: " + path + "." + key + ": non-finite");
  return v;
}

std::vector<double> get_list(const nlohmann::json& j, const std::string& key,
                             const std::string& path, bool required) {
  if (!j.contains(key)) {
    if (required) throw ConfigError("config: " + path + "." + key + ": missing");
    return {};
  }
  const auto& a = j.at(key);
  if (!a.is_array()) throw ConfigError("config: " + path + "." + key + ": not an array");
  std::vector<double> out;
  for (const auto& v : a) {
    if (!v.is_number()) throw ConfigError("config: " + path + "." + key + ": not a number");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

FieldSpec field_spec_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError("config: " + path + ": not an object");
  if (!j.contains("kind") || !j.at("kind").is_string()) {
    throw ConfigError("config: " + path + ".kind: missing");
  }
  FieldSpec s;
  const std::string kind = j.at("kind").get<std::string>();
  s.half_width = get_number(j, "L", path, 3.0, false);
  if (kind == "ou") {
    s.kind = FieldKind::ou;
    s.b_coef = get_number(j, "b_coef", path, 1.0, true);
  } else if (kind == "poly1d") {
    s.kind = FieldKind::poly1d;
    s.coeffs = get_list(j, "coeffs", path, true);
  } else if (kind == "circle") {
    s.kind = FieldKind::circle;
    s.b0 = get_number(j, "b0", path, 0.0, false);
    s.cos_coeffs = get_list(j, "a", path, false);
    s.sin_coeffs = get_list(j, "c", path, false);
  } else if (kind == "rot_ou") {
    s.kind = FieldKind::rot_ou;
    s.omega = get_number(j, "omega", path, 0.0, true);
  } else if (kind == "decomposed2d") {
    s.kind = FieldKind::decomposed2d;
    s.gamma = get_number(j, "gamma", path, 0.0, false);
    if (!j.contains("U") || !j.at("U").is_array()) {
      throw ConfigError("config: " + path + ".U: missing");
    }
    for (const auto& row : j.at("U")) {
      if (!row.is_array()) throw ConfigError("config: " + path + ".U: rows must be arrays");
      std::vector<double> r;
      for (const auto& v : row) {
        if (!v.is_number()) throw ConfigError("config: " + path + ".U: not a number");
        r.push_back(v.get<double>());
      }
      s.potential.push_back(std::move(r));
    }
  } else {
    throw ConfigError("config: " + path + ".kind: unknown kind '" + kind + "'");
  }
  try {
    (void)build_field(s);
  } catch (const ConfigError& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  return s;
}

nlohmann::json field_spec_to_json(const FieldSpec& s) {
  nlohmann::json j;
  j["kind"] = to_string(s.kind);
  switch (s.kind) {
    case FieldKind::ou: j["b_coef"] = s.b_coef; break;
    case FieldKind::poly1d: j["coeffs"] = s.coeffs; break;
    case FieldKind::circle:
      j["b0"] = s.b0;
      j["a"] = s.cos_coeffs;
      j["c"] = s.sin_coeffs;
      break;
    case FieldKind::rot_ou: j["omega"] = s.omega; break;
    case FieldKind::decomposed2d:
      j["U"] = s.potential;
      j["gamma"] = s.gamma;
      break;
    case FieldKind::custom: break;
  }
  if (s.kind != FieldKind::circle) j["L"] = s.half_width;
  return j;
}

}  // namespace fwkit
