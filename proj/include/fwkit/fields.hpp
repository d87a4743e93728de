// Drift fields b(x) built from a small declarative catalog.
#pragma once

#include "fwkit/types.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fwkit {

enum class FieldKind { ou, poly1d, circle, rot_ou, decomposed2d, custom };
enum class Domain { line, plane, circle };

std::string to_string(FieldKind kind);
std::string to_string(Domain domain);

/// Declarative description of a catalog drift field.
///
///   ou            b(x) = -b_coef x
///   poly1d        b(x) = sum_k coeffs[k] x^k
///   circle        b(t) = b0 + sum_k a[k] cos(2 pi (k+1) t) + c[k] sin(2 pi (k+1) t)
///   rot_ou        b(x, y) = (-x + omega y, -y - omega x)
///   decomposed2d  b = -grad U + gamma R grad U,  R(u, v) = (v, -u),
///                 U(x, y) = sum potential[i][j] x^i y^j with i + j <= 4
struct FieldSpec {
  FieldKind kind = FieldKind::ou;
  double b_coef = 1.0;
  std::vector<double> coeffs;
  double b0 = 0.0;
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;
  double omega = 0.0;
  std::vector<std::vector<double>> potential;
  double gamma = 0.0;
  /// Half-width of the default line/plane domain [-L, L]^dim.
  double half_width = 3.0;
};

/// Evaluators for one drift field. Cheap to copy; all methods are const and
/// reentrant.
class DriftField {
 public:
  using Fn = std::function<Vec(const Vec&)>;

  /// Field from an arbitrary evaluator; Jacobian by central differences.
  static DriftField from_function(int dim, Domain domain, Fn drift, double half_width = 3.0);

  int dim() const { return dim_; }
  Domain domain() const { return domain_; }
  FieldKind kind() const { return spec_.kind; }
  const FieldSpec& spec() const { return spec_; }

  Vec drift(const Vec& x) const;
  /// Scalar drift for 1-D fields; avoids Vec construction in hot loops.
  double drift1(double x) const;
  /// Analytic Jacobian when the kind has one, central differences otherwise.
  Mat jacobian(const Vec& x) const;
  bool has_analytic_jacobian() const { return spec_.kind != FieldKind::custom; }
  double divergence(const Vec& x) const;
  /// b'(x) and b''(x) for 1-D fields.
  double derivative1(double x) const;
  double second_derivative1(double x) const;

  /// True for ou (ell = 0), rot_ou and decomposed2d.
  bool has_decomposition() const;
  double potential(const Vec& x) const;
  Vec grad_potential(const Vec& x) const;
  /// The declared non-gradient part ell (0 for ou, gamma R grad U otherwise).
  Vec rotational(const Vec& x) const;

  /// Default sampling box: [-L, L]^dim for line/plane, [0, 1) for the circle.
  double domain_lo() const { return domain_ == Domain::circle ? 0.0 : -spec_.half_width; }
  double domain_hi() const { return domain_ == Domain::circle ? 1.0 : spec_.half_width; }

  /// Maps a state back into the domain (mod 1 on the circle).
  Vec wrap(const Vec& x) const;

 private:
  friend DriftField build_field(const FieldSpec& spec);
  DriftField() = default;

  FieldSpec spec_;
  int dim_ = 1;
  Domain domain_ = Domain::line;
  Fn custom_;
};

/// Validates a spec and returns the corresponding field. Throws ConfigError
/// for an empty coefficient list, a non-finite parameter or a potential
/// table of degree above 4.
DriftField build_field(const FieldSpec& spec);

/// J[i][j] = d b_i / d x_j. Central difference with step
/// h = max(1e-6, 1e-6 |x|) for fields without an analytic Jacobian.
Mat eval_jacobian(const DriftField& field, const Vec& x);
Mat finite_difference_jacobian(const DriftField& field, const Vec& x);

/// d b_i / d x_j - d b_j / d x_i.
double curl_component(const DriftField& field, const Vec& x, int i, int j);

struct DecompositionReport {
  double max_reconstruction_residual = 0.0;  // |b - (-grad U + ell)|
  double max_orthogonality_residual = 0.0;   // |ell . grad U|
  bool within_tolerance = true;
};

DecompositionReport check_decomposition(const DriftField& field, const std::vector<Vec>& samples,
                                        double tol);

/// Regular n^dim lattice over the default domain, used by property checks.
std::vector<Vec> domain_lattice(const DriftField& field, int per_axis);

FieldSpec field_spec_from_json(const nlohmann::json& j, const std::string& path = "field");
nlohmann::json field_spec_to_json(const FieldSpec& spec);

}  // namespace fwkit
