// Core value types and the error hierarchy shared by every module.
#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace fwkit {

/// Catalog fields live on the line, the plane or the circle, so points never
/// exceed two components. The fixed upper bound keeps Vec off the heap in the
/// Monte Carlo inner loops.
inline constexpr int kMaxDim = 2;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                          kMaxDim, kMaxDim>;

/// Bad input: malformed specification, precondition violated by the caller.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation that could not produce a finite or converged answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// State left the finite numbers during time stepping.
class BlowUpError : public NumericalError {
 public:
  BlowUpError(const std::string& what, long long step)
      : NumericalError(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long long step() const { return step_; }

 private:
  long long step_;
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }

inline Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline Vec vec_from(const std::vector<double>& xs) {
  if (xs.empty() || xs.size() > static_cast<std::size_t>(kMaxDim)) {
    throw ConfigError("point must have 1 or 2 components");
  }
  Vec v(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) v(static_cast<Eigen::Index>(i)) = xs[i];
  return v;
}

inline std::vector<double> to_std(const Vec& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace fwkit
