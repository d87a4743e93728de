// Cumulant generating functions, their Legendre transforms, and empirical
// large-deviation rates of iid sample means.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fwkit {

/// Distribution of one summand X.
struct MeanSource {
  enum class Kind { gaussian, bernoulli, point, samples };
  Kind kind = Kind::gaussian;
  double mean = 0.0;      // gaussian mean / point location
  double variance = 1.0;  // gaussian variance
  double p = 0.5;         // bernoulli success probability
  std::vector<double> data;

  static MeanSource gaussian(double mean, double variance);
  static MeanSource bernoulli(double p);
  static MeanSource point(double at);
  static MeanSource empirical(std::vector<double> data);

  std::string describe() const;
};

struct CgfTable {
  std::vector<double> theta;
  std::vector<double> lambda;
  MeanSource source;
};

/// Symmetric uniform theta grid [-theta_max, theta_max] with n points (n odd
/// so that theta = 0 is a node).
std::vector<double> symmetric_grid(double theta_max, int n);

/// lambda(theta) = ln E[exp(theta X)] on the grid.
CgfTable cgf(const MeanSource& source, const std::vector<double>& theta);

/// Closed-form lambda for gaussian, bernoulli and point sources.
double cgf_value(const MeanSource& source, double theta);

struct LegendreValue {
  double value = 0.0;
  double theta_star = 0.0;
  /// The supremum sat on the edge of the theta grid.
  bool unreliable = false;
};

/// sup_theta { x theta - lambda(theta) } over the table with parabolic
/// refinement around the best node.
LegendreValue legendre(const CgfTable& table, double x);

struct RateProperties {
  double argmin = 0.0;
  double min = 0.0;
  double curvature = 0.0;
};

/// argmin = lambda'(0), min = -lambda(0), curvature = 1 / lambda''(0).
RateProperties rate_properties(const CgfTable& table);

struct EmpiricalRateRow {
  int n = 0;
  std::vector<double> x;
  /// -(1/n) ln f_n(x); empty where the bin received no samples.
  std::vector<std::optional<double>> rate;
  /// Tilt used for each x (0 when sampling the untilted law).
  std::vector<double> tilt;
  bool degenerate = false;
};

struct SampleMeanOptions {
  /// Bin width of the density estimate around each x. Zero picks the grid
  /// spacing (or 0.01 for a single point).
  double bin_width = 0.0;
  /// Sample under the exponentially tilted law centred on x when the source
  /// has a closed-form tilt; otherwise histogram the plain sample means.
  bool tilt = true;
};

/// Density of the mean of n iid draws at each x from M batches, reported as
/// -(1/n) ln f. Batch m of row n uses generator key (seed, n, m).
std::vector<EmpiricalRateRow> sample_mean_rate(const MeanSource& source,
                                               const std::vector<int>& n_list,
                                               const std::vector<double>& x_grid, long long M,
                                               std::uint64_t seed,
                                               const SampleMeanOptions& opts = {});

}  // namespace fwkit
