#include "fwkit/ratefn.hpp"

#include "fwkit/parallel.hpp"
#include "fwkit/rng.hpp"
#include "fwkit/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fwkit {

MeanSource MeanSource::gaussian(double mean, double variance) {
  if (!std::isfinite(mean) || !(variance > 0.0)) {
    throw ConfigError("gaussian source: need finite mean and positive variance");
  }
  MeanSource s;
  s.kind = Kind::gaussian;
  s.mean = mean;
  s.variance = variance;
  return s;
}

MeanSource MeanSource::bernoulli(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("bernoulli source: p must lie in (0, 1)");
  MeanSource s;
  s.kind = Kind::bernoulli;
  s.p = p;
  return s;
}

MeanSource MeanSource::point(double at) {
  if (!std::isfinite(at)) throw ConfigError("point source: location must be finite");
  MeanSource s;
  s.kind = Kind::point;
  s.mean = at;
  return s;
}

MeanSource MeanSource::empirical(std::vector<double> data) {
  if (data.empty()) throw ConfigError("samples source: empty sample set");
  for (double v : data) {
    if (!std::isfinite(v)) throw ConfigError("samples source: non-finite sample");
  }
  MeanSource s;
  s.kind = Kind::samples;
  s.data = std::move(data);
  return s;
}

std::string MeanSource::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::gaussian: os << "gaussian(" << mean << ", " << variance << ")"; break;
    case Kind::bernoulli: os << "bernoulli(" << p << ")"; break;
    case Kind::point: os << "point(" << mean << ")"; break;
    case Kind::samples: os << "samples(n=" << data.size() << ")"; break;
  }
  return os.str();
}

std::vector<double> symmetric_grid(double theta_max, int n) {
  if (!(theta_max > 0.0) || n < 3 || n % 2 == 0) {
    throw ConfigError("theta grid: need theta_max > 0 and an odd point count >= 3");
  }
  std::vector<double> g(n);
  const int half = n / 2;
  for (int i = 0; i < n; ++i) g[i] = theta_max * static_cast<double>(i - half) / half;
  return g;
}

double cgf_value(const MeanSource& s, double theta) {
  switch (s.kind) {
    case MeanSource::Kind::gaussian: return s.mean * theta + 0.5 * s.variance * theta * theta;
    case MeanSource::Kind::bernoulli:
      if (theta > 0.0) return theta + std::log(s.p + (1.0 - s.p) * std::exp(-theta));
      return std::log1p(s.p * std::expm1(theta));
    case MeanSource::Kind::point: return s.mean * theta;
    case MeanSource::Kind::samples: {
      if (s.data.empty()) throw ConfigError("cgf: empty sample set");
      double m = -std::numeric_limits<double>::infinity();
      for (double v : s.data) m = std::max(m, theta * v);
      double acc = 0.0;
      for (double v : s.data) acc += std::exp(theta * v - m);
      const double r = m + std::log(acc) - std::log(static_cast<double>(s.data.size()));
      if (!std::isfinite(r)) throw NumericalError("cgf: overflow in log-sum-exp");
      return r;
    }
  }
  return 0.0;
}

CgfTable cgf(const MeanSource& source, const std::vector<double>& theta) {
  if (source.kind == MeanSource::Kind::samples && source.data.size() < 1000) {
    throw ConfigError("cgf: at least 1000 samples required");
  }
  if (theta.size() < 3) throw ConfigError("cgf: theta grid needs at least 3 points");
  CgfTable t;
  t.source = source;
  t.theta = theta;
  t.lambda.reserve(theta.size());
  for (double th : theta) {
    const double l = cgf_value(source, th);
    if (!std::isfinite(l)) throw NumericalError("cgf: non-finite value");
    t.lambda.push_back(l);
  }
  return t;
}

LegendreValue legendre(const CgfTable& table, double x) {
  const auto& th = table.theta;
  const auto& lam = table.lambda;
  std::size_t best = 0;
  double fbest = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < th.size(); ++k) {
    const double f = x * th[k] - lam[k];
    if (f > fbest) {
      fbest = f;
      best = k;
    }
  }
  LegendreValue out;
  out.value = fbest;
  out.theta_star = th[best];
  if (best == 0 || best + 1 == th.size()) {
    out.unreliable = true;
    return out;
  }
  const double fm = x * th[best - 1] - lam[best - 1];
  const double fp = x * th[best + 1] - lam[best + 1];
  const double den = fm - 2.0 * fbest + fp;
  if (den < 0.0) {
    const double h = th[best + 1] - th[best];
    const double delta = 0.5 * (fm - fp) / den;
    out.value = fbest - 0.25 * (fm - fp) * delta;
    out.theta_star = th[best] + delta * h;
  }
  return out;
}

RateProperties rate_properties(const CgfTable& table) {
  const auto& th = table.theta;
  std::size_t k0 = 0;
  for (std::size_t k = 1; k < th.size(); ++k) {
    if (std::abs(th[k]) < std::abs(th[k0])) k0 = k;
  }
  if (k0 == 0 || k0 + 1 == th.size()) throw ConfigError("rate_properties: theta = 0 on grid edge");
  const double h = th[k0 + 1] - th[k0];
  const double lm = table.lambda[k0 - 1], l0 = table.lambda[k0], lp = table.lambda[k0 + 1];
  const double d1 = (lp - lm) / (2.0 * h);
  const double d2 = (lp - 2.0 * l0 + lm) / (h * h);
  if (!(d2 > 0.0)) throw NumericalError("rate_properties: lambda''(0) <= 0 (degenerate source)");
  return {d1, -l0, 1.0 / d2};
}

namespace {

// Parameter solving lambda'(theta) = x, if the source has a closed-form tilt.
std::optional<double> tilt_for(const MeanSource& s, double x) {
  switch (s.kind) {
    case MeanSource::Kind::gaussian: return (x - s.mean) / s.variance;
    case MeanSource::Kind::bernoulli:
      if (!(x > 0.0 && x < 1.0)) return std::nullopt;
      return std::log(x * (1.0 - s.p) / (s.p * (1.0 - x)));
    default: return std::nullopt;
  }
}

// Mean of n draws from the source tilted by theta.
double draw_mean(const MeanSource& s, double theta, int n, const CounterRng& rng) {
  double sum = 0.0;
  switch (s.kind) {
    case MeanSource::Kind::gaussian: {
      const double mu = s.mean + s.variance * theta;
      const double sd = std::sqrt(s.variance);
      for (int i = 0; i < n; i += 2) {
        double z0, z1;
        rng.normal_pair(static_cast<std::uint64_t>(i / 2), z0, z1);
        sum += mu + sd * z0;
        if (i + 1 < n) sum += mu + sd * z1;
      }
      break;
    }
    case MeanSource::Kind::bernoulli: {
      const double q = 1.0 / (1.0 + (1.0 - s.p) / s.p * std::exp(-theta));
      for (int i = 0; i < n; ++i) sum += rng.uniform(static_cast<std::uint64_t>(i)) < q ? 1.0 : 0.0;
      break;
    }
    case MeanSource::Kind::point: sum = s.mean * n; break;
    case MeanSource::Kind::samples: {
      const auto m = static_cast<std::uint64_t>(s.data.size());
      for (int i = 0; i < n; ++i) sum += s.data[rng.bits(static_cast<std::uint64_t>(i)) % m];
      break;
    }
  }
  return sum / n;
}

}  // namespace

std::vector<EmpiricalRateRow> sample_mean_rate(const MeanSource& source,
                                               const std::vector<int>& n_list,
                                               const std::vector<double>& x_grid, long long M,
                                               std::uint64_t seed, const SampleMeanOptions& opts) {
  if (x_grid.empty()) throw ConfigError("sample_mean_rate: empty x grid");
  if (M < 1) throw ConfigError("sample_mean_rate: M must be positive");
  double width = opts.bin_width;
  if (width <= 0.0) {
    width = 0.01;
    if (x_grid.size() > 1) {
      width = std::numeric_limits<double>::infinity();
      for (std::size_t i = 1; i < x_grid.size(); ++i) {
        width = std::min(width, std::abs(x_grid[i] - x_grid[i - 1]));
      }
    }
  }
  if (!(width > 0.0)) throw ConfigError("sample_mean_rate: x grid has repeated points");

  std::vector<EmpiricalRateRow> rows;
  for (int n : n_list) {
    if (n < 1) throw ConfigError("sample_mean_rate: n must be positive");
    EmpiricalRateRow row;
    row.n = n;
    row.x = x_grid;
    row.degenerate = source.kind == MeanSource::Kind::point;
    const std::uint64_t row_seed = detail::splitmix64(seed ^ (0x9e37ULL * static_cast<std::uint64_t>(n)));

    // Plain sample means, shared by every x that is not tilted.
    std::vector<double> plain;
    auto plain_means = [&]() -> const std::vector<double>& {
      if (plain.empty()) {
        plain.resize(static_cast<std::size_t>(M));
        parallel_for(plain.size(), [&](std::size_t m) {
          plain[m] = draw_mean(source, 0.0, n, CounterRng(row_seed, m));
        });
      }
      return plain;
    };

    for (std::size_t xi = 0; xi < x_grid.size(); ++xi) {
      const double x = x_grid[xi];
      const std::optional<double> theta = opts.tilt ? tilt_for(source, x) : std::nullopt;
      double mass = 0.0;
      if (theta) {
        // f(z) = f_theta(z) exp(-n (theta z - lambda(theta))).
        const double lam = cgf_value(source, *theta);
        const std::uint64_t xs = detail::splitmix64(row_seed + 0x51ULL * (xi + 1));
        std::vector<double> w(static_cast<std::size_t>(M), 0.0);
        parallel_for(w.size(), [&](std::size_t m) {
          const double z = draw_mean(source, *theta, n, CounterRng(xs, m));
          if (std::abs(z - x) <= 0.5 * width) w[m] = std::exp(-n * (*theta * z - lam));
        });
        for (double v : w) mass += v;
        row.tilt.push_back(*theta);
      } else {
        for (double z : plain_means()) {
          if (std::abs(z - x) <= 0.5 * width) mass += 1.0;
        }
        row.tilt.push_back(0.0);
      }
      if (mass > 0.0) {
        const double density = mass / (static_cast<double>(M) * width);
        row.rate.emplace_back(-std::log(density) / n);
      } else {
        row.rate.emplace_back(std::nullopt);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fwkit
