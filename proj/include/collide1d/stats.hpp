#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "collide1d/limit_laws.hpp"
#include "collide1d/rng.hpp"

namespace collide1d {

/// Right-continuous step function F(x) = #{samples <= x} / n.
class EmpiricalCDF {
 public:
  explicit EmpiricalCDF(std::vector<double> samples);

  double operator()(double x) const;
  /// F(x-), the proportion strictly below x.
  double left_limit(double x) const;
  std::size_t size() const noexcept { return sorted_.size(); }
  const std::vector<double>& sorted_samples() const noexcept { return sorted_; }

 private:
  std::vector<double> sorted_;
};

/// sup |F_hat - F| over [lo, hi], evaluated on a uniform grid and on both
/// sides of every jump inside the interval.
double sup_distance(const EmpiricalCDF& ecdf, const std::function<double(double)>& cdf, double lo, double hi,
                    std::size_t grid = 512);
/// Same, against a limit law (whose CDF is taken as 0 for mu <= 0).
double sup_distance(const EmpiricalCDF& ecdf, const LimitLaw& law, double lo, double hi, std::size_t grid = 512);

/// Least-squares slope of log(err) against log(N).
double loglog_slope(const std::vector<std::pair<double, double>>& points);

/// Sample median; even sizes average the two central values.
double median(std::vector<double> values);
/// Linear-interpolation quantile of already sorted values.
double sorted_quantile(const std::vector<double>& sorted, double p);

enum class CiMethod { Percentile, Normal };

struct MedianEstimate {
  double point = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double confidence = 0.99;
  std::size_t resamples = 0;
  double resample_sd = 0.0;
};

MedianEstimate bootstrap_median(const std::vector<double>& samples, double confidence = 0.99,
                                std::size_t resamples = 100, SeedSpec seed = {},
                                CiMethod method = CiMethod::Percentile);

enum class RegressionDesign { ThroughOrigin_D1_D2, WithIntercept_D0_D1_D2 };

struct RegressionFit {
  // (D1, D2) or (D0, D1, D2).
  std::vector<double> coefficients;
  double residual_rms = 0.0;
  RegressionDesign design = RegressionDesign::ThroughOrigin_D1_D2;

  double d0() const { return design == RegressionDesign::WithIntercept_D0_D1_D2 ? coefficients[0] : 0.0; }
  double d1() const { return coefficients[coefficients.size() - 2]; }
  double d2() const { return coefficients.back(); }
};

/// OLS of y on monomials of eps*N. Identically-zero responses give zero
/// coefficients even when the design is degenerate.
RegressionFit fit_eps_regression(const std::vector<std::pair<double, double>>& points,
                                 RegressionDesign design = RegressionDesign::ThroughOrigin_D1_D2);

struct PoissonCheck {
  double mean_err = 0.0;
  double var_err = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

PoissonCheck poisson_count_check(const std::vector<std::uint64_t>& counts, double lambda);

/// Counts per equal-width bin on [lo, hi); values outside are dropped.
std::vector<std::size_t> histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins);

}  // namespace collide1d
