#include "collide1d/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/special_functions/erf.hpp>

#include "collide1d/errors.hpp"

namespace collide1d {

EmpiricalCDF::EmpiricalCDF(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw DomainError("empirical CDF of an empty sample");
  for (double s : sorted_) {
    if (std::isnan(s)) throw DomainError("empirical CDF: NaN sample");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCDF::operator()(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double EmpiricalCDF::left_limit(double x) const {
  const auto it = std::lower_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double sup_distance(const EmpiricalCDF& ecdf, const std::function<double(double)>& cdf, double lo, double hi,
                    std::size_t grid) {
  if (grid < 2) throw DomainError("sup_distance: grid needs at least two points");
  if (!(lo < hi)) throw DomainError("sup_distance: empty interval");
  double worst = 0.0;
  for (std::size_t k = 0; k < grid; ++k) {
    const double t = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(grid - 1);
    worst = std::max(worst, std::abs(ecdf(t) - cdf(t)));
  }
  const auto& s = ecdf.sorted_samples();
  const double n = static_cast<double>(s.size());
  auto it = std::upper_bound(s.begin(), s.end(), lo);
  while (it != s.end() && *it < hi) {
    const double x = *it;
    const auto first = it;
    it = std::upper_bound(it, s.end(), x);  // skip ties
    const double below = static_cast<double>(first - s.begin()) / n;
    const double at = static_cast<double>(it - s.begin()) / n;
    const double f = cdf(x);
    worst = std::max({worst, std::abs(at - f), std::abs(below - f)});
  }
  return worst;
}

double sup_distance(const EmpiricalCDF& ecdf, const LimitLaw& law, double lo, double hi, std::size_t grid) {
  if (lo < 0.0) throw DomainError("sup_distance: interval must lie in [0, inf)");
  return sup_distance(
      ecdf, [&law](double mu) { return mu > 0.0 ? limit_cdf(law, mu) : 0.0; }, lo, hi, grid);
}

double loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw DomainError("loglog_slope needs at least three points");
  double mx = 0.0, my = 0.0;
  for (const auto& [n, e] : points) {
    if (!(n > 0.0) || !(e > 0.0)) throw DomainError("loglog_slope needs positive values");
    mx += std::log(n);
    my += std::log(e);
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [n, e] : points) {
    const double dx = std::log(n) - mx;
    sxy += dx * (std::log(e) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw DegenerateInputError("loglog_slope: all N equal");
  return sxy / sxx;
}

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of an empty sample");
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

double sorted_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw DomainError("quantile of an empty sample");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto k = static_cast<std::size_t>(std::floor(h));
  if (k + 1 >= sorted.size()) return sorted.back();
  return sorted[k] + (h - static_cast<double>(k)) * (sorted[k + 1] - sorted[k]);
}

MedianEstimate bootstrap_median(const std::vector<double>& samples, double confidence, std::size_t resamples,
                                SeedSpec seed, CiMethod method) {
  if (samples.empty()) throw DomainError("bootstrap_median: empty sample");
  if (samples.size() < 10) throw DomainError("bootstrap_median: need at least 10 samples");
  if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("bootstrap_median: confidence must be in (0,1)");
  if (resamples < 2) throw DomainError("bootstrap_median: need at least two resamples");

  MedianEstimate est;
  est.point = median(samples);
  est.confidence = confidence;
  est.resamples = resamples;

  const std::size_t n = samples.size();
  const std::uint64_t key = stream_key(seed, static_cast<std::uint64_t>(Substream::Bootstrap));
  std::vector<double> medians(resamples);
  const long long nr = static_cast<long long>(resamples);
#pragma omp parallel
  {
    std::vector<double> draw(n);
#pragma omp for schedule(static)
    for (long long r = 0; r < nr; ++r) {
      Engine eng = make_stream(SeedSpec{key, static_cast<std::uint64_t>(r)});
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (double& d : draw) d = samples[pick(eng)];
      medians[static_cast<std::size_t>(r)] = median(draw);
    }
  }

  const double mean = std::accumulate(medians.begin(), medians.end(), 0.0) / static_cast<double>(resamples);
  double ss = 0.0;
  for (double m : medians) ss += (m - mean) * (m - mean);
  est.resample_sd = std::sqrt(ss / static_cast<double>(resamples - 1));

  if (method == CiMethod::Percentile) {
    std::sort(medians.begin(), medians.end());
    est.ci_lo = sorted_quantile(medians, 0.5 * (1.0 - confidence));
    est.ci_hi = sorted_quantile(medians, 0.5 * (1.0 + confidence));
  } else {
    const double z = std::numbers::sqrt2 * boost::math::erf_inv(confidence);
    est.ci_lo = est.point - z * est.resample_sd;
    est.ci_hi = est.point + z * est.resample_sd;
  }
  // A skewed resample distribution can leave the point outside the
  // percentile interval; widen rather than report an inverted interval.
  est.ci_lo = std::min(est.ci_lo, est.point);
  est.ci_hi = std::max(est.ci_hi, est.point);
  return est;
}

RegressionFit fit_eps_regression(const std::vector<std::pair<double, double>>& points, RegressionDesign design) {
  const bool intercept = design == RegressionDesign::WithIntercept_D0_D1_D2;
  const Eigen::Index cols = intercept ? 3 : 2;
  if (points.empty()) throw DomainError("fit_eps_regression: no points");
  const auto rows = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd a(rows, cols);
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double x = points[static_cast<std::size_t>(r)].first;
    const double v = points[static_cast<std::size_t>(r)].second;
    if (!std::isfinite(x) || !std::isfinite(v)) throw DomainError("fit_eps_regression: non-finite data");
    Eigen::Index c = 0;
    if (intercept) a(r, c++) = 1.0;
    a(r, c++) = x;
    a(r, c) = x * x;
    y(r) = v;
  }
  RegressionFit fit;
  fit.design = design;
  if (y.cwiseAbs().maxCoeff() == 0.0) {
    fit.coefficients.assign(static_cast<std::size_t>(cols), 0.0);
    return fit;
  }
  if (rows < cols) throw DegenerateInputError("fit_eps_regression: fewer points than coefficients");
  const auto qr = a.colPivHouseholderQr();
  if (qr.rank() < cols) throw DegenerateInputError("fit_eps_regression: design matrix is rank deficient");
  const Eigen::VectorXd beta = qr.solve(y);
  fit.coefficients.assign(beta.data(), beta.data() + cols);
  fit.residual_rms = std::sqrt((a * beta - y).squaredNorm() / static_cast<double>(rows));
  return fit;
}

PoissonCheck poisson_count_check(const std::vector<std::uint64_t>& counts, double lambda) {
  if (counts.empty()) throw DomainError("poisson_count_check: empty counts");
  if (!(lambda > 0.0)) throw DomainError("poisson_count_check: lambda must be positive");
  const double n = static_cast<double>(counts.size());
  double mean = 0.0;
  for (auto c : counts) mean += static_cast<double>(c);
  mean /= n;
  double ss = 0.0;
  for (auto c : counts) ss += (static_cast<double>(c) - mean) * (static_cast<double>(c) - mean);
  PoissonCheck out;
  out.mean = mean;
  out.variance = counts.size() > 1 ? ss / (n - 1.0) : 0.0;
  out.mean_err = std::abs(mean - lambda);
  out.var_err = std::abs(out.variance - lambda);
  return out;
}

std::vector<std::size_t> histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins) {
  if (bins == 0 || !(lo < hi)) throw DomainError("histogram: need bins > 0 and lo < hi");
  std::vector<std::size_t> counts(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : values) {
    if (!(v >= lo && v < hi)) continue;
    auto k = static_cast<std::size_t>((v - lo) / width);
    counts[std::min(k, bins - 1)] += 1;
  }
  return counts;
}

}  // namespace collide1d
