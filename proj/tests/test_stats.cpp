#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"

#include "collide1d/errors.hpp"
#include "collide1d/limit_laws.hpp"
#include "collide1d/stats.hpp"

using namespace collide1d;

TEST_CASE("empirical cdf") {
  EmpiricalCDF F({3.0, 1.0, 2.0, 2.0});
  CHECK(F(0.5) == 0.0);
  CHECK(F(1.0) == 0.25);
  CHECK(F.left_limit(1.0) == 0.0);
  CHECK(F(2.0) == 0.75);
  CHECK(F.left_limit(2.0) == 0.25);
  CHECK(F(10.0) == 1.0);
  CHECK(F(-INFINITY) == 0.0);
  CHECK_THROWS_AS(EmpiricalCDF({}), DomainError);
  CHECK_THROWS_AS(EmpiricalCDF({1.0, std::nan("")}), DomainError);
}

TEST_CASE("sup distance") {
  const auto law = make_law(Theorem::SystemFiniteMean, DistributionSpec::normal(0, 1), DistributionSpec::normal(0, 1));
  // a single sample at 1 against exp(-1/(pi mu)) on (0, 5)
  const double F1 = std::exp(-1.0 / std::numbers::pi);
  CHECK(sup_distance(EmpiricalCDF({1.0}), law, 0.0, 5.0) == doctest::Approx(F1).epsilon(1e-12));

  // quantile-perfect samples sit within 1/(2n) of the law
  const std::size_t n = 1000;
  std::vector<double> xs;
  for (std::size_t k = 0; k < n; ++k) {
    const double u = (k + 0.5) / n;
    xs.push_back(law.constant / -std::log(u));
  }
  const double d = sup_distance(EmpiricalCDF(xs), law, 0.0, 1e9);
  CHECK(d <= 0.5 / n + 1e-12);
  std::reverse(xs.begin(), xs.end());
  CHECK(sup_distance(EmpiricalCDF(xs), law, 0.0, 1e9) == d);

  // random draws from the law obey the DKW bound
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> ys(1000000);
  for (double& y : ys) y = law.constant / -std::log(unif(eng));
  CHECK(sup_distance(EmpiricalCDF(ys), law, 0.0, 5.0) < 2e-3);
}

TEST_CASE("log-log slope") {
  std::vector<std::pair<double, double>> pts;
  for (double n : {5.0, 8.0, 12.0, 18.0, 27.0}) pts.push_back({n, 7.0 / n});
  CHECK(loglog_slope(pts) == doctest::Approx(-1.0).epsilon(1e-12));
  pts.clear();
  for (double n : {5.0, 10.0, 20.0, 40.0}) pts.push_back({n, 3.0 * std::pow(n, -0.35)});
  CHECK(loglog_slope(pts) == doctest::Approx(-0.35).epsilon(1e-12));
  CHECK_THROWS_AS(loglog_slope({{1.0, 1.0}, {2.0, 0.5}}), DomainError);
  CHECK_THROWS_AS(loglog_slope({{1.0, 1.0}, {2.0, 0.5}, {3.0, 0.0}}), DomainError);
}

TEST_CASE("median and quantiles") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(sorted_quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25) == 2.0);
  CHECK(sorted_quantile({1.0, 2.0}, 0.5) == 1.5);
  CHECK_THROWS_AS(median({}), DomainError);
}

TEST_CASE("bootstrap median") {
  const std::vector<double> ones(50, 1.0);
  const auto c = bootstrap_median(ones);
  CHECK(c.point == 1.0);
  CHECK(c.ci_lo == 1.0);
  CHECK(c.ci_hi == 1.0);
  CHECK_THROWS_AS(bootstrap_median(std::vector<double>(5, 1.0)), DomainError);

  std::mt19937_64 eng(17);
  std::normal_distribution<double> g(5.0, 1.0);
  std::vector<double> xs(10000);
  for (double& x : xs) x = g(eng);
  const auto a = bootstrap_median(xs, 0.99, 100, SeedSpec{3, 0});
  const auto b = bootstrap_median(xs, 0.99, 100, SeedSpec{3, 0});
  CHECK(a.ci_lo == b.ci_lo);
  CHECK(a.ci_hi == b.ci_hi);
  CHECK(a.ci_lo <= a.point);
  CHECK(a.point <= a.ci_hi);
  const auto nm = bootstrap_median(xs, 0.99, 100, SeedSpec{3, 0}, CiMethod::Normal);
  CHECK(nm.ci_hi - nm.point == doctest::Approx(nm.point - nm.ci_lo));

  // coverage of the true median over repeated samples
  int covered = 0;
  for (int rep = 0; rep < 100; ++rep) {
    for (double& x : xs) x = g(eng);
    const auto e = bootstrap_median(xs, 0.99, 100, SeedSpec{99, std::uint64_t(rep)});
    covered += e.ci_lo <= 5.0 && 5.0 <= e.ci_hi;
  }
  CHECK(covered >= 95);

  // spread of the sample median shrinks like n^{-1/2}
  std::vector<std::pair<double, double>> pts;
  for (std::size_t n : {100, 400, 1600, 6400}) {
    std::vector<double> meds;
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<double> s(n);
      for (double& x : s) x = g(eng);
      meds.push_back(median(s));
    }
    double m = 0, v = 0;
    for (double x : meds) m += x;
    m /= meds.size();
    for (double x : meds) v += (x - m) * (x - m);
    pts.push_back({double(n), std::sqrt(v / (meds.size() - 1))});
  }
  const double slope = loglog_slope(pts);
  CHECK(slope > -0.6);
  CHECK(slope < -0.4);
}

TEST_CASE("epsilon regression") {
  std::vector<std::pair<double, double>> pts;
  for (double x : {-0.5, -0.25, 0.0, 0.25, 0.5, 1.0}) pts.push_back({x, 0.3 * x + 0.1 * x * x});
  const auto f = fit_eps_regression(pts);
  CHECK(f.d0() == 0.0);
  CHECK(f.d1() == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(f.d2() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(f.residual_rms < 1e-12);

  for (auto& p : pts) p.second -= 0.54;
  const auto g = fit_eps_regression(pts, RegressionDesign::WithIntercept_D0_D1_D2);
  CHECK(g.d0() == doctest::Approx(-0.54).epsilon(1e-12));
  CHECK(g.d1() == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(g.d2() == doctest::Approx(0.1).epsilon(1e-12));

  const auto z = fit_eps_regression({{0.0, 0.0}, {0.0, 0.0}});
  CHECK(z.d1() == 0.0);
  CHECK(z.d2() == 0.0);
  CHECK_THROWS_AS(fit_eps_regression({{0.0, 1.0}, {0.0, 2.0}, {0.0, 3.0}}), DegenerateInputError);
}

TEST_CASE("poisson check") {
  const std::vector<std::uint64_t> zeros(1000, 0);
  const auto z = poisson_count_check(zeros, 1e-9);
  CHECK(z.mean == 0.0);
  CHECK(z.mean_err == doctest::Approx(1e-9));

  std::mt19937_64 eng(8);
  std::poisson_distribution<std::uint64_t> pd(2.0);
  std::vector<std::uint64_t> counts(100000);
  for (auto& c : counts) c = pd(eng);
  const auto p = poisson_count_check(counts, 2.0);
  CHECK(std::abs(p.mean_err) < 0.05);
  CHECK(std::abs(p.var_err) < 0.05);
  CHECK_THROWS_AS(poisson_count_check({}, 1.0), DomainError);
  CHECK_THROWS_AS(poisson_count_check(counts, 0.0), DomainError);
}

TEST_CASE("histogram") {
  const auto h = histogram({-1.0, 0.1, 0.2, 0.6, 0.99, 1.0, 5.0}, 0.0, 1.0, 2);
  CHECK(h == std::vector<std::size_t>{2, 2});
  CHECK_THROWS_AS(histogram({}, 1.0, 0.0, 2), DomainError);
}
