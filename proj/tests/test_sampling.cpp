#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"

#include "collide1d/distribution.hpp"
#include "collide1d/errors.hpp"
#include "collide1d/quadrature.hpp"
#include "collide1d/stats.hpp"

using namespace collide1d;
using std::numbers::pi;

namespace {

std::vector<DistributionSpec> all_laws() {
  return {DistributionSpec::normal(0.3, 1.7), DistributionSpec::uniform(-0.5, 2.0),
          DistributionSpec::cauchy(-1.0, 0.5), DistributionSpec::power_tail(0.5),
          DistributionSpec::power_tail(1.25), DistributionSpec::power_tail(2.0)};
}

}  // namespace

TEST_CASE("power-tail constant") {
  CHECK(power_tail_constant(1.25) == doctest::Approx(9.0 * std::cos(pi / 18.0) / (8.0 * pi)).epsilon(1e-14));
  CHECK(power_tail_constant(1.0) == doctest::Approx(1.0 / pi).epsilon(1e-14));
  CHECK(power_tail_constant(0.5) == doctest::Approx(1.5 * std::sin(pi / 1.5) / (2 * pi)).epsilon(1e-14));
  const auto p = DistributionSpec::power_tail(1.25);
  CHECK(p.density(0.0) == doctest::Approx(power_tail_constant(1.25)).epsilon(1e-14));
  CHECK_THROWS_AS(DistributionSpec::power_tail(0.0), DomainError);
  CHECK_THROWS_AS(DistributionSpec::power_tail(-1.0), DomainError);
}

TEST_CASE("densities integrate to one") {
  CHECK(DistributionSpec::normal(0, 1).density(0.0) == doctest::Approx(1.0 / std::sqrt(2 * pi)).epsilon(1e-15));
  for (double a : {0.5, 1.25, 2.0}) {
    const auto p = DistributionSpec::power_tail(a);
    CHECK(p.tabulated_mass() == doctest::Approx(1.0).epsilon(1e-9));
    // direct quadrature up to L plus the analytic tail beyond it
    const double L = 1e6;
    const double body = integrate_pieces([&](double x) { return p.density(x); }, {-L, -1, 0, 1, L});
    const double tail = 2.0 * power_tail_constant(a) * std::pow(L, -a) / a;
    CHECK(body + tail == doctest::Approx(1.0).epsilon(1e-6));
  }
  const auto u = DistributionSpec::uniform(-0.5, 2.0);
  CHECK(integrate_pieces([&](double x) { return u.density(x); }, {-1, -0.5, 2.0, 3}) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("power tail with alpha one is standard Cauchy") {
  const auto p = DistributionSpec::power_tail(1.0);
  const auto c = DistributionSpec::cauchy(0, 1);
  for (double x : {-50.0, -2.0, -0.3, 0.0, 0.7, 4.0, 1e3}) {
    CHECK(p.density(x) == doctest::Approx(c.density(x)).epsilon(1e-13));
    CHECK(p.cdf(x) == doctest::Approx(c.cdf(x)).epsilon(1e-7));
  }
}

TEST_CASE("cdf values") {
  for (const auto& d : all_laws()) {
    CAPTURE(d.to_string());
    CHECK(d.cdf(d.center()) == doctest::Approx(0.5).epsilon(1e-9));
    double prev = 0.0;
    for (int k = -400; k <= 400; ++k) {
      const double x = d.center() + 0.05 * k * d.scale();
      const double f = d.cdf(x);
      CHECK(f >= prev);
      CHECK(f + d.upper_tail(x) == doctest::Approx(1.0).epsilon(1e-12));
      prev = f;
    }
  }
  CHECK(DistributionSpec::cauchy(0, 1).cdf(1.0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(DistributionSpec::uniform(-1, 1).cdf(0.5) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(DistributionSpec::normal(0, 1).cdf(-1.959963984540054) == doctest::Approx(0.025).epsilon(1e-12));
  // far tail of the power-tail law against C/(alpha |x|^alpha)
  const auto p = DistributionSpec::power_tail(1.25);
  const double asym = power_tail_constant(1.25) * std::pow(100.0, -1.25) / 1.25;
  CHECK(p.cdf(-100.0) == doctest::Approx(asym).epsilon(1e-2));
  CHECK(p.upper_tail(1e10) == doctest::Approx(power_tail_constant(1.25) * std::pow(1e10, -1.25) / 1.25).epsilon(1e-6));
}

TEST_CASE("quantile inverts cdf") {
  for (const auto& d : all_laws()) {
    CAPTURE(d.to_string());
    for (double q = 0.001; q < 0.9995; q += 0.0137) CHECK(d.cdf(d.quantile(q)) == doctest::Approx(q).epsilon(1e-8));
    CHECK_THROWS_AS(d.quantile(0.0), DomainError);
    CHECK_THROWS_AS(d.quantile(1.0), DomainError);
  }
}

TEST_CASE("densities are symmetric about the centre") {
  for (const auto& d : all_laws()) {
    for (double h : {0.1, 0.9, 3.0, 40.0}) {
      CHECK(d.density(d.center() + h) == doctest::Approx(d.density(d.center() - h)).epsilon(1e-14));
    }
  }
}

TEST_CASE("sampling matches the law") {
  const std::size_t n = 1000000;
  {
    const auto u = DistributionSpec::uniform(-1, 1);
    const auto xs = u.sample(SeedSpec{1, 0}, n);
    double mean = 0;
    for (double x : xs) mean += x;
    CHECK(std::abs(mean / n) < 4e-3);
    CHECK(*std::min_element(xs.begin(), xs.end()) > -1.0);
    CHECK(*std::max_element(xs.begin(), xs.end()) < 1.0);
  }
  {
    const auto xs = DistributionSpec::normal(0, 1).sample(SeedSpec{2, 0}, n);
    const double frac = std::count_if(xs.begin(), xs.end(), [](double x) { return x > 1.96; }) / double(n);
    CHECK(std::abs(frac - 0.025) < 1e-3);
  }
  for (const auto& d : all_laws()) {
    CAPTURE(d.to_string());
    EmpiricalCDF F(d.sample(SeedSpec{3, 7}, n));
    const auto& s = F.sorted_samples();
    // sup over all jumps
    const double sup = sup_distance(F, [&](double x) { return d.cdf(x); }, s.front(), s.back(), 2);
    CHECK(sup < 2e-3);
  }
}

TEST_CASE("sampling is reproducible") {
  const auto d = DistributionSpec::power_tail(0.5);
  CHECK(d.sample(SeedSpec{9, 4}, 100) == d.sample(SeedSpec{9, 4}, 100));
  CHECK(d.sample(SeedSpec{9, 4}, 100) != d.sample(SeedSpec{9, 5}, 100));
  CHECK(d.sample(SeedSpec{9, 4}, 100) != d.sample(SeedSpec{10, 4}, 100));
}

TEST_CASE("parse and print") {
  for (const auto& d : all_laws()) CHECK(DistributionSpec::parse(d.to_string()) == d);
  CHECK(DistributionSpec::parse("Normal( 0 , 2 )") == DistributionSpec::normal(0, 2));
  CHECK(DistributionSpec::parse("powertail(1.25)") == DistributionSpec::power_tail(1.25));
  CHECK_THROWS_AS(DistributionSpec::parse("gaussian(0,1)"), DomainError);
  CHECK_THROWS_AS(DistributionSpec::parse("normal(0)"), DomainError);
  CHECK_THROWS_AS(DistributionSpec::parse("normal(0,-1)"), DomainError);
  CHECK_THROWS_AS(DistributionSpec::parse("uniform(1,1)"), DomainError);
  CHECK_THROWS_AS(DistributionSpec::parse("cauchy(0,0)"), DomainError);
  CHECK_THROWS_AS(DistributionSpec::parse("normal(0,1"), DomainError);
}

TEST_CASE("non-finite arguments are rejected") {
  const auto d = DistributionSpec::normal(0, 1);
  CHECK_THROWS_AS(d.density(std::nan("")), DomainError);
  CHECK_THROWS_AS(d.cdf(std::nan("")), DomainError);
  CHECK_THROWS_AS(DistributionSpec::normal(std::nan(""), 1.0), DomainError);
}

TEST_CASE("mean and symmetry flags") {
  CHECK(DistributionSpec::normal(0, 1).has_finite_mean());
  CHECK(DistributionSpec::power_tail(1.25).has_finite_mean());
  CHECK_FALSE(DistributionSpec::power_tail(0.5).has_finite_mean());
  CHECK_FALSE(DistributionSpec::power_tail(1.0).has_finite_mean());
  CHECK_FALSE(DistributionSpec::cauchy(0, 1).has_finite_mean());
  CHECK(DistributionSpec::uniform(-2, 2).symmetric_about_zero());
  CHECK_FALSE(DistributionSpec::uniform(0, 2).symmetric_about_zero());
}

TEST_CASE("quadrature") {
  CHECK(integrate([](double x) { return std::exp(-x * x); }, -INFINITY, INFINITY) ==
        doctest::Approx(std::sqrt(pi)).epsilon(1e-10));
  CHECK(integrate([](double x) { return 1.0 / (1.0 + x * x); }, 0, INFINITY) ==
        doctest::Approx(pi / 2).epsilon(1e-10));
  CHECK(integrate([](double x) { return std::sqrt(x); }, 0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(integrate([](double x) { return x; }, 1, 0) == doctest::Approx(-0.5).epsilon(1e-14));
  // |w|^{-1/2} on [-1, 1] weighted by 1 gives 4
  CHECK(integrate_singular_weight([](double w) { return std::abs(w) <= 1.0 ? 1.0 : 0.0; }, 0.5, 1.0,
                                  std::vector<double>{-1.0, 1.0}) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK_THROWS_AS(integrate([](double) { return std::nan(""); }, 0, 1), QuadratureError);
}
