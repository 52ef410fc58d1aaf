#include "collide1d/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "collide1d/errors.hpp"

namespace collide1d {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 21>;

constexpr double kLineOffsets[] = {-64.0, -16.0, -6.0, -2.0, 0.0, 2.0, 6.0, 16.0, 64.0};

}  // namespace

namespace {

struct Piece {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

// One Gauss-Kronrod panel on [a, b]. Boost's own recursion compares an
// unscaled panel error against a scaled tolerance, so only its fixed rule
// is used here.
Piece panel(const Integrand& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  Piece p;
  p.value = half * GK::integrate([&](double t) { return f(mid + half * t); }, -1.0, 1.0, 0, 0.0, &p.error, &p.l1);
  p.error *= std::abs(half);
  p.l1 *= std::abs(half);
  return p;
}

Piece adapt(const Integrand& f, double a, double b, const Piece& whole, unsigned depth, double tol) {
  if (depth == 0 || whole.error <= tol || !std::isfinite(whole.value)) return whole;
  const double mid = 0.5 * (a + b);
  const Piece left = panel(f, a, mid);
  const Piece right = panel(f, mid, b);
  const double sub_tol = tol / std::numbers::sqrt2;
  const Piece l = adapt(f, a, mid, left, depth - 1, sub_tol);
  const Piece r = adapt(f, mid, b, right, depth - 1, sub_tol);
  return {l.value + r.value, l.error + r.error, l.l1 + r.l1};
}

Piece integrate_finite(const Integrand& f, double a, double b, const QuadratureConfig& cfg) {
  const Piece first = panel(f, a, b);
  const double tol = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(first.value));
  return adapt(f, a, b, first, cfg.max_depth, tol);
}

}  // namespace

double integrate(const Integrand& f, double a, double b, const QuadratureConfig& cfg) {
  if (a == b) return 0.0;
  if (a > b) return -integrate(f, b, a, cfg);
  Piece p;
  if (std::isinf(a) && std::isinf(b)) {
    return integrate(f, a, 0.0, cfg) + integrate(f, 0.0, b, cfg);
  } else if (std::isinf(b)) {
    // x = a + t / (1 - t)
    p = integrate_finite(
        [&](double t) {
          const double s = 1.0 - t;
          return f(a + t / s) / (s * s);
        },
        0.0, 1.0, cfg);
  } else if (std::isinf(a)) {
    p = integrate_finite(
        [&](double t) {
          const double s = 1.0 - t;
          return f(b - t / s) / (s * s);
        },
        0.0, 1.0, cfg);
  } else {
    p = integrate_finite(f, a, b, cfg);
  }
  if (!std::isfinite(p.value)) {
    throw QuadratureError("quadrature produced a non-finite value on [" + std::to_string(a) + ", " +
                          std::to_string(b) + "]");
  }
  const double allowed = std::max(cfg.abs_tol, cfg.rel_tol * p.l1) * cfg.failure_slack;
  if (p.error > allowed) {
    throw QuadratureError("quadrature did not converge on [" + std::to_string(a) + ", " + std::to_string(b) +
                          "]: error estimate " + std::to_string(p.error));
  }
  return p.value;
}

double integrate_pieces(const Integrand& f, std::vector<double> breakpoints,
                        const QuadratureConfig& cfg) {
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    total += integrate(f, breakpoints[k], breakpoints[k + 1], cfg);
  }
  return total;
}

double integrate_line(const Integrand& f, double center, double scale,
                      std::span<const double> extra_breaks, const QuadratureConfig& cfg) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> breaks{-inf, inf};
  for (double k : kLineOffsets) breaks.push_back(center + scale * k);
  for (double b : extra_breaks) {
    if (std::isfinite(b)) breaks.push_back(b);
  }
  return integrate_pieces(f, std::move(breaks), cfg);
}

double integrate_singular_weight(const Integrand& g, double alpha, double scale,
                                 std::span<const double> extra_breaks,
                                 const QuadratureConfig& cfg) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("singular weight exponent must lie in (0, 1)");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double p = 1.0 / (1.0 - alpha);
  // |w| <= 1: w = u^p, |w|^{-alpha} dw = p du.
  const double near = integrate(
      [&](double u) {
        const double w = std::pow(u, p);
        return p * (g(w) + g(-w));
      },
      0.0, 1.0, cfg);
  auto weighted = [&](double w) { return g(w) * std::pow(std::abs(w), -alpha); };
  std::vector<double> right{1.0, inf};
  std::vector<double> left{-inf, -1.0};
  for (double k : {2.0, 6.0, 16.0, 64.0}) {
    if (k * scale > 1.0) {
      right.push_back(k * scale);
      left.push_back(-k * scale);
    }
  }
  for (double b : extra_breaks) {
    if (b > 1.0 && std::isfinite(b)) right.push_back(b);
    if (b < -1.0 && std::isfinite(b)) left.push_back(b);
  }
  return near + integrate_pieces(weighted, right, cfg) + integrate_pieces(weighted, left, cfg);
}

}  // namespace collide1d
