#include "collide1d/limit_laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "collide1d/errors.hpp"

namespace collide1d {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrtPi = 1.7724538509055160273;
// Offsets (in units of the scale) at which smooth bumps are split.
constexpr double kBumpOffsets[] = {-16.0, -6.0, -2.0, 0.0, 2.0, 6.0, 16.0};
// Beyond this, power-tail integrals use the series of the tail mass.
constexpr double kPowerTailCut = 1e6;

struct QuantileRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Composite Gauss-Legendre in tail-mass coordinates, mirrored about the
// centre (all supported laws are symmetric about it). Tail panels are graded
// so quantiles far out are resolved.
QuantileRule quantile_rule(const DistributionSpec& d) {
  using GL = boost::math::quadrature::gauss<double, 20>;
  std::vector<double> edges{0.0, 1e-14, 1e-11, 1e-8, 1e-6, 1e-5, 1e-4, 1e-3, 3e-3, 0.01, 0.02, 0.04};
  for (int k = 1; k <= 12; ++k) edges.push_back(0.04 + 0.46 * k / 12.0);
  const double c = d.center();
  QuantileRule rule;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double mid = 0.5 * (edges[p] + edges[p + 1]);
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    for (std::size_t k = 0; k < GL::abscissa().size(); ++k) {
      for (int sign : {-1, 1}) {
        const double q = mid + sign * half * GL::abscissa()[k];
        const double lower = d.quantile(q);
        const double wt = half * GL::weights()[k];
        rule.x.push_back(lower);
        rule.w.push_back(wt);
        rule.x.push_back(2.0 * c - lower);
        rule.w.push_back(wt);
      }
    }
  }
  return rule;
}

double cauchy_scale(const DistributionSpec& fx) {
  if (const auto* c = std::get_if<Cauchy>(&fx.kind())) return c->scale;
  if (const auto* p = std::get_if<PowerTail>(&fx.kind()); p && p->alpha == 1.0) return 1.0;
  throw DomainError("Cauchy limit laws need Cauchy positions");
}

double stable_alpha(const DistributionSpec& fx) {
  if (const auto* p = std::get_if<PowerTail>(&fx.kind()); p && p->alpha < 1.0) return p->alpha;
  throw DomainError("stable limit laws need power-tail positions with alpha < 1");
}

// Integral of the power-tail mass Q over [a, inf), a >= 0.
double power_tail_mass_integral(const DistributionSpec& fx, double a, const QuadratureConfig& cfg) {
  const double alpha = std::get<PowerTail>(fx.kind()).alpha;
  if (!(alpha > 1.0)) throw DomainError("power-tail law with alpha <= 1 has no finite mean");
  const double c = power_tail_constant(alpha);
  const double top = std::max(kPowerTailCut, 10.0 * a);
  std::vector<double> breaks{a, top};
  for (double b = 1e-3; b < top; b *= 10.0) {
    if (b > a) breaks.push_back(b);
  }
  const double body = integrate_pieces([&](double y) { return fx.upper_tail(y); }, breaks, cfg);
  const double tail = c * (std::pow(top, 1.0 - alpha) / (alpha * (alpha - 1.0)) -
                           std::pow(top, -2.0 * alpha) / (2.0 * alpha * (1.0 + 2.0 * alpha)));
  return body + tail;
}

std::vector<double> bump_breaks(const DistributionSpec& d) {
  std::vector<double> out = d.kinks();
  for (double k : kBumpOffsets) out.push_back(d.center() + k * d.scale());
  return out;
}

}  // namespace

std::string to_string(Theorem t) {
  switch (t) {
    case Theorem::SingleFiniteMean: return "single_finite_mean";
    case Theorem::SingleStableAlpha: return "single_stable_alpha";
    case Theorem::SingleCauchy: return "single_cauchy";
    case Theorem::SystemFiniteMean: return "system_finite_mean";
    case Theorem::SystemStableAlpha: return "system_stable_alpha";
    case Theorem::SystemCauchy: return "system_cauchy";
  }
  return "unknown";
}

Theorem theorem_from_string(const std::string& s) {
  for (Theorem t : {Theorem::SingleFiniteMean, Theorem::SingleStableAlpha, Theorem::SingleCauchy,
                    Theorem::SystemFiniteMean, Theorem::SystemStableAlpha, Theorem::SystemCauchy}) {
    if (to_string(t) == s) return t;
  }
  throw DomainError("unknown limit law '" + s + "'");
}

bool is_system_law(Theorem t) {
  return t == Theorem::SystemFiniteMean || t == Theorem::SystemStableAlpha || t == Theorem::SystemCauchy;
}

Theorem single_theorem_for(const DistributionSpec& fx) {
  if (fx.has_finite_mean()) return Theorem::SingleFiniteMean;
  if (const auto* p = std::get_if<PowerTail>(&fx.kind()); p && p->alpha < 1.0) return Theorem::SingleStableAlpha;
  return Theorem::SingleCauchy;
}

Theorem system_theorem_for(const DistributionSpec& fx) {
  switch (single_theorem_for(fx)) {
    case Theorem::SingleFiniteMean: return Theorem::SystemFiniteMean;
    case Theorem::SingleStableAlpha: return Theorem::SystemStableAlpha;
    default: return Theorem::SystemCauchy;
  }
}

double mean_abs_deviation(const DistributionSpec& fx, double y, const QuadratureConfig& cfg) {
  if (const auto* n = std::get_if<Normal>(&fx.kind())) {
    const double z = (y - n->mean) / n->stddev;
    const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
    const double big_phi = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    return n->stddev * (z * (2.0 * big_phi - 1.0) + 2.0 * phi);
  }
  if (const auto* u = std::get_if<Uniform>(&fx.kind())) {
    if (y <= u->lo || y >= u->hi) return std::abs(y - 0.5 * (u->lo + u->hi));
    return ((y - u->lo) * (y - u->lo) + (u->hi - y) * (u->hi - y)) / (2.0 * (u->hi - u->lo));
  }
  if (fx.is<PowerTail>() && fx.has_finite_mean()) {
    // |y| + 2 * integral of Q over [|y|, inf), by symmetry.
    return std::abs(y) + 2.0 * power_tail_mass_integral(fx, std::abs(y), cfg);
  }
  throw DomainError("mean absolute deviation is infinite for " + fx.to_string());
}

double mean_abs_difference(const DistributionSpec& fx, const QuadratureConfig& cfg) {
  if (const auto* n = std::get_if<Normal>(&fx.kind())) return 2.0 * n->stddev / kSqrtPi;
  if (const auto* u = std::get_if<Uniform>(&fx.kind())) return (u->hi - u->lo) / 3.0;
  if (fx.is<PowerTail>() && fx.has_finite_mean()) {
    // E|X-Y| = 2 * integral of F(1-F) = 4 * integral over y>0 of Q(1-Q).
    const double alpha = std::get<PowerTail>(fx.kind()).alpha;
    const double c = power_tail_constant(alpha);
    std::vector<double> breaks{0.0};
    for (double b = 1e-3; b <= kPowerTailCut; b *= 10.0) breaks.push_back(b);
    const double body = integrate_pieces(
        [&](double y) {
          const double q = fx.upper_tail(y);
          return q * (1.0 - q);
        },
        breaks, cfg);
    const double top = kPowerTailCut;
    const double q_int = c * (std::pow(top, 1.0 - alpha) / (alpha * (alpha - 1.0)) -
                              std::pow(top, -2.0 * alpha) / (2.0 * alpha * (1.0 + 2.0 * alpha)));
    const double q2_int = c * c * std::pow(top, 1.0 - 2.0 * alpha) / (alpha * alpha * (2.0 * alpha - 1.0));
    return 4.0 * (body + q_int - q2_int);
  }
  throw DomainError("E|X-Y| is infinite for " + fx.to_string());
}

double density_square_integral(const DistributionSpec& fv, const QuadratureConfig& cfg) {
  if (const auto* n = std::get_if<Normal>(&fv.kind())) return 1.0 / (2.0 * n->stddev * kSqrtPi);
  if (const auto* u = std::get_if<Uniform>(&fv.kind())) return 1.0 / (u->hi - u->lo);
  if (const auto* c = std::get_if<Cauchy>(&fv.kind())) return 1.0 / (2.0 * kPi * c->scale);
  auto f2 = [&](double v) {
    const double f = fv.density(v);
    return f * f;
  };
  const auto extra = fv.kinks();
  return integrate_line(f2, fv.center(), fv.scale(), extra, cfg);
}

double stable_field_constant(const DistributionSpec& fv, double alpha, double v, const QuadratureConfig& cfg) {
  std::vector<double> extra;
  for (double b : bump_breaks(fv)) extra.push_back(b - v);
  auto g = [&](double w) { return fv.density(v + w); };
  const double integral = integrate_singular_weight(g, alpha, fv.scale(), extra, cfg);
  return power_tail_constant(alpha) / alpha * integral;
}

double inverse_moment_difference(const DistributionSpec& fv, double alpha, const QuadratureConfig& cfg) {
  // E|V1-V2|^{-a} = integral of g(w)|w|^{-a} with g the density of V2 - V1.
  Integrand g;
  double spread = fv.scale();
  if (const auto* n = std::get_if<Normal>(&fv.kind())) {
    const double s = n->stddev * std::numbers::sqrt2;
    g = [s](double w) { return std::exp(-0.5 * (w / s) * (w / s)) / (s * std::sqrt(2.0 * kPi)); };
    spread = s;
  } else if (const auto* u = std::get_if<Uniform>(&fv.kind())) {
    const double width = u->hi - u->lo;
    g = [width](double w) { return std::max(0.0, width - std::abs(w)) / (width * width); };
    spread = width;
  } else {
    g = [&fv, cfg](double w) {
      auto h = [&](double v) { return fv.density(v) * fv.density(v + w); };
      std::vector<double> extra = bump_breaks(fv);
      for (double b : bump_breaks(fv)) extra.push_back(b - w);
      return integrate_line(h, fv.center(), fv.scale(), extra, cfg);
    };
  }
  std::vector<double> extra{spread, -spread};
  if (fv.is<Uniform>()) extra = {spread, -spread};
  return integrate_singular_weight(g, alpha, spread, extra, cfg);
}

LimitLaw make_law(Theorem theorem, const DistributionSpec& fx, const DistributionSpec& fv,
                  const QuadratureConfig& cfg) {
  LimitLaw law;
  law.theorem = theorem;
  law.fx = fx;
  law.fv = fv;
  law.constant = std::numeric_limits<double>::quiet_NaN();
  switch (theorem) {
    case Theorem::SystemFiniteMean:
      law.constant = mean_abs_difference(fx, cfg) * density_square_integral(fv, cfg);
      law.scaling = "N(N-1)/2";
      return law;
    case Theorem::SystemStableAlpha: {
      const double a = stable_alpha(fx);
      law.alpha = a;
      law.constant = power_tail_constant(a) / (2.0 * a) * inverse_moment_difference(fv, a, cfg);
      law.scaling = "N^(2/alpha)";
      return law;
    }
    case Theorem::SystemCauchy:
      law.constant = 2.0 / kPi * density_square_integral(fv, cfg) * cauchy_scale(fx);
      law.scaling = "N^2 log N";
      return law;
    case Theorem::SingleFiniteMean: {
      if (!fx.has_finite_mean()) throw DomainError("finite-mean law needs positions with a finite mean");
      law.scaling = "N";
      const QuantileRule rx = quantile_rule(fx);
      const QuantileRule rv = quantile_rule(fv);
      std::vector<double> mx(rx.x.size());
      for (std::size_t i = 0; i < rx.x.size(); ++i) mx[i] = mean_abs_deviation(fx, rx.x[i], cfg);
      auto mix = std::make_shared<LimitLaw::Mixture>();
      mix->weight.reserve(rx.x.size() * rv.x.size());
      mix->c.reserve(rx.x.size() * rv.x.size());
      for (std::size_t j = 0; j < rv.x.size(); ++j) {
        const double fvv = fv.density(rv.x[j]);
        for (std::size_t i = 0; i < rx.x.size(); ++i) {
          mix->weight.push_back(rx.w[i] * rv.w[j]);
          mix->c.push_back(fvv * mx[i]);
        }
      }
      law.mixture = std::move(mix);
      return law;
    }
    case Theorem::SingleStableAlpha:
    case Theorem::SingleCauchy: {
      const bool stable = theorem == Theorem::SingleStableAlpha;
      const double a = stable ? stable_alpha(fx) : 1.0;
      const double s = stable ? 1.0 : cauchy_scale(fx);
      law.alpha = a;
      law.scaling = stable ? "N^(1/alpha)" : "N log N";
      const QuantileRule rv = quantile_rule(fv);
      auto mix = std::make_shared<LimitLaw::Mixture>();
      mix->weight = rv.w;
      mix->c.resize(rv.x.size());
      for (std::size_t j = 0; j < rv.x.size(); ++j) {
        mix->c[j] = stable ? stable_field_constant(fv, a, rv.x[j], cfg) : 2.0 * s * fv.density(rv.x[j]) / kPi;
      }
      law.mixture = std::move(mix);
      return law;
    }
  }
  throw DomainError("unknown theorem");
}

double normalizer(const LimitLaw& law, std::size_t n) {
  const double N = static_cast<double>(n);
  switch (law.theorem) {
    case Theorem::SingleFiniteMean: return N;
    case Theorem::SingleStableAlpha: return std::pow(N, 1.0 / law.alpha);
    case Theorem::SingleCauchy: return N * std::log(N);
    case Theorem::SystemFiniteMean: return N * (N - 1.0) / 2.0;
    case Theorem::SystemStableAlpha: return std::pow(N, 2.0 / law.alpha);
    case Theorem::SystemCauchy: return N * N * std::log(N);
  }
  return N;
}

double limit_cdf(const LimitLaw& law, double mu) {
  if (!(mu > 0.0)) throw DomainError("limit_cdf: mu must be positive");
  if (std::isinf(mu)) return 1.0;
  const double scale = std::pow(mu, law.alpha);
  if (is_system_law(law.theorem)) return std::exp(-law.constant / scale);
  double total = 0.0;
  const auto& m = *law.mixture;
  for (std::size_t k = 0; k < m.c.size(); ++k) total += m.weight[k] * std::exp(-m.c[k] / scale);
  return std::min(1.0, total);
}

double limit_median_root(const LimitLaw& law) {
  if (is_system_law(law.theorem)) return std::pow(law.constant / std::numbers::ln2, 1.0 / law.alpha);
  double lo = 1e-3;
  double hi = 1.0;
  while (limit_cdf(law, lo) > 0.5) {
    lo /= 4.0;
    if (lo < 1e-300) throw NumericalError("limit_median: cannot bracket the median");
  }
  while (limit_cdf(law, hi) < 0.5) {
    hi *= 4.0;
    if (hi > 1e300) throw NumericalError("limit_median: cannot bracket the median");
  }
  boost::uintmax_t iters = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-13 * std::max(1.0, std::abs(a)); };
  const auto r = boost::math::tools::bisect([&](double mu) { return limit_cdf(law, mu) - 0.5; }, lo, hi, tol, iters);
  return 0.5 * (r.first + r.second);
}

double limit_median(const LimitLaw& law) {
  const double root = limit_median_root(law);
  return law.theorem == Theorem::SystemFiniteMean ? 0.5 * root : root;
}

double field_constant(const LimitLaw& law, double x, double v, const QuadratureConfig& cfg) {
  switch (law.theorem) {
    case Theorem::SingleFiniteMean: return law.fv.density(v) * mean_abs_deviation(law.fx, x, cfg);
    case Theorem::SingleStableAlpha: return stable_field_constant(law.fv, law.alpha, v, cfg);
    case Theorem::SingleCauchy: return 2.0 * cauchy_scale(law.fx) * law.fv.density(v) / kPi;
    default: throw DomainError("field_constant is defined for single-particle laws only");
  }
}

double conditional_exceedance(const DistributionSpec& fx, const DistributionSpec& fv, double x, double v,
                              double z, const QuadratureConfig& cfg) {
  // Partner velocity v + w (w > 0) overtakes from the left, v - w from the right.
  auto integrand = [&](double w) {
    const double a = fv.density(v + w);
    const double b = fv.density(v - w);
    double s = 0.0;
    if (a > 0.0) s += a * fx.cdf(x - z * w);
    if (b > 0.0) s += b * fx.upper_tail(x + z * w);
    return s;
  };
  std::vector<double> breaks{0.0, kInf};
  auto add = [&](double w) {
    if (w > 0.0 && std::isfinite(w)) breaks.push_back(w);
  };
  for (double p : bump_breaks(fv)) {
    add(p - v);
    add(v - p);
  }
  if (z != 0.0) {
    for (double p : bump_breaks(fx)) {
      add((x - p) / z);
      add((p - x) / z);
    }
  }
  return integrate_pieces(integrand, std::move(breaks), cfg);
}

namespace {

// Integral over the unit square in quantile coordinates; both laws are
// symmetric about their centre so each half is handled in tail-mass form.
double quantile_square(const DistributionSpec& fx, const DistributionSpec& fv,
                       const std::function<double(double, double)>& g, const QuadratureConfig& cfg) {
  const std::vector<double> edges{0.0, 1e-8, 1e-5, 1e-3, 0.02, 0.1, 0.25, 0.5};
  auto side = [](const DistributionSpec& d, double q, int sign) {
    const double lower = d.quantile(q);
    return sign < 0 ? lower : 2.0 * d.center() - lower;
  };
  double total = 0.0;
  for (int sv : {-1, 1}) {
    auto outer = [&](double qv) {
      const double v = side(fv, qv, sv);
      double inner = 0.0;
      for (int sx : {-1, 1}) {
        inner += integrate_pieces([&](double qx) { return g(side(fx, qx, sx), v); }, edges, cfg);
      }
      return inner;
    };
    total += integrate_pieces(outer, edges, cfg);
  }
  return total;
}

QuadratureConfig inner_config(const QuadratureConfig& cfg) {
  QuadratureConfig in = cfg;
  in.rel_tol = std::min(cfg.rel_tol, 1e-10);
  in.max_depth = std::max(cfg.max_depth, 15u);
  return in;
}

QuadratureConfig outer_config(const QuadratureConfig& cfg) {
  QuadratureConfig out = cfg;
  out.rel_tol = std::max(cfg.rel_tol, 1e-7);
  out.max_depth = std::min(cfg.max_depth, 12u);
  return out;
}

}  // namespace

double pair_exceedance_prob(const DistributionSpec& fx, const DistributionSpec& fv, double z,
                            const QuadratureConfig& cfg) {
  if (std::isnan(z)) throw DomainError("pair_exceedance_prob: NaN threshold");
  const QuadratureConfig in = inner_config(cfg);
  return quantile_square(
      fx, fv, [&](double x, double v) { return conditional_exceedance(fx, fv, x, v, z, in); }, outer_config(cfg));
}

double finite_n_single_cdf(const DistributionSpec& fx, const DistributionSpec& fv, std::size_t n, double mu,
                           const QuadratureConfig& cfg) {
  if (n < 2) throw DomainError("finite_n_single_cdf: N must be at least 2");
  if (std::isnan(mu)) throw DomainError("finite_n_single_cdf: NaN argument");
  const QuadratureConfig in = inner_config(cfg);
  const double power = static_cast<double>(n - 1);
  const double value = quantile_square(
      fx, fv,
      [&](double x, double v) {
        const double below = std::clamp(1.0 - conditional_exceedance(fx, fv, x, v, mu, in), 0.0, 1.0);
        return std::pow(below, power);
      },
      outer_config(cfg));
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace collide1d
