#include "collide1d/distribution.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "collide1d/errors.hpp"
#include "collide1d/quadrature.hpp"

namespace collide1d {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate(const DistributionSpec::Kind& kind) {
  std::visit(Overloaded{
                 [](const Normal& d) {
                   if (!std::isfinite(d.mean) || !(d.stddev > 0.0) || !std::isfinite(d.stddev))
                     throw DomainError("normal: stddev must be positive and finite");
                 },
                 [](const Uniform& d) {
                   if (!std::isfinite(d.lo) || !std::isfinite(d.hi) || !(d.lo < d.hi))
                     throw DomainError("uniform: require finite lo < hi");
                 },
                 [](const Cauchy& d) {
                   if (!std::isfinite(d.location) || !(d.scale > 0.0) || !std::isfinite(d.scale))
                     throw DomainError("cauchy: scale must be positive and finite");
                 },
                 [](const PowerTail& d) {
                   if (!(d.alpha > 0.0) || !std::isfinite(d.alpha))
                     throw DomainError("powertail: alpha must be positive and finite");
                 },
             },
             kind);
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

}  // namespace

double power_tail_constant(double alpha) {
  if (!(alpha > 0.0)) throw DomainError("powertail: alpha must be positive");
  return (1.0 + alpha) * std::sin(kPi / (1.0 + alpha)) / (2.0 * kPi);
}

namespace detail {

/// Piecewise cubic Hermite interpolant with Fritsch-Carlson slopes; monotone
/// data give a monotone interpolant.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      h[k] = x_[k + 1] - x_[k];
      delta[k] = (y_[k + 1] - y_[k]) / h[k];
    }
    d_.assign(n, 0.0);
    d_.front() = delta.front();
    d_.back() = delta.back();
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (delta[k - 1] * delta[k] <= 0.0) continue;
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      d_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
    }
  }

  std::size_t locate(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(k, x_.size() - 2);
  }

  double eval(std::size_t k, double t) const {
    const double h = x_[k + 1] - x_[k];
    const double s = (t - x_[k]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y_[k] + (s3 - 2 * s2 + s) * h * d_[k] +
           (-2 * s3 + 3 * s2) * y_[k + 1] + (s3 - s2) * h * d_[k + 1];
  }

  double operator()(double t) const { return eval(locate(t), t); }

  double x_front() const { return x_.front(); }
  double x_back() const { return x_.back(); }

 private:
  std::vector<double> x_, y_, d_;
};

/// Upper-tail mass Q(z) = P(X > z), z >= 0, of the power-tail law, tabulated
/// on log-spaced nodes with analytic behaviour at both ends.
class PowerTailTable {
 public:
  static constexpr std::size_t kNodes = 4096;
  static constexpr double kLogLo = -4.0;  // log10 of smallest node
  static constexpr double kLogHi = 8.0;

  explicit PowerTailTable(double alpha) : alpha_(alpha), c_(power_tail_constant(alpha)) {
    z_lo_ = std::pow(10.0, kLogLo);
    z_hi_ = std::pow(10.0, kLogHi);
    std::vector<double> z(kNodes), q(kNodes);
    for (std::size_t k = 0; k < kNodes; ++k) {
      const double e = kLogLo + (kLogHi - kLogLo) * static_cast<double>(k) / (kNodes - 1);
      z[k] = std::pow(10.0, e);
    }
    z.front() = z_lo_;
    z.back() = z_hi_;
    QuadratureConfig cfg;
    cfg.rel_tol = 1e-12;
    auto f = [this](double x) { return c_ / (1.0 + std::pow(std::abs(x), 1.0 + alpha_)); };
    q.back() = asymptotic_tail(z_hi_);
    for (std::size_t k = kNodes - 1; k-- > 0;) q[k] = q[k + 1] + integrate(f, z[k], z[k + 1], cfg);
    half_mass_ = q.front() + integrate(f, 0.0, z_lo_, cfg);
    q_lo_ = q.front();
    q_hi_ = q.back();

    std::vector<double> log_z(kNodes), log_q(kNodes), neg_log_q(kNodes);
    for (std::size_t k = 0; k < kNodes; ++k) {
      log_z[k] = std::log(z[k]);
      log_q[k] = std::log(q[k]);
      neg_log_q[k] = -log_q[k];
    }
    forward_ = MonotoneCubic(log_z, log_q);
    inverse_ = MonotoneCubic(std::move(neg_log_q), std::move(log_z));
  }

  double upper_tail(double z) const {
    if (z >= z_hi_) return asymptotic_tail(z);
    if (z <= z_lo_) return half_mass_ - c_ * (z - std::pow(z, 2.0 + alpha_) / (2.0 + alpha_));
    return std::exp(forward_(std::log(z)));
  }

  /// Solves upper_tail(z) = q for q in (0, 1/2].
  double inverse_tail(double q) const {
    if (q >= q_lo_) return std::max(0.0, (half_mass_ - q) / c_);
    if (q <= q_hi_) return std::pow(c_ / (alpha_ * q), 1.0 / alpha_);
    return std::exp(inverse_(-std::log(q)));
  }

  double half_mass() const { return half_mass_; }

 private:
  double asymptotic_tail(double z) const {
    return c_ * (std::pow(z, -alpha_) / alpha_ - std::pow(z, -1.0 - 2.0 * alpha_) / (1.0 + 2.0 * alpha_));
  }

  double alpha_, c_;
  double z_lo_ = 0, z_hi_ = 0, q_lo_ = 0, q_hi_ = 0, half_mass_ = 0.5;
  MonotoneCubic forward_, inverse_;
};

}  // namespace detail

DistributionSpec::DistributionSpec() : kind_(Normal{}) {}

DistributionSpec::DistributionSpec(Kind kind) : kind_(kind) {
  validate(kind_);
  if (const auto* p = std::get_if<PowerTail>(&kind_)) {
    table_ = std::make_shared<const detail::PowerTailTable>(p->alpha);
  }
}

DistributionSpec DistributionSpec::normal(double mean, double stddev) {
  return DistributionSpec(Normal{mean, stddev});
}
DistributionSpec DistributionSpec::uniform(double lo, double hi) {
  return DistributionSpec(Uniform{lo, hi});
}
DistributionSpec DistributionSpec::cauchy(double location, double scale) {
  return DistributionSpec(Cauchy{location, scale});
}
DistributionSpec DistributionSpec::power_tail(double alpha) {
  return DistributionSpec(PowerTail{alpha});
}

DistributionSpec DistributionSpec::parse(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(static_cast<char>(std::tolower(c)));
  }
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')') {
    throw DomainError("distribution spec must look like name(args): '" + std::string(text) + "'");
  }
  const std::string name = s.substr(0, open);
  std::vector<double> args;
  std::string_view rest(s.data() + open + 1, s.size() - open - 2);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string_view tok = rest.substr(0, comma);
    double v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw DomainError("bad number '" + std::string(tok) + "' in distribution spec");
    }
    args.push_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  auto need = [&](std::size_t n) {
    if (args.size() != n) {
      throw DomainError(name + " takes " + std::to_string(n) + " argument(s)");
    }
  };
  if (name == "normal") {
    need(2);
    return normal(args[0], args[1]);
  }
  if (name == "uniform") {
    need(2);
    return uniform(args[0], args[1]);
  }
  if (name == "cauchy") {
    need(2);
    return cauchy(args[0], args[1]);
  }
  if (name == "powertail") {
    need(1);
    return power_tail(args[0]);
  }
  throw DomainError("unknown distribution '" + name + "'");
}

std::string DistributionSpec::to_string() const {
  return std::visit(
      Overloaded{
          [](const Normal& d) { return "normal(" + format_number(d.mean) + "," + format_number(d.stddev) + ")"; },
          [](const Uniform& d) { return "uniform(" + format_number(d.lo) + "," + format_number(d.hi) + ")"; },
          [](const Cauchy& d) {
            return "cauchy(" + format_number(d.location) + "," + format_number(d.scale) + ")";
          },
          [](const PowerTail& d) { return "powertail(" + format_number(d.alpha) + ")"; },
      },
      kind_);
}

double DistributionSpec::density(double x) const {
  if (!std::isfinite(x)) throw DomainError("density: non-finite argument");
  return std::visit(Overloaded{
                        [x](const Normal& d) {
                          const double z = (x - d.mean) / d.stddev;
                          return std::exp(-0.5 * z * z) / (d.stddev * std::sqrt(2.0 * kPi));
                        },
                        [x](const Uniform& d) { return (x >= d.lo && x <= d.hi) ? 1.0 / (d.hi - d.lo) : 0.0; },
                        [x](const Cauchy& d) {
                          const double z = (x - d.location) / d.scale;
                          return 1.0 / (kPi * d.scale * (1.0 + z * z));
                        },
                        [x](const PowerTail& d) {
                          return power_tail_constant(d.alpha) / (1.0 + std::pow(std::abs(x), 1.0 + d.alpha));
                        },
                    },
                    kind_);
}

double DistributionSpec::cdf(double x) const {
  if (std::isnan(x)) throw DomainError("cdf: NaN argument");
  return std::visit(Overloaded{
                        [x](const Normal& d) { return 0.5 * std::erfc(-(x - d.mean) / (d.stddev * std::numbers::sqrt2)); },
                        [x](const Uniform& d) { return std::clamp((x - d.lo) / (d.hi - d.lo), 0.0, 1.0); },
                        [x](const Cauchy& d) {
                          const double z = (x - d.location) / d.scale;
                          return z < 0.0 ? std::atan(-1.0 / z) / kPi : 0.5 + std::atan(z) / kPi;
                        },
                        [this, x](const PowerTail&) {
                          if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
                          return x < 0.0 ? table_->upper_tail(-x) : 1.0 - table_->upper_tail(x);
                        },
                    },
                    kind_);
}

double DistributionSpec::upper_tail(double x) const {
  if (std::isnan(x)) throw DomainError("upper_tail: NaN argument");
  return std::visit(Overloaded{
                        [x](const Normal& d) { return 0.5 * std::erfc((x - d.mean) / (d.stddev * std::numbers::sqrt2)); },
                        [x](const Uniform& d) { return std::clamp((d.hi - x) / (d.hi - d.lo), 0.0, 1.0); },
                        [x](const Cauchy& d) {
                          const double z = (x - d.location) / d.scale;
                          return z > 0.0 ? std::atan(1.0 / z) / kPi : 0.5 - std::atan(z) / kPi;
                        },
                        [this, x](const PowerTail&) {
                          if (std::isinf(x)) return x > 0 ? 0.0 : 1.0;
                          return x > 0.0 ? table_->upper_tail(x) : 1.0 - table_->upper_tail(-x);
                        },
                    },
                    kind_);
}

double DistributionSpec::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: probability must lie in (0, 1)");
  return std::visit(Overloaded{
                        [u](const Normal& d) {
                          return d.mean - d.stddev * std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
                        },
                        [u](const Uniform& d) { return d.lo + (d.hi - d.lo) * u; },
                        [u](const Cauchy& d) { return d.location + d.scale * std::tan(kPi * (u - 0.5)); },
                        [this, u](const PowerTail&) {
                          if (u == 0.5) return 0.0;
                          return u < 0.5 ? -table_->inverse_tail(u) : table_->inverse_tail(1.0 - u);
                        },
                    },
                    kind_);
}

void DistributionSpec::sample(Engine& eng, std::span<double> out) const {
  std::visit(Overloaded{
                 [&](const Normal& d) {
                   std::normal_distribution<double> dist(d.mean, d.stddev);
                   for (double& v : out) v = dist(eng);
                 },
                 [&](const Uniform& d) {
                   for (double& v : out) v = d.lo + (d.hi - d.lo) * open_unit(eng);
                 },
                 [&](const Cauchy& d) {
                   for (double& v : out) v = d.location + d.scale * std::tan(kPi * (open_unit(eng) - 0.5));
                 },
                 [&](const PowerTail&) {
                   // Low bit picks the sign; the rest gives a half-tail mass in
                   // (0, 1/2) with full resolution near 0.
                   for (double& v : out) {
                     const std::uint64_t r = eng();
                     const double q = 0.5 * (static_cast<double>(r >> 11) + 0.5) * 0x1.0p-53;
                     const double z = table_->inverse_tail(q);
                     v = (r & 1U) ? z : -z;
                   }
                 },
             },
             kind_);
}

std::vector<double> DistributionSpec::sample(SeedSpec seed, std::size_t n) const {
  std::vector<double> out(n);
  Engine eng = make_stream(seed, Substream::Positions);
  sample(eng, out);
  return out;
}

double DistributionSpec::center() const noexcept {
  return std::visit(Overloaded{
                        [](const Normal& d) { return d.mean; },
                        [](const Uniform& d) { return 0.5 * (d.lo + d.hi); },
                        [](const Cauchy& d) { return d.location; },
                        [](const PowerTail&) { return 0.0; },
                    },
                    kind_);
}

double DistributionSpec::scale() const noexcept {
  return std::visit(Overloaded{
                        [](const Normal& d) { return d.stddev; },
                        [](const Uniform& d) { return 0.5 * (d.hi - d.lo); },
                        [](const Cauchy& d) { return d.scale; },
                        [](const PowerTail&) { return 1.0; },
                    },
                    kind_);
}

std::vector<double> DistributionSpec::kinks() const {
  if (const auto* u = std::get_if<Uniform>(&kind_)) return {u->lo, u->hi};
  if (is<PowerTail>()) return {0.0};
  return {};
}

double DistributionSpec::support_lo() const noexcept {
  if (const auto* u = std::get_if<Uniform>(&kind_)) return u->lo;
  return -kInf;
}

double DistributionSpec::support_hi() const noexcept {
  if (const auto* u = std::get_if<Uniform>(&kind_)) return u->hi;
  return kInf;
}

bool DistributionSpec::has_finite_mean() const noexcept {
  if (is<Cauchy>()) return false;
  if (const auto* p = std::get_if<PowerTail>(&kind_)) return p->alpha > 1.0;
  return true;
}

bool DistributionSpec::symmetric_about_zero() const noexcept {
  return std::visit(Overloaded{
                        [](const Normal& d) { return d.mean == 0.0; },
                        [](const Uniform& d) { return d.lo == -d.hi; },
                        [](const Cauchy& d) { return d.location == 0.0; },
                        [](const PowerTail&) { return true; },
                    },
                    kind_);
}

double DistributionSpec::tabulated_mass() const {
  if (!table_) throw DomainError("tabulated_mass: only defined for powertail laws");
  return 2.0 * table_->half_mass();
}

bool operator==(const DistributionSpec& a, const DistributionSpec& b) {
  if (a.kind_.index() != b.kind_.index()) return false;
  return std::visit(
      Overloaded{
          [&](const Normal& d) {
            const auto& e = std::get<Normal>(b.kind_);
            return d.mean == e.mean && d.stddev == e.stddev;
          },
          [&](const Uniform& d) {
            const auto& e = std::get<Uniform>(b.kind_);
            return d.lo == e.lo && d.hi == e.hi;
          },
          [&](const Cauchy& d) {
            const auto& e = std::get<Cauchy>(b.kind_);
            return d.location == e.location && d.scale == e.scale;
          },
          [&](const PowerTail& d) { return d.alpha == std::get<PowerTail>(b.kind_).alpha; },
      },
      a.kind_);
}

}  // namespace collide1d
