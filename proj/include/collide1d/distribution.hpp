#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "collide1d/rng.hpp"

namespace collide1d {

struct Normal {
  double mean = 0.0;
  double stddev = 1.0;
};

struct Uniform {
  double lo = -1.0;
  double hi = 1.0;
};

struct Cauchy {
  double location = 0.0;
  double scale = 1.0;
};

/// Symmetric density C_alpha / (1 + |x|^{1+alpha}).
struct PowerTail {
  double alpha = 1.0;
};

/// Normalising constant of the power-tail family, (1+a) sin(pi/(1+a)) / (2 pi).
double power_tail_constant(double alpha);

namespace detail {
class PowerTailTable;
}

/// Law of an initial position or velocity. Immutable after construction;
/// copies share the (power-tail) inverse-CDF table.
class DistributionSpec {
 public:
  using Kind = std::variant<Normal, Uniform, Cauchy, PowerTail>;

  DistributionSpec();  // Normal(0, 1)
  explicit DistributionSpec(Kind kind);

  static DistributionSpec normal(double mean, double stddev);
  static DistributionSpec uniform(double lo, double hi);
  static DistributionSpec cauchy(double location, double scale);
  static DistributionSpec power_tail(double alpha);

  /// Parses `normal(0,1)`, `uniform(-1,1)`, `cauchy(0,1)`, `powertail(1.25)`.
  static DistributionSpec parse(std::string_view text);
  std::string to_string() const;

  const Kind& kind() const noexcept { return kind_; }
  template <class T>
  bool is() const noexcept {
    return std::holds_alternative<T>(kind_);
  }

  double density(double x) const;
  double cdf(double x) const;
  /// 1 - cdf(x), without cancellation in the upper tail.
  double upper_tail(double x) const;
  double quantile(double u) const;

  void sample(Engine& eng, std::span<double> out) const;
  std::vector<double> sample(SeedSpec seed, std::size_t n) const;

  /// Location and spread used to place quadrature breakpoints.
  double center() const noexcept;
  double scale() const noexcept;
  /// Finite support edges and other non-smooth points of the density.
  std::vector<double> kinks() const;
  double support_lo() const noexcept;
  double support_hi() const noexcept;

  bool has_finite_mean() const noexcept;
  /// True for laws symmetric about the origin.
  bool symmetric_about_zero() const noexcept;

  /// Power-tail only: 2 * (tabulated half mass), equal to 1 up to quadrature error.
  double tabulated_mass() const;

  friend bool operator==(const DistributionSpec& a, const DistributionSpec& b);

 private:
  Kind kind_;
  std::shared_ptr<const detail::PowerTailTable> table_;
};

inline double density(const DistributionSpec& spec, double x) { return spec.density(x); }
inline double cdf(const DistributionSpec& spec, double x) { return spec.cdf(x); }
inline std::vector<double> sample(const DistributionSpec& spec, SeedSpec seed, std::size_t n) {
  return spec.sample(seed, n);
}

}  // namespace collide1d
