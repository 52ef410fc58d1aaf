#pragma once

#include <memory>
#include <string>
#include <vector>

#include "collide1d/distribution.hpp"
#include "collide1d/quadrature.hpp"

namespace collide1d {

enum class Theorem {
  SingleFiniteMean,
  SingleStableAlpha,
  SingleCauchy,
  SystemFiniteMean,
  SystemStableAlpha,
  SystemCauchy,
};

std::string to_string(Theorem t);
Theorem theorem_from_string(const std::string& s);
bool is_system_law(Theorem t);

/// Asymptotic law of a normalised final collision time.
///
/// System laws are Frechet, exp(-C / mu^alpha). Single-particle laws are
/// mixtures E[exp(-C(X,V) / mu^alpha)]; the mixture is discretised once on
/// a product Gauss-Legendre rule in quantile coordinates and kept in
/// `mixture`.
struct LimitLaw {
  Theorem theorem = Theorem::SystemFiniteMean;
  DistributionSpec fx;
  DistributionSpec fv;
  double alpha = 1.0;     // Frechet exponent
  double constant = 0.0;  // C for system laws; NaN for single laws
  std::string scaling;    // normalising sequence, e.g. "N(N-1)/2"

  struct Mixture {
    std::vector<double> weight;
    std::vector<double> c;
  };
  std::shared_ptr<const Mixture> mixture;
};

/// Single and system theorems that apply to a position law.
Theorem single_theorem_for(const DistributionSpec& fx);
Theorem system_theorem_for(const DistributionSpec& fx);

LimitLaw make_law(Theorem theorem, const DistributionSpec& fx, const DistributionSpec& fv,
                  const QuadratureConfig& cfg = {});

/// Normalising sequence for N particles: N, N^{1/a}, N log N, N(N-1)/2,
/// N^{2/a} or N^2 log N.
double normalizer(const LimitLaw& law, std::size_t n);

double limit_cdf(const LimitLaw& law, double mu);

/// Median coefficient. Single laws: root of limit_cdf = 1/2. System laws:
/// (C/ln 2)^{1/alpha}, except SystemFiniteMean which is halved so that the
/// median of T is approximately C_T N^2.
double limit_median(const LimitLaw& law);

/// Median of the normalised variable itself, i.e. the root of limit_cdf = 1/2.
double limit_median_root(const LimitLaw& law);

/// C(X,V) for SingleFiniteMean, C(V) for the other single laws.
double field_constant(const LimitLaw& law, double x, double v, const QuadratureConfig& cfg = {});

// Building blocks -------------------------------------------------------

/// E|X - y| for y fixed, X ~ fx. Infinite-mean laws throw DomainError.
double mean_abs_deviation(const DistributionSpec& fx, double y, const QuadratureConfig& cfg = {});
/// E|X - Y| for X, Y iid fx.
double mean_abs_difference(const DistributionSpec& fx, const QuadratureConfig& cfg = {});
/// Integral of fv^2.
double density_square_integral(const DistributionSpec& fv, const QuadratureConfig& cfg = {});
/// (C_a / a) * integral of fv(V + w) |w|^{-a} dw.
double stable_field_constant(const DistributionSpec& fv, double alpha, double v,
                             const QuadratureConfig& cfg = {});
/// E|V1 - V2|^{-a} for V1, V2 iid fv.
double inverse_moment_difference(const DistributionSpec& fv, double alpha, const QuadratureConfig& cfg = {});

// Exact finite-N representations -----------------------------------------

/// P(tau > z | X, V) for the pair time of a particle at (X, V) and an
/// independent partner.
double conditional_exceedance(const DistributionSpec& fx, const DistributionSpec& fv, double x, double v,
                              double z, const QuadratureConfig& cfg = {});

/// P(tau_{1,2} > z).
double pair_exceedance_prob(const DistributionSpec& fx, const DistributionSpec& fv, double z,
                            const QuadratureConfig& cfg = {});

/// Exact P(t_i^(N) < mu) for finite N.
double finite_n_single_cdf(const DistributionSpec& fx, const DistributionSpec& fv, std::size_t n, double mu,
                           const QuadratureConfig& cfg = {});

}  // namespace collide1d
