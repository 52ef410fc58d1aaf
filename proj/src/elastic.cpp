#include "collide1d/elastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "collide1d/errors.hpp"

namespace collide1d {

namespace {

void require_distinct(const std::vector<double>& values, const char* what) {
  std::vector<double> s(values);
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end()) {
    throw DegenerateInputError(std::string("ensemble has repeated ") + what);
  }
}

}  // namespace

ParticleEnsemble::ParticleEnsemble(std::vector<double> positions, std::vector<double> velocities)
    : x_(std::move(positions)), v_(std::move(velocities)) {
  if (x_.size() != v_.size()) throw DomainError("positions and velocities differ in length");
  if (x_.size() < 2) throw DomainError("an ensemble needs at least two particles");
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!std::isfinite(x_[i]) || !std::isfinite(v_[i])) throw DomainError("non-finite initial data");
  }
  require_distinct(x_, "positions");
  require_distinct(v_, "velocities");
}

ParticleEnsemble make_ensemble(const DistributionSpec& fx, const DistributionSpec& fv, std::size_t n,
                               SeedSpec seed) {
  std::vector<double> x(n), v(n);
  Engine ex = make_stream(seed, Substream::Positions);
  Engine ev = make_stream(seed, Substream::Velocities);
  fx.sample(ex, x);
  fv.sample(ev, v);
  return ParticleEnsemble(std::move(x), std::move(v));
}

double pair_time(const ParticleEnsemble& e, std::size_t i, std::size_t j) {
  const std::size_t n = e.size();
  if (i >= n || j >= n || i == j) throw DomainError("pair_time: indices must be distinct and in range");
  const auto& x = e.positions();
  const auto& v = e.velocities();
  if (v[i] == v[j]) throw DegenerateInputError("pair_time: equal velocities");
  return (x[j] - x[i]) / (v[i] - v[j]);
}

ElasticOrderStats order_stats(const ParticleEnsemble& e) {
  const std::size_t n = e.size();
  const auto& x = e.positions();
  const auto& v = e.velocities();
  constexpr double lowest = -std::numeric_limits<double>::infinity();
  ElasticOrderStats out;
  out.per_particle_final.assign(n, lowest);
  out.system_final = lowest;
  out.system_min = std::numeric_limits<double>::infinity();
  out.pair_count = n * (n - 1) / 2;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double tau = (x[j] - x[i]) / (v[i] - v[j]);
      out.per_particle_final[i] = std::max(out.per_particle_final[i], tau);
      out.per_particle_final[j] = std::max(out.per_particle_final[j], tau);
      out.system_min = std::min(out.system_min, tau);
    }
  }
  out.system_final = *std::max_element(out.per_particle_final.begin(), out.per_particle_final.end());
  return out;
}

ElasticOrderStats order_stats_omp(const ParticleEnsemble& e) {
  const std::size_t n = e.size();
  const double* x = e.positions().data();
  const double* v = e.velocities().data();
  constexpr double inf = std::numeric_limits<double>::infinity();
  ElasticOrderStats out;
  out.per_particle_final.assign(n, -inf);
  out.pair_count = n * (n - 1) / 2;
  std::vector<double> row_min(n, inf);
  double* pf = out.per_particle_final.data();
  double* rm = row_min.data();
  const long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < nn; ++i) {
    double hi = -inf;
    double lo = inf;
    for (long long j = 0; j < nn; ++j) {
      if (j == i) continue;
      // Same operand order as the serial kernel so both produce identical bits.
      const double tau = i < j ? (x[j] - x[i]) / (v[i] - v[j]) : (x[i] - x[j]) / (v[j] - v[i]);
      hi = std::max(hi, tau);
      lo = std::min(lo, tau);
    }
    pf[i] = hi;
    rm[i] = lo;
  }
  out.system_final = *std::max_element(out.per_particle_final.begin(), out.per_particle_final.end());
  out.system_min = *std::min_element(row_min.begin(), row_min.end());
  return out;
}

std::vector<std::pair<double, double>> sorted_final_state(const ParticleEnsemble& e, double t) {
  const double final_time = order_stats(e).system_final;
  if (!(t > final_time)) {
    throw NotYetSortedError("sorted_final_state: t must exceed the final collision time " +
                            std::to_string(final_time));
  }
  std::vector<std::pair<double, double>> state(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    state[i] = {e.positions()[i] + t * e.velocities()[i], e.velocities()[i]};
  }
  std::sort(state.begin(), state.end());
  return state;
}

std::size_t exceedance_count(const ParticleEnsemble& e, double z) {
  const std::size_t n = e.size();
  const auto& x = e.positions();
  const auto& v = e.velocities();
  std::size_t count = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((x[j] - x[i]) / (v[i] - v[j]) > z) ++count;
    }
  }
  return count;
}

std::vector<double> positive_pair_times(const ParticleEnsemble& e) {
  const std::size_t n = e.size();
  const auto& x = e.positions();
  const auto& v = e.velocities();
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double tau = (x[j] - x[i]) / (v[i] - v[j]);
      if (tau > 0.0) out.push_back(tau);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace collide1d
