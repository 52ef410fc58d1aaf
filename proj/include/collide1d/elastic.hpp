#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "collide1d/distribution.hpp"
#include "collide1d/rng.hpp"

namespace collide1d {

/// Initial positions and velocities of N point particles. Positions and
/// velocities must each be pairwise distinct.
class ParticleEnsemble {
 public:
  ParticleEnsemble(std::vector<double> positions, std::vector<double> velocities);

  std::size_t size() const noexcept { return x_.size(); }
  const std::vector<double>& positions() const noexcept { return x_; }
  const std::vector<double>& velocities() const noexcept { return v_; }

 private:
  std::vector<double> x_, v_;
};

/// Draws positions from `fx` and velocities from `fv` on separate substreams.
ParticleEnsemble make_ensemble(const DistributionSpec& fx, const DistributionSpec& fv,
                               std::size_t n, SeedSpec seed);

struct ElasticOrderStats {
  std::vector<double> per_particle_final;
  double system_final = 0.0;
  double system_min = 0.0;
  std::size_t pair_count = 0;
};

/// Line intersection time (X_j - X_i) / (V_i - V_j). Indices are zero-based.
double pair_time(const ParticleEnsemble& e, std::size_t i, std::size_t j);

/// Serial reference: one pass over the upper triangle.
ElasticOrderStats order_stats(const ParticleEnsemble& e);

/// Row-parallel version. Each row scans all partners, so the work doubles,
/// but results are bit-identical to order_stats.
ElasticOrderStats order_stats_omp(const ParticleEnsemble& e);

/// Free-flight state at time t, sorted by position.
std::vector<std::pair<double, double>> sorted_final_state(const ParticleEnsemble& e, double t);

/// Number of unordered pairs whose intersection time exceeds z.
std::size_t exceedance_count(const ParticleEnsemble& e, double z);

/// All positive intersection times, ascending.
std::vector<double> positive_pair_times(const ParticleEnsemble& e);

}  // namespace collide1d
