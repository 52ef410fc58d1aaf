#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "collide1d/elastic.hpp"

namespace collide1d {

/// Post-collision velocities: left' = (1-eps) right + beta left,
/// right' = (1-eps) left + beta right.
struct CollisionRule {
  double epsilon = 0.0;
  double beta = 0.0;
};

/// Throws DomainError unless eps < 1, beta >= 0 and beta < 1 - eps (the
/// pair must separate after colliding).
void validate_rule(const CollisionRule& rule);

struct CollisionEvent {
  double time = 0.0;
  // Particle labels (indices into the ensemble), left one first.
  std::size_t left_index = 0;
  std::size_t right_index = 0;
  std::pair<double, double> pre_velocities;
  std::pair<double, double> post_velocities;
};

struct SimulationOutcome {
  std::vector<CollisionEvent> events;  // empty unless SimOptions::record_events
  std::vector<double> per_particle_final;
  double system_final = 0.0;
  std::vector<std::size_t> collisions_per_particle;
  std::vector<double> terminal_velocities;  // by label
  std::vector<std::size_t> position_order;  // labels left to right
  std::size_t event_count = 0;
  // Adjacent pairs skipped because their approach speed underflowed.
  std::size_t underflow_warnings = 0;

  /// True when terminal velocities increase strictly in position order.
  bool terminal_sorted() const;
};

struct SimOptions {
  bool record_events = true;
  // Checks event positions and ordering after every event (O(N) each).
  bool validate = false;
  // 0 selects default_event_cap.
  std::size_t max_events = 0;
};

/// 10 N^2 max(1, ceil(1/(1-|eps|))); for |eps| >= 1 the factor is ceil(1+|eps|).
std::size_t default_event_cap(std::size_t n, double epsilon);

/// Event-driven forward simulation until no adjacent pair approaches.
SimulationOutcome simulate(const ParticleEnsemble& e, const CollisionRule& rule,
                           const SimOptions& opts = {});

/// Inverse dynamics: eps' = 1 - 1/(1-eps). Requires beta = 0.
CollisionRule time_reverse_rule(const CollisionRule& rule);

/// Collisions at negative times: runs (X, -V) under the reversed rule and
/// negates event times. per_particle_final then holds each particle's
/// earliest collision time (0 if none).
SimulationOutcome simulate_backward(const ParticleEnsemble& e, const CollisionRule& rule,
                                    const SimOptions& opts = {});

/// collisions_per_particle[i] / (N - 1).
std::vector<double> positive_collision_fraction(const SimulationOutcome& outcome, std::size_t n);
double mean_positive_collision_fraction(const SimulationOutcome& outcome, std::size_t n);

/// CSV: event_index,time,left,right,v_left_pre,v_right_pre,v_left_post,v_right_post
void write_event_log(std::ostream& os, const SimulationOutcome& outcome);

}  // namespace collide1d
