#include "collide1d/event_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <queue>
#include <string>

#include "collide1d/errors.hpp"

namespace collide1d {

namespace {

constexpr double kMinApproachSpeed = 1e-300;

struct QueueEntry {
  double time;
  std::uint32_t slot;
  std::uint32_t version;
};

struct Later {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.slot > b.slot;
  }
};

// Particles stored by slot (position rank). Labels never pass each other, so
// slot k always holds the same particle.
class Simulator {
 public:
  Simulator(const ParticleEnsemble& e, const CollisionRule& rule, const SimOptions& opts)
      : rule_(rule), opts_(opts), n_(e.size()) {
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    const auto& x0 = e.positions();
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return x0[a] < x0[b]; });
    x_.resize(n_);
    v_.resize(n_);
    t_.assign(n_, 0.0);
    for (std::size_t k = 0; k < n_; ++k) {
      x_[k] = x0[order_[k]];
      v_[k] = e.velocities()[order_[k]];
    }
    version_.assign(n_ - 1, 0);
    cap_ = opts.max_events ? opts.max_events : default_event_cap(n_, rule.epsilon);
    double spread = 1.0;
    for (double x : x_) spread = std::max(spread, std::abs(x));
    pos_scale_ = spread;
  }

  SimulationOutcome run() {
    SimulationOutcome out;
    out.per_particle_final.assign(n_, 0.0);
    out.collisions_per_particle.assign(n_, 0);
    for (std::size_t k = 0; k + 1 < n_; ++k) schedule(k, out);

    while (!queue_.empty()) {
      const QueueEntry top = queue_.top();
      queue_.pop();
      if (top.version != version_[top.slot]) continue;
      if (out.event_count >= cap_) {
        throw NonterminationError("event count exceeded the safety cap of " + std::to_string(cap_));
      }
      collide(top.slot, top.time, out);
      if (opts_.validate) check_state(top.time);
      if (top.slot > 0) schedule(top.slot - 1, out);
      schedule(top.slot, out);
      if (top.slot + 2 < n_) schedule(top.slot + 1, out);
    }

    out.terminal_velocities.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) out.terminal_velocities[order_[k]] = v_[k];
    out.position_order = order_;
    return out;
  }

 private:
  double position(std::size_t k, double t) const { return x_[k] + v_[k] * (t - t_[k]); }

  // Earliest future meeting time of slots k and k+1, or -1 if they separate.
  double meeting_time(std::size_t k, SimulationOutcome* out) const {
    const double speed = v_[k] - v_[k + 1];
    if (!(speed > 0.0)) return -1.0;
    if (speed < kMinApproachSpeed) {
      if (out) ++out->underflow_warnings;
      return -1.0;
    }
    const double t0 = std::max(t_[k], t_[k + 1]);
    const double gap = std::max(0.0, position(k + 1, t0) - position(k, t0));
    return t0 + gap / speed;
  }

  void schedule(std::size_t k, SimulationOutcome& out) {
    ++version_[k];
    const double t = meeting_time(k, &out);
    if (t >= 0.0) queue_.push({t, static_cast<std::uint32_t>(k), version_[k]});
  }

  void collide(std::size_t k, double t, SimulationOutcome& out) {
    const double pa = position(k, t);
    const double pb = position(k + 1, t);
    if (opts_.validate && std::abs(pa - pb) > 1e-9 * std::max(pos_scale_, std::abs(pa))) {
      throw InvariantViolation("colliding particles are apart by " + std::to_string(pa - pb));
    }
    const double meet = 0.5 * (pa + pb);
    const double va = v_[k];
    const double vb = v_[k + 1];
    const double keep = 1.0 - rule_.epsilon;
    const double va_new = keep * vb + rule_.beta * va;
    const double vb_new = keep * va + rule_.beta * vb;
    x_[k] = x_[k + 1] = meet;
    t_[k] = t_[k + 1] = t;
    v_[k] = va_new;
    v_[k + 1] = vb_new;
    // A neighbour's entry for slot k-1 or k+1 is rescheduled by the caller.
    ++version_[k];

    const std::size_t a = order_[k];
    const std::size_t b = order_[k + 1];
    ++out.collisions_per_particle[a];
    ++out.collisions_per_particle[b];
    out.per_particle_final[a] = t;
    out.per_particle_final[b] = t;
    out.system_final = std::max(out.system_final, t);
    ++out.event_count;
    if (opts_.record_events) out.events.push_back({t, a, b, {va, vb}, {va_new, vb_new}});
  }

  // Positions stay ordered and no adjacent pair is overdue.
  void check_state(double t) const {
    const double tol = 1e-9 * std::max(pos_scale_, 1.0);
    for (std::size_t k = 0; k + 1 < n_; ++k) {
      const double pa = position(k, t);
      const double pb = position(k + 1, t);
      if (pb < pa - tol * std::max(1.0, std::abs(pa))) {
        throw InvariantViolation("particles passed through each other at t=" + std::to_string(t));
      }
      const double tm = meeting_time(k, nullptr);
      if (tm >= 0.0 && tm < t - 1e-9 * std::max(1.0, t)) {
        throw InvariantViolation("missed collision at t=" + std::to_string(tm));
      }
    }
  }

  CollisionRule rule_;
  SimOptions opts_;
  std::size_t n_;
  std::vector<std::size_t> order_;
  std::vector<double> x_, v_, t_;
  std::vector<std::uint32_t> version_;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, Later> queue_;
  std::size_t cap_ = 0;
  double pos_scale_ = 1.0;
};

}  // namespace

void validate_rule(const CollisionRule& rule) {
  if (!std::isfinite(rule.epsilon) || !(rule.epsilon < 1.0)) {
    throw DomainError("collision rule: epsilon must be finite and below 1");
  }
  if (!std::isfinite(rule.beta) || rule.beta < 0.0) throw DomainError("collision rule: beta must be >= 0");
  if (!(rule.beta < 1.0 - rule.epsilon)) {
    throw DomainError("collision rule: beta must be below 1 - epsilon");
  }
}

bool SimulationOutcome::terminal_sorted() const {
  for (std::size_t k = 0; k + 1 < position_order.size(); ++k) {
    if (!(terminal_velocities[position_order[k]] < terminal_velocities[position_order[k + 1]])) {
      return false;
    }
  }
  return true;
}

std::size_t default_event_cap(std::size_t n, double epsilon) {
  const double a = std::abs(epsilon);
  const double factor = a < 1.0 ? std::max(1.0, std::ceil(1.0 / (1.0 - a))) : std::ceil(1.0 + a);
  return static_cast<std::size_t>(10.0 * static_cast<double>(n) * static_cast<double>(n) * factor);
}

SimulationOutcome simulate(const ParticleEnsemble& e, const CollisionRule& rule, const SimOptions& opts) {
  validate_rule(rule);
  return Simulator(e, rule, opts).run();
}

CollisionRule time_reverse_rule(const CollisionRule& rule) {
  if (rule.beta != 0.0) throw DomainError("time reversal is defined for beta = 0 only");
  if (!(rule.epsilon < 1.0)) throw DomainError("time reversal requires epsilon < 1");
  return {1.0 - 1.0 / (1.0 - rule.epsilon), 0.0};
}

SimulationOutcome simulate_backward(const ParticleEnsemble& e, const CollisionRule& rule,
                                    const SimOptions& opts) {
  std::vector<double> v(e.velocities());
  for (double& w : v) w = -w;
  SimulationOutcome out = simulate(ParticleEnsemble(e.positions(), std::move(v)), time_reverse_rule(rule), opts);
  for (auto& ev : out.events) ev.time = -ev.time;
  for (double& t : out.per_particle_final) t = -t;
  out.system_final = -out.system_final;
  return out;
}

std::vector<double> positive_collision_fraction(const SimulationOutcome& outcome, std::size_t n) {
  if (n < 2) throw DomainError("positive_collision_fraction: N must be at least 2");
  if (outcome.collisions_per_particle.size() != n) throw DomainError("outcome size does not match N");
  std::vector<double> alpha(n);
  for (std::size_t i = 0; i < n; ++i) {
    alpha[i] = static_cast<double>(outcome.collisions_per_particle[i]) / static_cast<double>(n - 1);
  }
  return alpha;
}

double mean_positive_collision_fraction(const SimulationOutcome& outcome, std::size_t n) {
  const auto alpha = positive_collision_fraction(outcome, n);
  return std::accumulate(alpha.begin(), alpha.end(), 0.0) / static_cast<double>(n);
}

void write_event_log(std::ostream& os, const SimulationOutcome& outcome) {
  os << "event_index,time,left,right,v_left_pre,v_right_pre,v_left_post,v_right_post\n";
  char buf[320];
  for (std::size_t k = 0; k < outcome.events.size(); ++k) {
    const auto& ev = outcome.events[k];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%zu,%zu,%.17g,%.17g,%.17g,%.17g\n", k, ev.time, ev.left_index,
                  ev.right_index, ev.pre_velocities.first, ev.pre_velocities.second, ev.post_velocities.first,
                  ev.post_velocities.second);
    os << buf;
  }
  if (!os) throw IoError("failed writing event log");
}

}  // namespace collide1d
