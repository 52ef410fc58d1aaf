#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "collide1d/elastic.hpp"
#include "collide1d/errors.hpp"
#include "collide1d/event_sim.hpp"

using namespace collide1d;

namespace {

ParticleEnsemble random_ensemble(std::size_t n, std::uint64_t seed) {
  return make_ensemble(DistributionSpec::normal(0, 1), DistributionSpec::normal(0, 1), n, SeedSpec{seed, 1});
}

std::vector<double> event_times(const SimulationOutcome& out) {
  std::vector<double> t;
  for (const auto& e : out.events) t.push_back(e.time);
  std::sort(t.begin(), t.end());
  return t;
}

}  // namespace

TEST_CASE("two particles") {
  ParticleEnsemble two({0.0, 1.0}, {1.0, 0.0});
  const auto el = simulate(two, {});
  REQUIRE(el.events.size() == 1);
  CHECK(el.events[0].time == 1.0);
  CHECK(el.events[0].post_velocities == std::pair{0.0, 1.0});
  CHECK(el.system_final == 1.0);
  CHECK(el.terminal_sorted());

  const auto in = simulate(two, {0.5, 0.0});
  REQUIRE(in.events.size() == 1);
  CHECK(in.events[0].post_velocities == std::pair{0.0, 0.5});

  const auto ret = simulate(two, {0.2, 0.3});
  CHECK(ret.events[0].post_velocities.first == doctest::Approx(0.3));
  CHECK(ret.events[0].post_velocities.second == doctest::Approx(0.8));

  const auto none = simulate(ParticleEnsemble({0.0, 1.0}, {0.0, 1.0}), {});
  CHECK(none.event_count == 0);
  CHECK(none.system_final == 0.0);
  CHECK(none.per_particle_final == std::vector<double>{0.0, 0.0});
}

TEST_CASE("three particles") {
  ParticleEnsemble three({0.0, 3.0, 7.0}, {2.0, 1.0, 0.0});
  const auto out = simulate(three, {});
  CHECK(event_times(out) == std::vector<double>{3.0, 3.5, 4.0});
  CHECK(out.system_final == 4.0);
  // particles 0,1 meet at 3, then 1,2 at 3.5, then 0,1 again at 4
  CHECK(out.per_particle_final == std::vector<double>{4.0, 4.0, 3.5});
  CHECK(out.terminal_velocities == std::vector<double>{0.0, 1.0, 2.0});
  CHECK(out.position_order == std::vector<std::size_t>{0, 1, 2});
  CHECK(out.collisions_per_particle == std::vector<std::size_t>{2, 3, 1});
  CHECK(mean_positive_collision_fraction(out, 3) == 1.0);
}

TEST_CASE("elastic events are the positive pair times") {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto e = random_ensemble(3 + s * 5, s);
    const auto out = simulate(e, {}, SimOptions{true, true, 0});
    const auto want = positive_pair_times(e);
    const auto got = event_times(out);
    REQUIRE(got.size() == want.size());
    for (std::size_t k = 0; k < got.size(); ++k) CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-9));
    // physical particles bounce, so t_i is not the line maximum r_i; only
    // the overall last event is shared
    if (!want.empty()) CHECK(out.system_final == doctest::Approx(want.back()).epsilon(1e-9));
    for (double t : out.per_particle_final) {
      if (t == 0.0) continue;
      const auto it = std::lower_bound(want.begin(), want.end(), t * (1 - 1e-9));
      CHECK((it != want.end() && std::abs(*it - t) <= 1e-9 * t));
    }
  }
}

TEST_CASE("conservation laws") {
  const auto e = random_ensemble(30, 77);
  for (const auto& ev : simulate(e, {}).events) {
    CHECK(ev.post_velocities.first == ev.pre_velocities.second);
    CHECK(ev.post_velocities.second == ev.pre_velocities.first);
  }
  for (double eps : {0.1, -0.1}) {
    for (const auto& ev : simulate(e, {eps, 0.0}).events) {
      const double pre = ev.pre_velocities.first * ev.pre_velocities.first +
                         ev.pre_velocities.second * ev.pre_velocities.second;
      const double post = ev.post_velocities.first * ev.post_velocities.first +
                          ev.post_velocities.second * ev.post_velocities.second;
      CHECK(post == doctest::Approx((1 - eps) * (1 - eps) * pre).epsilon(1e-12));
    }
  }
}

TEST_CASE("terminal state is sorted for many rules") {
  for (double eps : {-0.5, -0.1, -0.005, 0.0, 0.005, 0.1, 0.5, 0.9}) {
    for (std::uint64_t s = 0; s < 10; ++s) {
      CAPTURE(eps);
      const auto e = random_ensemble(25, 1000 + s);
      const auto out = simulate(e, {eps, 0.0}, SimOptions{false, true, 0});
      CHECK(out.terminal_sorted());
      CHECK(out.event_count < default_event_cap(25, eps));
    }
  }
  const auto out = simulate(random_ensemble(25, 3), {0.2, 0.5}, SimOptions{false, true, 0});
  CHECK(out.terminal_sorted());
}

TEST_CASE("simultaneous events run left to right") {
  ParticleEnsemble four({0.0, 1.0, 2.0, 3.0}, {1.0, 0.0, 1.5, 0.5});
  const auto out = simulate(four, {});
  REQUIRE(out.events.size() >= 2);
  CHECK(out.events[0].time == 1.0);
  CHECK(out.events[1].time == 1.0);
  CHECK(out.events[0].left_index == 0);
  CHECK(out.events[1].left_index == 2);
  CHECK(simulate(four, {}).events.size() == out.events.size());
}

TEST_CASE("rule validation and caps") {
  ParticleEnsemble two({0.0, 1.0}, {1.0, 0.0});
  CHECK_THROWS_AS(simulate(two, {1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(simulate(two, {0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(simulate(two, {0.0, -0.1}), DomainError);
  CHECK_NOTHROW(simulate(two, {-2.0, 0.0}));
  CHECK(default_event_cap(10, 0.0) == 1000);
  CHECK(default_event_cap(10, 0.5) == 2000);
  CHECK(default_event_cap(10, -2.0) == 3000);

  ParticleEnsemble three({0.0, 3.0, 7.0}, {2.0, 1.0, 0.0});
  CHECK_THROWS_AS(simulate(three, {}, SimOptions{true, false, 2}), NonterminationError);
  CHECK_NOTHROW(simulate(three, {}, SimOptions{true, false, 3}));
}

TEST_CASE("time reversal") {
  CHECK(time_reverse_rule({0.0, 0.0}).epsilon == 0.0);
  CHECK(time_reverse_rule({0.5, 0.0}).epsilon == doctest::Approx(-1.0));
  CHECK(time_reverse_rule({0.1, 0.0}).epsilon == doctest::Approx(-1.0 / 9.0));
  CHECK_THROWS_AS(time_reverse_rule({0.1, 0.2}), DomainError);
  // applying the reversed rule undoes a collision
  const double eps = 0.3, r = time_reverse_rule({eps, 0.0}).epsilon;
  CHECK((1 - r) * (1 - eps) == doctest::Approx(1.0));

  const auto e = random_ensemble(20, 5);
  const auto back = simulate_backward(e, {});
  std::vector<double> want;
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = i + 1; j < e.size(); ++j)
      if (pair_time(e, i, j) < 0) want.push_back(pair_time(e, i, j));
  std::sort(want.begin(), want.end());
  const auto got = event_times(back);
  REQUIRE(got.size() == want.size());
  for (std::size_t k = 0; k < got.size(); ++k) CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-9));
  CHECK(back.system_final <= 0.0);
}

TEST_CASE("positive collision fraction") {
  CHECK(positive_collision_fraction(simulate(ParticleEnsemble({0.0, 1.0}, {1.0, 0.0}), {}), 2) ==
        std::vector<double>{1.0, 1.0});
  CHECK(positive_collision_fraction(simulate(ParticleEnsemble({0.0, 1.0}, {0.0, 1.0}), {}), 2) ==
        std::vector<double>{0.0, 0.0});
  CHECK_THROWS_AS(positive_collision_fraction(SimulationOutcome{}, 1), DomainError);
}

TEST_CASE("event log") {
  std::ostringstream os;
  write_event_log(os, simulate(ParticleEnsemble({0.0, 3.0, 7.0}, {2.0, 1.0, 0.0}), {}));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "event_index,time,left,right,v_left_pre,v_right_pre,v_left_post,v_right_post");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 3);
}
