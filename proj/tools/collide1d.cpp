// Command-line front end: simulate, limits, experiment, emit.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "collide1d/elastic.hpp"
#include "collide1d/errors.hpp"
#include "collide1d/event_sim.hpp"
#include "collide1d/experiment.hpp"
#include "collide1d/limit_laws.hpp"

namespace {

using namespace collide1d;
using nlohmann::json;

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

struct SimulateArgs {
  std::string fx = "normal(0,1)";
  std::string fv = "normal(0,1)";
  std::size_t n = 10;
  double eps = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  std::string events_csv;
  bool with_events = false;
};

int cmd_simulate(const SimulateArgs& a) {
  const auto fx = DistributionSpec::parse(a.fx);
  const auto fv = DistributionSpec::parse(a.fv);
  const auto ensemble = make_ensemble(fx, fv, a.n, SeedSpec{a.seed, a.trial});
  const auto out = simulate(ensemble, CollisionRule{a.eps, a.beta});
  json j{{"N", a.n},
         {"epsilon", a.eps},
         {"beta", a.beta},
         {"seed", a.seed},
         {"trial", a.trial},
         {"system_final", out.system_final},
         {"event_count", out.event_count},
         {"per_particle_final", out.per_particle_final},
         {"collisions_per_particle", out.collisions_per_particle},
         {"mean_alpha", mean_positive_collision_fraction(out, a.n)},
         {"terminal_velocities", out.terminal_velocities},
         {"position_order", out.position_order},
         {"terminal_sorted", out.terminal_sorted()},
         {"underflow_warnings", out.underflow_warnings}};
  if (a.eps == 0.0) j["elastic_system_final"] = order_stats(ensemble).system_final;
  if (a.with_events) {
    json ev = json::array();
    for (const auto& e : out.events) {
      ev.push_back({{"time", e.time},
                    {"left", e.left_index},
                    {"right", e.right_index},
                    {"pre", {e.pre_velocities.first, e.pre_velocities.second}},
                    {"post", {e.post_velocities.first, e.post_velocities.second}}});
    }
    j["events"] = std::move(ev);
  }
  if (!a.events_csv.empty()) {
    std::ofstream os(a.events_csv);
    if (!os) throw IoError("cannot write " + a.events_csv);
    write_event_log(os, out);
  }
  std::cout << j.dump(2) << '\n';
  return kOk;
}

struct LimitsArgs {
  std::string fx = "normal(0,1)";
  std::string fv = "normal(0,1)";
  std::string theorem = "both";
  std::string curve;
  double mu_max = 5.0;
  std::size_t points = 200;
};

int cmd_limits(const LimitsArgs& a) {
  const auto fx = DistributionSpec::parse(a.fx);
  const auto fv = DistributionSpec::parse(a.fv);
  std::vector<Theorem> which;
  if (a.theorem == "both") {
    which = {single_theorem_for(fx), system_theorem_for(fx)};
  } else if (a.theorem == "single") {
    which = {single_theorem_for(fx)};
  } else if (a.theorem == "system") {
    which = {system_theorem_for(fx)};
  } else {
    which = {theorem_from_string(a.theorem)};
  }
  json laws = json::array();
  std::vector<LimitLaw> built;
  for (Theorem t : which) {
    const LimitLaw law = make_law(t, fx, fv);
    laws.push_back({{"theorem", to_string(t)},
                    {"fx", fx.to_string()},
                    {"fv", fv.to_string()},
                    {"constant", is_system_law(t) ? json(law.constant) : json(nullptr)},
                    {"alpha", law.alpha},
                    {"scaling", law.scaling},
                    {"median_coefficient", limit_median(law)},
                    {"median", limit_median_root(law)}});
    built.push_back(law);
  }
  if (!a.curve.empty()) {
    if (a.points < 2) throw DomainError("--points must be at least 2");
    std::ofstream os(a.curve);
    if (!os) throw IoError("cannot write " + a.curve);
    os << "mu";
    for (Theorem t : which) os << "," << to_string(t);
    os << '\n';
    for (std::size_t k = 1; k <= a.points; ++k) {
      const double mu = a.mu_max * static_cast<double>(k) / static_cast<double>(a.points);
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", mu);
      os << buf;
      for (const auto& law : built) {
        std::snprintf(buf, sizeof buf, ",%.17g", limit_cdf(law, mu));
        os << buf;
      }
      os << '\n';
    }
    if (!os) throw IoError("failed writing " + a.curve);
  }
  std::cout << laws.dump(2) << '\n';
  return kOk;
}

int cmd_experiment(const std::string& config_path, const std::string& output_dir, std::size_t workers) {
  auto cfg = ExperimentConfig::from_file(config_path);
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  if (workers) cfg.workers = workers;
  const auto report = run(cfg);
  json j{{"report", report.report_path.string()},
         {"cells", report.cells.size()},
         {"shards_reused", report.shards_reused},
         {"wall_seconds", report.wall_seconds}};
  if (report.convergence_slope) j["convergence_slope"] = *report.convergence_slope;
  if (report.fit_t) j["fit_t"] = report.fit_t->coefficients;
  if (report.fit_T) j["fit_T"] = report.fit_T->coefficients;
  if (report.fit_TNt) j["fit_TNt"] = report.fit_TNt->coefficients;
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_emit(const std::string& report_path, const std::string& curve, const std::string& out_path) {
  const auto report = load_report(report_path);
  if (out_path.empty()) {
    emit_curve(report, curve, std::cout);
    return kOk;
  }
  std::ofstream os(out_path);
  if (!os) throw IoError("cannot write " + out_path);
  emit_curve(report, curve, os);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"collide1d: one-dimensional colliding particle systems"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Run one trial and print its outcome as JSON");
  s->add_option("--fx", sim.fx, "Position law");
  s->add_option("--fv", sim.fv, "Velocity law");
  s->add_option("--n", sim.n, "Number of particles")->check(CLI::Range(2, 1 << 24));
  s->add_option("--eps", sim.eps, "Restitution defect epsilon (< 1)");
  s->add_option("--beta", sim.beta, "Self-retention coefficient beta");
  s->add_option("--seed", sim.seed, "Base seed");
  s->add_option("--trial", sim.trial, "Trial index");
  s->add_option("--events-csv", sim.events_csv, "Write the event log to this CSV file");
  s->add_flag("--with-events", sim.with_events, "Include the event list in the JSON output");

  LimitsArgs lim;
  auto* l = app.add_subcommand("limits", "Print limit-law constants and medians as JSON");
  l->add_option("--fx", lim.fx, "Position law");
  l->add_option("--fv", lim.fv, "Velocity law");
  l->add_option("--theorem", lim.theorem, "single, system, both, or a law name");
  l->add_option("--curve", lim.curve, "Write a (mu, cdf) table to this CSV file");
  l->add_option("--mu-max", lim.mu_max, "Upper end of the curve");
  l->add_option("--points", lim.points, "Number of curve points");

  std::string config_path, output_dir;
  std::size_t workers = 0;
  auto* e = app.add_subcommand("experiment", "Run an experiment from a key=value config file");
  e->add_option("--config", config_path, "Config file")->required();
  e->add_option("--output-dir", output_dir, "Override output_dir");
  e->add_option("--workers", workers, "Override worker count");

  std::string report_path, curve, out_path;
  auto* m = app.add_subcommand("emit", "Write a figure-ready CSV from a report");
  m->add_option("--report", report_path, "report.json of a finished run")->required();
  m->add_option("--curve", curve, "convergence, medians, ratios, poisson, histogram, ecdf:N=<n>")->required();
  m->add_option("--out", out_path, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*s) return cmd_simulate(sim);
    if (*l) return cmd_limits(lim);
    if (*e) return cmd_experiment(config_path, output_dir, workers);
    if (*m) return cmd_emit(report_path, curve, out_path);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kConfig;
  } catch (const DomainError& err) {
    std::cerr << "invalid input: " << err.what() << '\n';
    return kConfig;
  } catch (const IoError& err) {
    std::cerr << "i/o error: " << err.what() << '\n';
    return kIo;
  } catch (const NumericalError& err) {
    std::cerr << "numerical error: " << err.what() << '\n';
    return kNumerical;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return kOk;
}
