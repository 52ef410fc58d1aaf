#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "collide1d/elastic.hpp"
#include "collide1d/errors.hpp"
#include "collide1d/experiment.hpp"
#include "collide1d/farm.hpp"

using namespace collide1d;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("collide1d_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::string emit(const ExperimentReport& r, const std::string& curve) {
  std::ostringstream os;
  emit_curve(r, curve, os);
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig system_config(const fs::path& dir) {
  auto cfg = ExperimentConfig::parse(
      "experiment = elastic_system_cdf\n"
      "fx = normal(0,1)\n"
      "fv = normal(0,1)\n"
      "n_values = 10, 20\n"
      "trials = 3000\n"
      "shard_size = 1000\n"
      "base_seed = 77\n");
  cfg.output_dir = dir;
  return cfg;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = ExperimentConfig::parse(
      "# comment\n"
      "experiment = nonelastic_medians\n"
      "fx = uniform(-1,1)   # trailing comment\n"
      "fv = powertail(1.25)\n"
      "n_values = 50,100\n"
      "eps_values = -0.01, 0.01\n"
      "trials = 500\n"
      "confidence = 0.95\n"
      "ci_method = normal\n"
      "exclude_zero_final = true\n"
      "interval = 0.1, 3\n");
  CHECK(cfg.experiment == ExperimentKind::NonElasticMedians);
  CHECK(cfg.fx == DistributionSpec::uniform(-1, 1));
  CHECK(cfg.n_values == std::vector<std::size_t>{50, 100});
  CHECK(cfg.eps_for(50) == std::vector<double>{-0.01, 0.0, 0.01});
  CHECK(cfg.trials_for(50) == 500);
  CHECK(cfg.ci_method == CiMethod::Normal);
  CHECK(cfg.exclude_zero_final);
  CHECK(cfg.interval_lo == 0.1);
  CHECK(cfg.interval_hi == 3.0);

  const auto back = ExperimentConfig::parse(cfg.to_text());
  CHECK(back.to_text() == cfg.to_text());

  auto dflt = ExperimentConfig::parse("experiment = nonelastic_medians\nn_values = 10\n");
  const auto grid = dflt.eps_for(10);
  CHECK(grid.size() == 11);
  CHECK(grid.front() == doctest::Approx(-5e-3));
  CHECK(grid[5] == 0.0);
  dflt.epsn_values = {-0.5, 0.5};
  CHECK(dflt.eps_for(100) == std::vector<double>{-0.005, 0.0, 0.005});

  const auto sweep = ExperimentConfig::parse("experiment = convergence_sweep\nn_values = 5, 40\n");
  CHECK(sweep.trials_for(5) == 625);
  CHECK(sweep.trials_for(40) == 1000000);
  CHECK(ExperimentConfig::parse("experiment = poisson_check\nn_values = 5\n").trials_for(5) == 10000);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(ExperimentConfig::parse("n_values = 10\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("experiment = nope\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("experiment = poisson_check\nn_value = 10\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("experiment = poisson_check\nn_values = ten\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("experiment = poisson_check\nfx = gauss(0,1)\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("experiment poisson_check\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("experiment = poisson_check\nn_values = 1\n").validate(), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("experiment = elastic_system_cdf\nn_values = 5\neps_values = 0.1\n").validate(),
                  ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("experiment = nonelastic_medians\nn_values = 5\neps_values = 1.0\n").validate(),
                  ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::parse("experiment = convergence_sweep\nfx = cauchy(0,1)\nn_values = 5\n").validate(),
      ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_file("/nonexistent/collide1d.conf"), IoError);
}

TEST_CASE("shard files") {
  const auto dir = fresh_dir("shard");
  fs::create_directories(dir);
  ShardHeader h{"poisson_check", 10, 0.0, 2, 2000, 3, {"exceedances", "T"}};
  const std::vector<double> rows{1, 2.5, 0, 1e-300, 3, -7.25};
  write_shard(dir / "a.csv", h, rows);
  CHECK(read_shard(dir / "a.csv", h) == rows);

  ShardHeader other = h;
  other.first_trial = 0;
  CHECK_FALSE(read_shard(dir / "a.csv", other).has_value());
  CHECK_FALSE(read_shard(dir / "missing.csv", h).has_value());

  std::string text = slurp(dir / "a.csv");
  text.replace(text.find("2.5"), 3, "2.6");
  std::ofstream(dir / "a.csv") << text;
  CHECK_FALSE(read_shard(dir / "a.csv", h).has_value());

  std::ofstream(dir / "b.csv") << text.substr(0, text.size() / 2);
  CHECK_FALSE(read_shard(dir / "b.csv", h).has_value());
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("trial farm does not depend on worker count") {
  const auto fx = DistributionSpec::normal(0, 1);
  auto fill = [&](std::uint64_t k, std::span<double> row) {
    const auto e = make_ensemble(fx, fx, 20, SeedSpec{5, k});
    const auto st = order_stats(e);
    row[0] = st.system_final;
    row[1] = st.system_min;
  };
  const auto serial = farm_trials_serial(100, 500, 2, fill);
  CHECK(farm_trials(100, 500, 2, fill, 1) == serial);
  CHECK(farm_trials(100, 500, 2, fill, 3) == serial);
  CHECK(column(serial, 2, 1).size() == 500);

  auto failing = [](std::uint64_t k, std::span<double>) {
    if (k == 37) throw NonterminationError("trial 37");
  };
  CHECK_THROWS_AS(farm_trials(0, 100, 1, failing, 3), NonterminationError);
}

TEST_CASE("seeds") {
  CHECK(cell_seed(1, 10) == cell_seed(1, 10));
  CHECK(cell_seed(1, 10) != cell_seed(1, 11));
  CHECK(cell_seed(1, 10) != cell_seed(2, 10));
}

TEST_CASE("results do not depend on the number of workers") {
  auto a = system_config(fresh_dir("w1"));
  a.workers = 1;
  auto b = system_config(fresh_dir("w3"));
  b.workers = 3;
  const auto ra = run(a);
  const auto rb = run(b);
  for (const std::string curve : {"convergence", "ecdf:N=10", "ecdf:N=20"}) CHECK(emit(ra, curve) == emit(rb, curve));
  for (const auto& c : ra.cells) {
    for (const auto& s : c.shards) CHECK(slurp(a.output_dir / s) == slurp(b.output_dir / s));
  }
}

TEST_CASE("interrupted runs resume from valid shards") {
  auto cfg = system_config(fresh_dir("resume"));
  const auto first = run(cfg);
  CHECK(first.shards_reused == 0);
  const auto want = emit(first, "ecdf:N=20");
  const auto& cell = first.cell(20);
  REQUIRE(cell.shards.size() == 3);
  fs::remove(cfg.output_dir / cell.shards[0]);
  {
    std::string text = slurp(cfg.output_dir / cell.shards[1]);
    std::ofstream(cfg.output_dir / cell.shards[1]) << text.substr(0, text.size() - 40);
  }
  const auto second = run(cfg);
  CHECK(second.shards_reused == 4);
  CHECK(emit(second, "ecdf:N=20") == want);

  const auto loaded = load_report(second.report_path);
  CHECK(emit(loaded, "ecdf:N=20") == want);
  CHECK(emit(loaded, "convergence") == emit(second, "convergence"));
  CHECK(loaded.config.to_text() == cfg.to_text());
  CHECK_THROWS_AS(emit(loaded, "medians_of_nothing"), DomainError);
  CHECK_THROWS_AS(load_report(cfg.output_dir / "nope.json"), IoError);
}

TEST_CASE("curve headers") {
  auto cfg = ExperimentConfig::parse(
      "experiment = nonelastic_medians\nn_values = 20\neps_values = -0.01, 0.01\ntrials = 400\nresamples = 20\n");
  cfg.output_dir = fresh_dir("medians");
  const auto r = run(cfg);
  CHECK(r.cells.size() == 3);
  const auto med = emit(r, "medians");
  CHECK(med.substr(0, med.find('\n')) == "N,eps,epsN,M_t,M_t_lo,M_t_hi,M_T,M_T_lo,M_T_hi,mean_alpha");
  CHECK(r.fit_t.has_value());
  CHECK(r.fit_TNt.has_value());
  const auto& zero = r.cell(20, 1);
  CHECK(zero.eps == 0.0);
  CHECK(zero.log_mt_ratio == 0.0);
  CHECK(zero.log_mT_ratio == 0.0);
  CHECK_THROWS_AS(emit(r, "ecdf:N=20"), DomainError);
  CHECK_THROWS_AS(emit(r, "histogram"), DomainError);

  auto elastic = cfg;
  elastic.eps_values = {0.0};
  elastic.output_dir = fresh_dir("medians0");
  const auto r0 = run(elastic);
  CHECK(r0.fit_t->d1() == 0.0);
  CHECK(r0.fit_t->d2() == 0.0);
}

TEST_CASE("system cdf of a small system") {
  auto cfg = ExperimentConfig::parse("experiment = elastic_system_cdf\nn_values = 20\ntrials = 100000\nbase_seed = 3\n");
  cfg.output_dir = fresh_dir("sys20");
  const auto r = run(cfg);
  CHECK(*r.cell(20).sup_distance < 0.05);
  CHECK(r.cell(20).law_constant == doctest::Approx(1.0 / 3.141592653589793).epsilon(1e-8));
}

TEST_CASE("pair time histogram") {
  auto cfg = ExperimentConfig::parse(
      "experiment = pair_histogram\nn_values = 2\ntrials = 1000000\nbins = 20\nhist_range = -10, 10\nbase_seed = 1\n");
  cfg.output_dir = fresh_dir("hist");
  const auto r = run(cfg);
  CHECK(*r.cell(2).hist_max_z < 3.0);
  const auto h = emit(r, "histogram");
  CHECK(h.substr(0, h.find('\n')) == "N,bin_lo,bin_hi,count,density,reference_density");
}

TEST_CASE("poisson check run") {
  auto cfg = ExperimentConfig::parse("experiment = poisson_check\nn_values = 30\ntrials = 5000\n");
  cfg.output_dir = fresh_dir("poisson");
  const auto r = run(cfg);
  CHECK(r.cell(30).lambda == doctest::Approx(1.0 / 3.141592653589793));
  CHECK(r.cell(30).poisson->mean == doctest::Approx(r.cell(30).lambda).epsilon(0.15));
  const auto p = emit(r, "poisson");
  CHECK(p.substr(0, p.find('\n')) == "N,t,lambda,mean,variance,mean_err,var_err");
}
