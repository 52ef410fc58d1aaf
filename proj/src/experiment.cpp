#include "collide1d/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "collide1d/elastic.hpp"
#include "collide1d/errors.hpp"
#include "collide1d/event_sim.hpp"
#include "collide1d/farm.hpp"
#include "collide1d/limit_laws.hpp"

namespace collide1d {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::pair<ExperimentKind, const char*> kKindNames[] = {
    {ExperimentKind::ElasticSingleCDF, "elastic_single_cdf"},
    {ExperimentKind::ElasticSystemCDF, "elastic_system_cdf"},
    {ExperimentKind::ConvergenceSweep, "convergence_sweep"},
    {ExperimentKind::HeavyTailSweep, "heavy_tail_sweep"},
    {ExperimentKind::PairHistogram, "pair_histogram"},
    {ExperimentKind::NonElasticMedians, "nonelastic_medians"},
    {ExperimentKind::PoissonCheck, "poisson_check"},
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': bad number '" + s + "'");
  }
}

std::uint64_t parse_uint(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': bad count '" + s + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ",";
    if constexpr (std::is_floating_point_v<T>) {
      out += num(v[k]);
    } else {
      out += std::to_string(v[k]);
    }
  }
  return out;
}

bool is_cdf_kind(ExperimentKind k) {
  return k == ExperimentKind::ElasticSingleCDF || k == ExperimentKind::ElasticSystemCDF ||
         k == ExperimentKind::ConvergenceSweep || k == ExperimentKind::HeavyTailSweep;
}

std::size_t pick_particle(SeedSpec seed, std::size_t n) {
  Engine eng = make_stream(seed, Substream::Selection);
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng);
}

// Limit CDF that is cheap to evaluate many times. System laws are closed
// form; single laws are mixtures, so they are tabulated on a fine grid over
// [lo, hi] and interpolated linearly.
std::function<double(double)> fast_law_cdf(const LimitLaw& law, double lo, double hi) {
  if (is_system_law(law.theorem)) {
    return [law](double mu) { return mu > 0.0 ? limit_cdf(law, mu) : 0.0; };
  }
  constexpr std::size_t kPoints = 16385;
  auto table = std::make_shared<std::vector<double>>(kPoints);
  for (std::size_t k = 0; k < kPoints; ++k) {
    const double mu = lo + (hi - lo) * static_cast<double>(k) / (kPoints - 1);
    (*table)[k] = mu > 0.0 ? limit_cdf(law, mu) : 0.0;
  }
  return [law, table, lo, hi](double mu) {
    if (mu <= 0.0) return 0.0;
    if (mu < lo || mu > hi) return limit_cdf(law, mu);
    const double h = (mu - lo) / (hi - lo) * (kPoints - 1);
    const auto k = std::min(static_cast<std::size_t>(h), kPoints - 2);
    const double frac = h - static_cast<double>(k);
    return (*table)[k] + frac * ((*table)[k + 1] - (*table)[k]);
  };
}

LimitLaw law_for(const ExperimentConfig& cfg) {
  const Theorem t = cfg.experiment == ExperimentKind::ElasticSingleCDF ? single_theorem_for(cfg.fx)
                                                                       : system_theorem_for(cfg.fx);
  return make_law(t, cfg.fx, cfg.fv);
}

std::string shard_name(ExperimentKind kind, std::size_t n, std::size_t eps_index, std::size_t shard) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s_N%zu_e%02zu_s%04zu.csv", to_string(kind).c_str(), n, eps_index, shard);
  return buf;
}

json median_json(const MedianEstimate& m) {
  return {{"point", m.point},       {"ci_lo", m.ci_lo},         {"ci_hi", m.ci_hi},
          {"confidence", m.confidence}, {"resamples", m.resamples}, {"resample_sd", m.resample_sd}};
}

MedianEstimate median_from_json(const json& j) {
  MedianEstimate m;
  m.point = j.at("point");
  m.ci_lo = j.at("ci_lo");
  m.ci_hi = j.at("ci_hi");
  m.confidence = j.at("confidence");
  m.resamples = j.at("resamples");
  m.resample_sd = j.at("resample_sd");
  return m;
}

json fit_json(const RegressionFit& f) {
  return {{"design", f.design == RegressionDesign::ThroughOrigin_D1_D2 ? "D1_D2" : "D0_D1_D2"},
          {"coefficients", f.coefficients},
          {"residual_rms", f.residual_rms}};
}

RegressionFit fit_from_json(const json& j) {
  RegressionFit f;
  f.design = j.at("design") == "D1_D2" ? RegressionDesign::ThroughOrigin_D1_D2
                                       : RegressionDesign::WithIntercept_D0_D1_D2;
  f.coefficients = j.at("coefficients").get<std::vector<double>>();
  f.residual_rms = j.at("residual_rms");
  return f;
}

std::vector<double> load_cell_rows(const ExperimentReport& report, const CellRecord& cell) {
  const fs::path base = report.report_path.parent_path();
  const auto width = cell.columns.size();
  const std::size_t size = report.config.shard_size;
  std::vector<double> rows;
  for (std::size_t s = 0; s < cell.shards.size(); ++s) {
    ShardHeader h;
    h.experiment = to_string(report.config.experiment);
    h.n = cell.n;
    h.eps = cell.eps;
    h.shard = s;
    h.first_trial = s * size;
    h.trials = std::min(size, cell.trials - s * size);
    h.columns = cell.columns;
    auto part = read_shard(base / cell.shards[s], h);
    if (!part) throw IoError("shard " + (base / cell.shards[s]).string() + " is missing or corrupt");
    rows.insert(rows.end(), part->begin(), part->end());
  }
  if (rows.size() != cell.trials * width) throw IoError("shard rows do not match the report");
  return rows;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void header(const std::vector<std::string>& names) {
    for (std::size_t k = 0; k < names.size(); ++k) os_ << (k ? "," : "") << names[k];
    os_ << '\n';
  }
  void row(const std::vector<double>& values) {
    for (std::size_t k = 0; k < values.size(); ++k) os_ << (k ? "," : "") << num(values[k]);
    os_ << '\n';
  }

 private:
  std::ostream& os_;
};

}  // namespace

std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "unknown";
}

ExperimentKind experiment_from_string(const std::string& s) {
  for (const auto& [kind, name] : kKindNames) {
    if (s == name) return kind;
  }
  throw ConfigError("unknown experiment '" + s + "'");
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_experiment = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "experiment") {
        cfg.experiment = experiment_from_string(value);
        have_experiment = true;
      } else if (key == "fx") {
        cfg.fx = DistributionSpec::parse(value);
      } else if (key == "fv") {
        cfg.fv = DistributionSpec::parse(value);
      } else if (key == "n_values") {
        cfg.n_values.clear();
        for (const auto& t : split(value, ',')) cfg.n_values.push_back(parse_uint(key, t));
      } else if (key == "eps_values") {
        cfg.eps_values.clear();
        for (const auto& t : split(value, ',')) cfg.eps_values.push_back(parse_double(key, t));
      } else if (key == "epsn_values") {
        cfg.epsn_values.clear();
        for (const auto& t : split(value, ',')) cfg.epsn_values.push_back(parse_double(key, t));
      } else if (key == "trials") {
        cfg.trials = value == "auto" ? 0 : parse_uint(key, value);
      } else if (key == "base_seed") {
        cfg.base_seed = parse_uint(key, value);
      } else if (key == "output_dir") {
        cfg.output_dir = value;
      } else if (key == "workers") {
        cfg.workers = value == "auto" ? 0 : parse_uint(key, value);
      } else if (key == "interval") {
        const auto parts = split(value, ',');
        if (parts.size() != 2) throw ConfigError("interval takes lo,hi");
        cfg.interval_lo = parse_double(key, parts[0]);
        cfg.interval_hi = parse_double(key, parts[1]);
      } else if (key == "grid") {
        cfg.grid = parse_uint(key, value);
      } else if (key == "confidence") {
        cfg.confidence = parse_double(key, value);
      } else if (key == "resamples") {
        cfg.resamples = parse_uint(key, value);
      } else if (key == "ci_method") {
        if (value == "percentile") {
          cfg.ci_method = CiMethod::Percentile;
        } else if (value == "normal") {
          cfg.ci_method = CiMethod::Normal;
        } else {
          throw ConfigError("ci_method must be percentile or normal");
        }
      } else if (key == "exclude_zero_final") {
        if (value != "true" && value != "false") throw ConfigError("exclude_zero_final must be true or false");
        cfg.exclude_zero_final = value == "true";
      } else if (key == "shard_size") {
        cfg.shard_size = parse_uint(key, value);
      } else if (key == "t_value") {
        cfg.t_value = parse_double(key, value);
      } else if (key == "bins") {
        cfg.bins = parse_uint(key, value);
      } else if (key == "hist_range") {
        const auto parts = split(value, ',');
        if (parts.size() != 2) throw ConfigError("hist_range takes lo,hi");
        cfg.hist_lo = parse_double(key, parts[0]);
        cfg.hist_hi = parse_double(key, parts[1]);
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    } catch (const DomainError& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
  if (!have_experiment) throw ConfigError("config must set 'experiment'");
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream os;
  os << "experiment = " << to_string(experiment) << '\n'
     << "fx = " << fx.to_string() << '\n'
     << "fv = " << fv.to_string() << '\n'
     << "n_values = " << join(n_values) << '\n';
  if (!eps_values.empty()) os << "eps_values = " << join(eps_values) << '\n';
  if (!epsn_values.empty()) os << "epsn_values = " << join(epsn_values) << '\n';
  os << "trials = " << (trials ? std::to_string(trials) : "auto") << '\n'
     << "base_seed = " << base_seed << '\n'
     << "output_dir = " << output_dir.string() << '\n'
     << "workers = " << (workers ? std::to_string(workers) : "auto") << '\n'
     << "interval = " << num(interval_lo) << "," << num(interval_hi) << '\n'
     << "grid = " << grid << '\n'
     << "confidence = " << num(confidence) << '\n'
     << "resamples = " << resamples << '\n'
     << "ci_method = " << (ci_method == CiMethod::Percentile ? "percentile" : "normal") << '\n'
     << "exclude_zero_final = " << (exclude_zero_final ? "true" : "false") << '\n'
     << "shard_size = " << shard_size << '\n'
     << "t_value = " << num(t_value) << '\n'
     << "bins = " << bins << '\n'
     << "hist_range = " << num(hist_lo) << "," << num(hist_hi) << '\n';
  return os.str();
}

void ExperimentConfig::validate() const {
  if (n_values.empty()) throw ConfigError("n_values must list at least one N");
  for (auto n : n_values) {
    if (n < 2) throw ConfigError("every N must be at least 2");
  }
  if (!eps_values.empty() && !epsn_values.empty()) throw ConfigError("set eps_values or epsn_values, not both");
  const bool elastic = experiment != ExperimentKind::NonElasticMedians;
  for (double e : eps_values) {
    if (!std::isfinite(e) || !(e < 1.0)) throw ConfigError("every eps must be finite and below 1");
    if (elastic && e != 0.0) throw ConfigError(to_string(experiment) + " is elastic; eps must be 0");
  }
  for (auto n : n_values) {
    for (double x : epsn_values) {
      if (!std::isfinite(x) || !(x / static_cast<double>(n) < 1.0)) throw ConfigError("eps*N values give eps >= 1");
      if (elastic && x != 0.0) throw ConfigError(to_string(experiment) + " is elastic; eps must be 0");
    }
  }
  if (!(interval_lo >= 0.0 && interval_lo < interval_hi)) throw ConfigError("interval must satisfy 0 <= lo < hi");
  if (grid < 2) throw ConfigError("grid must be at least 2");
  if (!(confidence > 0.0 && confidence < 1.0)) throw ConfigError("confidence must lie in (0,1)");
  if (resamples < 2) throw ConfigError("resamples must be at least 2");
  if (shard_size < 1) throw ConfigError("shard_size must be positive");
  if (!(t_value > 0.0)) throw ConfigError("t_value must be positive");
  if (bins < 1 || !(hist_lo < hist_hi)) throw ConfigError("histogram needs bins >= 1 and lo < hi");
  if (experiment == ExperimentKind::ConvergenceSweep && !fx.has_finite_mean()) {
    throw ConfigError("convergence_sweep needs positions with a finite mean; use heavy_tail_sweep");
  }
}

std::vector<double> ExperimentConfig::eps_for(std::size_t n) const {
  if (experiment != ExperimentKind::NonElasticMedians) return {0.0};
  std::vector<double> eps;
  if (!epsn_values.empty()) {
    for (double x : epsn_values) eps.push_back(x / static_cast<double>(n));
  } else if (!eps_values.empty()) {
    eps = eps_values;
  } else {
    for (int k = 0; k <= 10; ++k) eps.push_back(-5e-3 + 1e-3 * k);
    eps[5] = 0.0;
  }
  if (std::find(eps.begin(), eps.end(), 0.0) == eps.end()) eps.push_back(0.0);
  std::sort(eps.begin(), eps.end());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
  return eps;
}

std::size_t ExperimentConfig::trials_for(std::size_t n) const {
  if (trials > 0) return trials;
  if (experiment == ExperimentKind::ConvergenceSweep || experiment == ExperimentKind::HeavyTailSweep) {
    const double n4 = std::pow(static_cast<double>(n), 4.0);
    return static_cast<std::size_t>(std::min(n4, 1e6));
  }
  return 10000;
}

const CellRecord& ExperimentReport::cell(std::size_t n, std::size_t eps_index) const {
  for (const auto& c : cells) {
    if (c.n == n && c.eps_index == eps_index) return c;
  }
  throw DomainError("report has no cell N=" + std::to_string(n) + " eps_index=" + std::to_string(eps_index));
}

std::vector<std::string> shard_columns(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::ElasticSingleCDF: return {"t_selected"};
    case ExperimentKind::ElasticSystemCDF:
    case ExperimentKind::ConvergenceSweep:
    case ExperimentKind::HeavyTailSweep: return {"T", "min_tau"};
    case ExperimentKind::PairHistogram: return {"tau12"};
    case ExperimentKind::NonElasticMedians: return {"t_selected", "T", "mean_alpha", "events"};
    case ExperimentKind::PoissonCheck: return {"exceedances", "T"};
  }
  return {};
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t n) {
  return mix64(base_seed ^ mix64(static_cast<std::uint64_t>(n)));
}

void run_trial(const ExperimentConfig& config, std::size_t n, double eps, SeedSpec seed, std::span<double> row) {
  const ParticleEnsemble e = make_ensemble(config.fx, config.fv, n, seed);
  switch (config.experiment) {
    case ExperimentKind::ElasticSingleCDF: {
      const auto s = order_stats(e);
      row[0] = s.per_particle_final[pick_particle(seed, n)];
      return;
    }
    case ExperimentKind::ElasticSystemCDF:
    case ExperimentKind::ConvergenceSweep:
    case ExperimentKind::HeavyTailSweep: {
      const auto s = order_stats(e);
      row[0] = s.system_final;
      row[1] = s.system_min;
      return;
    }
    case ExperimentKind::PairHistogram:
      row[0] = pair_time(e, 0, 1);
      return;
    case ExperimentKind::NonElasticMedians: {
      SimOptions opts;
      opts.record_events = false;
      const auto out = simulate(e, CollisionRule{eps, 0.0}, opts);
      row[0] = out.per_particle_final[pick_particle(seed, n)];
      row[1] = out.system_final;
      row[2] = mean_positive_collision_fraction(out, n);
      row[3] = static_cast<double>(out.event_count);
      return;
    }
    case ExperimentKind::PoissonCheck: {
      const double nn = static_cast<double>(n);
      const double z = nn * (nn - 1.0) / 2.0 * config.t_value;
      row[0] = static_cast<double>(exceedance_count(e, z));
      row[1] = order_stats(e).system_final;
      return;
    }
  }
}

ExperimentReport run(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const fs::path shard_dir = config.output_dir / "shards";
  std::error_code ec;
  fs::create_directories(shard_dir, ec);
  if (ec) throw IoError("cannot create " + shard_dir.string() + ": " + ec.message());

  ExperimentReport report;
  report.config = config;
  const int workers = resolve_workers(config.workers);
  const auto columns = shard_columns(config.experiment);
  const std::size_t width = columns.size();

  std::optional<LimitLaw> law;
  std::function<double(double)> law_cdf;
  if (is_cdf_kind(config.experiment) || config.experiment == ExperimentKind::PoissonCheck) {
    law = law_for(config);
    law_cdf = fast_law_cdf(*law, config.interval_lo, config.interval_hi);
  }

  std::vector<std::pair<double, double>> conv_points;
  std::vector<std::pair<double, double>> pts_t, pts_T, pts_TNt;

  for (std::size_t n : config.n_values) {
    const auto eps_list = config.eps_for(n);
    const std::size_t trials = config.trials_for(n);
    const std::uint64_t cseed = cell_seed(config.base_seed, n);
    std::vector<CellRecord> group;
    for (std::size_t ei = 0; ei < eps_list.size(); ++ei) {
      CellRecord cell;
      cell.n = n;
      cell.eps = eps_list[ei];
      cell.eps_index = ei;
      cell.trials = trials;
      cell.columns = columns;

      std::vector<double> rows;
      rows.reserve(trials * width);
      const std::size_t shard_count = (trials + config.shard_size - 1) / config.shard_size;
      for (std::size_t s = 0; s < shard_count; ++s) {
        ShardHeader h;
        h.experiment = to_string(config.experiment);
        h.n = n;
        h.eps = cell.eps;
        h.shard = s;
        h.first_trial = s * config.shard_size;
        h.trials = std::min(config.shard_size, trials - s * config.shard_size);
        h.columns = columns;
        const std::string name = shard_name(config.experiment, n, ei, s);
        cell.shards.push_back("shards/" + name);
        std::vector<double> part;
        if (auto cached = read_shard(shard_dir / name, h)) {
          part = std::move(*cached);
          ++report.shards_reused;
        } else {
          const double eps = cell.eps;
          part = farm_trials(
              h.first_trial, h.trials, width,
              [&](std::uint64_t k, std::span<double> row) { run_trial(config, n, eps, SeedSpec{cseed, k}, row); },
              workers);
          write_shard(shard_dir / name, h, part);
        }
        rows.insert(rows.end(), part.begin(), part.end());
      }

      if (law) {
        cell.theorem = to_string(law->theorem);
        cell.law_constant = law->constant;
        cell.law_median = limit_median_root(*law);
      }
      switch (config.experiment) {
        case ExperimentKind::ElasticSingleCDF:
        case ExperimentKind::ElasticSystemCDF:
        case ExperimentKind::ConvergenceSweep:
        case ExperimentKind::HeavyTailSweep: {
          std::vector<double> x = column(rows, width, 0);
          const double scale = normalizer(*law, n);
          for (double& v : x) v /= scale;
          cell.normalized_median = median(x);
          const EmpiricalCDF ecdf(std::move(x));
          cell.sup_distance = sup_distance(ecdf, law_cdf, config.interval_lo, config.interval_hi, config.grid);
          conv_points.emplace_back(static_cast<double>(n), *cell.sup_distance);
          break;
        }
        case ExperimentKind::PairHistogram: {
          const auto tau = column(rows, width, 0);
          const auto counts = histogram(tau, config.hist_lo, config.hist_hi, config.bins);
          cell.normalized_median = median(tau);
          const auto* nx = std::get_if<Normal>(&config.fx.kind());
          const auto* nv = std::get_if<Normal>(&config.fv.kind());
          if (nx && nv) {
            const auto ref = DistributionSpec::cauchy(0.0, nx->stddev / nv->stddev);
            const double width_bin = (config.hist_hi - config.hist_lo) / static_cast<double>(config.bins);
            double worst = 0.0;
            for (std::size_t b = 0; b < config.bins; ++b) {
              const double lo = config.hist_lo + width_bin * static_cast<double>(b);
              const double p = ref.cdf(lo + width_bin) - ref.cdf(lo);
              const double expect = p * static_cast<double>(trials);
              const double se = std::sqrt(static_cast<double>(trials) * p * (1.0 - p));
              worst = std::max(worst, std::abs(static_cast<double>(counts[b]) - expect) / se);
            }
            cell.hist_max_z = worst;
          }
          break;
        }
        case ExperimentKind::NonElasticMedians: {
          std::vector<double> t = column(rows, width, 0);
          const auto big_t = column(rows, width, 1);
          const auto alpha = column(rows, width, 2);
          const auto zeros = static_cast<double>(std::count(t.begin(), t.end(), 0.0));
          cell.zero_final_fraction = zeros / static_cast<double>(t.size());
          if (config.exclude_zero_final) t.erase(std::remove(t.begin(), t.end(), 0.0), t.end());
          const SeedSpec bseed{cseed, 0x5EED0000ULL + ei};
          cell.m_t = bootstrap_median(t, config.confidence, config.resamples, bseed, config.ci_method);
          cell.m_T = bootstrap_median(big_t, config.confidence, config.resamples, SeedSpec{bseed.base_seed, bseed.trial_index + 0x100},
                                      config.ci_method);
          cell.mean_alpha = std::accumulate(alpha.begin(), alpha.end(), 0.0) / static_cast<double>(alpha.size());
          break;
        }
        case ExperimentKind::PoissonCheck: {
          const auto c = column(rows, width, 0);
          std::vector<std::uint64_t> counts(c.size());
          std::transform(c.begin(), c.end(), counts.begin(), [](double v) { return static_cast<std::uint64_t>(v); });
          cell.lambda = law->constant / std::pow(config.t_value, law->alpha);
          cell.poisson = poisson_count_check(counts, cell.lambda);
          break;
        }
      }
      group.push_back(std::move(cell));
    }

    if (config.experiment == ExperimentKind::NonElasticMedians) {
      const auto base = std::find_if(group.begin(), group.end(), [](const CellRecord& c) { return c.eps == 0.0; });
      const double mt0 = base->m_t->point;
      const double mT0 = base->m_T->point;
      for (auto& c : group) {
        const double x = c.eps * static_cast<double>(n);
        c.log_mt_ratio = std::log(c.m_t->point / mt0);
        c.log_mT_ratio = std::log(c.m_T->point / mT0);
        c.log_mT_nmt = std::log(c.m_T->point / (static_cast<double>(n) * c.m_t->point));
        pts_t.emplace_back(x, c.log_mt_ratio);
        pts_T.emplace_back(x, c.log_mT_ratio);
        pts_TNt.emplace_back(x, c.log_mT_nmt);
      }
    }
    for (auto& c : group) report.cells.push_back(std::move(c));
  }

  if ((config.experiment == ExperimentKind::ConvergenceSweep || config.experiment == ExperimentKind::HeavyTailSweep) &&
      conv_points.size() >= 3) {
    bool positive = std::all_of(conv_points.begin(), conv_points.end(), [](const auto& p) { return p.second > 0.0; });
    if (positive) report.convergence_slope = loglog_slope(conv_points);
  }
  if (config.experiment == ExperimentKind::NonElasticMedians) {
    report.fit_t = fit_eps_regression(pts_t, RegressionDesign::ThroughOrigin_D1_D2);
    report.fit_T = fit_eps_regression(pts_T, RegressionDesign::ThroughOrigin_D1_D2);
    std::set<double> distinct;
    for (const auto& p : pts_TNt) distinct.insert(p.first);
    if (distinct.size() >= 3) report.fit_TNt = fit_eps_regression(pts_TNt, RegressionDesign::WithIntercept_D0_D1_D2);
  }

  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.report_path = config.output_dir / "report.json";
  write_report(report, report.report_path);
  return report;
}

void write_report(const ExperimentReport& report, const fs::path& path) {
  json j;
  j["config"] = report.config.to_text();
  j["wall_seconds"] = report.wall_seconds;
  j["shards_reused"] = report.shards_reused;
  if (report.convergence_slope) j["convergence_slope"] = *report.convergence_slope;
  if (report.fit_t) j["fit_t"] = fit_json(*report.fit_t);
  if (report.fit_T) j["fit_T"] = fit_json(*report.fit_T);
  if (report.fit_TNt) j["fit_TNt"] = fit_json(*report.fit_TNt);
  j["cells"] = json::array();
  for (const auto& c : report.cells) {
    json cj{{"N", c.n},           {"eps", c.eps},       {"eps_index", c.eps_index},
            {"trials", c.trials}, {"shards", c.shards}, {"columns", c.columns}};
    if (!c.theorem.empty()) {
      cj["theorem"] = c.theorem;
      cj["law_constant"] = std::isnan(c.law_constant) ? json(nullptr) : json(c.law_constant);
      cj["law_median"] = c.law_median;
    }
    if (c.sup_distance) {
      cj["sup_distance"] = *c.sup_distance;
      cj["normalized_median"] = c.normalized_median;
    }
    if (c.m_t) {
      cj["M_t"] = median_json(*c.m_t);
      cj["M_T"] = median_json(*c.m_T);
      cj["mean_alpha"] = c.mean_alpha;
      cj["zero_final_fraction"] = c.zero_final_fraction;
      cj["log_Mt_ratio"] = c.log_mt_ratio;
      cj["log_MT_ratio"] = c.log_mT_ratio;
      cj["log_MT_NMt"] = c.log_mT_nmt;
    }
    if (c.poisson) {
      cj["lambda"] = c.lambda;
      cj["poisson"] = {{"mean", c.poisson->mean},
                       {"variance", c.poisson->variance},
                       {"mean_err", c.poisson->mean_err},
                       {"var_err", c.poisson->var_err}};
    }
    if (c.hist_max_z) cj["hist_max_z"] = *c.hist_max_z;
    if (c.theorem.empty() && !c.sup_distance && !c.m_t && !c.poisson) cj["median_tau"] = c.normalized_median;
    j["cells"].push_back(std::move(cj));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

ExperimentReport load_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report " + path.string());
  json j;
  try {
    in >> j;
    ExperimentReport r;
    r.config = ExperimentConfig::parse(j.at("config").get<std::string>());
    r.wall_seconds = j.value("wall_seconds", 0.0);
    r.shards_reused = j.value("shards_reused", std::size_t{0});
    if (j.contains("convergence_slope")) r.convergence_slope = j["convergence_slope"].get<double>();
    if (j.contains("fit_t")) r.fit_t = fit_from_json(j["fit_t"]);
    if (j.contains("fit_T")) r.fit_T = fit_from_json(j["fit_T"]);
    if (j.contains("fit_TNt")) r.fit_TNt = fit_from_json(j["fit_TNt"]);
    for (const auto& cj : j.at("cells")) {
      CellRecord c;
      c.n = cj.at("N");
      c.eps = cj.at("eps");
      c.eps_index = cj.at("eps_index");
      c.trials = cj.at("trials");
      c.shards = cj.at("shards").get<std::vector<std::string>>();
      c.columns = cj.at("columns").get<std::vector<std::string>>();
      if (cj.contains("theorem")) {
        c.theorem = cj["theorem"];
        c.law_constant = cj["law_constant"].is_null() ? std::nan("") : cj["law_constant"].get<double>();
        c.law_median = cj["law_median"];
      }
      if (cj.contains("sup_distance")) {
        c.sup_distance = cj["sup_distance"].get<double>();
        c.normalized_median = cj["normalized_median"];
      }
      if (cj.contains("median_tau")) c.normalized_median = cj["median_tau"];
      if (cj.contains("M_t")) {
        c.m_t = median_from_json(cj["M_t"]);
        c.m_T = median_from_json(cj["M_T"]);
        c.mean_alpha = cj["mean_alpha"];
        c.zero_final_fraction = cj["zero_final_fraction"];
        c.log_mt_ratio = cj["log_Mt_ratio"];
        c.log_mT_ratio = cj["log_MT_ratio"];
        c.log_mT_nmt = cj["log_MT_NMt"];
      }
      if (cj.contains("poisson")) {
        PoissonCheck p;
        p.mean = cj["poisson"]["mean"];
        p.variance = cj["poisson"]["variance"];
        p.mean_err = cj["poisson"]["mean_err"];
        p.var_err = cj["poisson"]["var_err"];
        c.poisson = p;
        c.lambda = cj["lambda"];
      }
      if (cj.contains("hist_max_z")) c.hist_max_z = cj["hist_max_z"].get<double>();
      r.cells.push_back(std::move(c));
    }
    r.report_path = path;
    return r;
  } catch (const json::exception& e) {
    throw IoError("malformed report " + path.string() + ": " + e.what());
  }
}

void emit_curve(const ExperimentReport& report, const std::string& which, std::ostream& out) {
  CsvWriter csv(out);
  const auto& cfg = report.config;
  if (which == "convergence") {
    csv.header({"N", "sup_distance"});
    for (const auto& c : report.cells) {
      if (c.sup_distance) csv.row({static_cast<double>(c.n), *c.sup_distance});
    }
  } else if (which == "medians") {
    csv.header({"N", "eps", "epsN", "M_t", "M_t_lo", "M_t_hi", "M_T", "M_T_lo", "M_T_hi", "mean_alpha"});
    for (const auto& c : report.cells) {
      if (!c.m_t) continue;
      csv.row({static_cast<double>(c.n), c.eps, c.eps * static_cast<double>(c.n), c.m_t->point, c.m_t->ci_lo,
               c.m_t->ci_hi, c.m_T->point, c.m_T->ci_lo, c.m_T->ci_hi, c.mean_alpha});
    }
  } else if (which == "ratios") {
    csv.header({"N", "eps", "epsN", "log_Mt_ratio", "log_MT_ratio", "log_MT_NMt"});
    for (const auto& c : report.cells) {
      if (!c.m_t) continue;
      csv.row({static_cast<double>(c.n), c.eps, c.eps * static_cast<double>(c.n), c.log_mt_ratio, c.log_mT_ratio,
               c.log_mT_nmt});
    }
  } else if (which == "poisson") {
    csv.header({"N", "t", "lambda", "mean", "variance", "mean_err", "var_err"});
    for (const auto& c : report.cells) {
      if (!c.poisson) continue;
      csv.row({static_cast<double>(c.n), cfg.t_value, c.lambda, c.poisson->mean, c.poisson->variance,
               c.poisson->mean_err, c.poisson->var_err});
    }
  } else if (which == "histogram") {
    if (cfg.experiment != ExperimentKind::PairHistogram) throw DomainError("histogram curve needs a pair_histogram report");
    csv.header({"N", "bin_lo", "bin_hi", "count", "density", "reference_density"});
    const auto* nx = std::get_if<Normal>(&cfg.fx.kind());
    const auto* nv = std::get_if<Normal>(&cfg.fv.kind());
    for (const auto& c : report.cells) {
      const auto tau = load_cell_rows(report, c);
      const auto counts = histogram(tau, cfg.hist_lo, cfg.hist_hi, cfg.bins);
      const double w = (cfg.hist_hi - cfg.hist_lo) / static_cast<double>(cfg.bins);
      for (std::size_t b = 0; b < cfg.bins; ++b) {
        const double lo = cfg.hist_lo + w * static_cast<double>(b);
        double ref = std::nan("");
        if (nx && nv) {
          const auto cauchy = DistributionSpec::cauchy(0.0, nx->stddev / nv->stddev);
          ref = (cauchy.cdf(lo + w) - cauchy.cdf(lo)) / w;
        }
        csv.row({static_cast<double>(c.n), lo, lo + w, static_cast<double>(counts[b]),
                 static_cast<double>(counts[b]) / (static_cast<double>(c.trials) * w), ref});
      }
    }
  } else if (which.rfind("ecdf:", 0) == 0) {
    if (!is_cdf_kind(cfg.experiment)) throw DomainError("ecdf curves need a CDF experiment report");
    std::size_t n = 0;
    std::size_t eps_index = 0;
    for (const auto& part : split(which.substr(5), ',')) {
      const auto eq = part.find('=');
      if (eq == std::string::npos) throw DomainError("bad curve id '" + which + "'");
      const std::string key = part.substr(0, eq);
      const std::string value = part.substr(eq + 1);
      if (key == "N") {
        n = parse_uint("N", value);
      } else if (key == "eps") {
        eps_index = parse_uint("eps", value);
      } else {
        throw DomainError("bad curve id '" + which + "'");
      }
    }
    const CellRecord& c = report.cell(n, eps_index);
    const LimitLaw law = law_for(cfg);
    const auto rows = load_cell_rows(report, c);
    std::vector<double> x = column(rows, c.columns.size(), 0);
    const double scale = normalizer(law, n);
    for (double& v : x) v /= scale;
    const EmpiricalCDF ecdf(std::move(x));
    const auto cdf = fast_law_cdf(law, cfg.interval_lo, cfg.interval_hi);
    csv.header({"t", "empirical", "theoretical", "absdiff"});
    for (std::size_t k = 0; k < cfg.grid; ++k) {
      const double t = cfg.interval_lo + (cfg.interval_hi - cfg.interval_lo) * static_cast<double>(k) /
                                             static_cast<double>(cfg.grid - 1);
      const double e = ecdf(t);
      const double f = cdf(t);
      csv.row({t, e, f, std::abs(e - f)});
    }
  } else {
    throw DomainError("unknown curve id '" + which + "'");
  }
  if (!out) throw IoError("failed writing curve " + which);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string header_line(const ShardHeader& h) {
  std::string cols;
  for (std::size_t k = 0; k < h.columns.size(); ++k) cols += (k ? ";" : "") + h.columns[k];
  return "# collide1d shard experiment=" + h.experiment + " N=" + std::to_string(h.n) + " eps=" + num(h.eps) +
         " shard=" + std::to_string(h.shard) + " first_trial=" + std::to_string(h.first_trial) +
         " trials=" + std::to_string(h.trials) + " columns=" + cols;
}

}  // namespace

void write_shard(const fs::path& path, const ShardHeader& header, const std::vector<double>& rows) {
  const std::size_t width = header.columns.size();
  std::string body;
  for (std::size_t k = 0; k < header.trials; ++k) {
    for (std::size_t c = 0; c < width; ++c) {
      body += (c ? "," : "");
      body += num(rows[k * width + c]);
    }
    body += '\n';
  }
  char foot[96];
  std::snprintf(foot, sizeof foot, "# checksum=%016llx rows=%zu\n",
                static_cast<unsigned long long>(fnv1a64(body)), header.trials);
  std::string names;
  for (std::size_t c = 0; c < width; ++c) names += (c ? "," : "") + header.columns[c];

  // Write to a temporary name, then rename, so a killed run never leaves a
  // truncated shard under the final name.
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write shard " + tmp.string());
    out << header_line(header) << '\n' << names << '\n' << body << foot;
    if (!out) throw IoError("failed writing shard " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename shard into place: " + ec.message());
}

std::optional<std::vector<double>> read_shard(const fs::path& path, const ShardHeader& expect) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string line;
  if (!std::getline(in, line) || line != header_line(expect)) return std::nullopt;
  if (!std::getline(in, line)) return std::nullopt;  // column names
  std::string body;
  std::vector<double> rows;
  rows.reserve(expect.trials * expect.columns.size());
  std::size_t count = 0;
  bool footer = false;
  std::string foot;
  while (std::getline(in, line)) {
    if (line.rfind("# checksum=", 0) == 0) {
      footer = true;
      foot = line;
      break;
    }
    body += line;
    body += '\n';
    const auto fields = split(line, ',');
    if (fields.size() != expect.columns.size()) return std::nullopt;
    for (const auto& f : fields) {
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (end != f.c_str() + f.size()) return std::nullopt;
      rows.push_back(v);
    }
    ++count;
  }
  if (!footer || count != expect.trials) return std::nullopt;
  char want[96];
  std::snprintf(want, sizeof want, "# checksum=%016llx rows=%zu", static_cast<unsigned long long>(fnv1a64(body)),
                count);
  if (foot != want) return std::nullopt;
  return rows;
}

}  // namespace collide1d
