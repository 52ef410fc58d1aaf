#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "collide1d/distribution.hpp"
#include "collide1d/stats.hpp"

namespace collide1d {

enum class ExperimentKind {
  ElasticSingleCDF,
  ElasticSystemCDF,
  ConvergenceSweep,
  HeavyTailSweep,
  PairHistogram,
  NonElasticMedians,
  PoissonCheck,
};

std::string to_string(ExperimentKind k);
ExperimentKind experiment_from_string(const std::string& s);

/// Parsed from a key=value file; see README for the keys.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::ElasticSystemCDF;
  DistributionSpec fx;
  DistributionSpec fv;
  std::vector<std::size_t> n_values;
  std::vector<double> eps_values;
  // Alternative to eps_values: eps = value / N for every N.
  std::vector<double> epsn_values;
  std::size_t trials = 0;  // 0: min(N^4, 1e6) for sweeps, 1e4 otherwise
  std::uint64_t base_seed = 0;
  std::filesystem::path output_dir = "collide1d_out";
  std::size_t workers = 0;  // 0: auto

  double interval_lo = 0.0;
  double interval_hi = 5.0;
  std::size_t grid = 512;
  double confidence = 0.99;
  std::size_t resamples = 100;
  CiMethod ci_method = CiMethod::Percentile;
  bool exclude_zero_final = false;
  std::size_t shard_size = 10000;
  double t_value = 1.0;  // PoissonCheck threshold z = C(N,2) t
  std::size_t bins = 100;
  double hist_lo = -10.0;
  double hist_hi = 10.0;

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig from_file(const std::filesystem::path& path);
  /// Canonical key=value form; parse(to_text()) round-trips.
  std::string to_text() const;
  void validate() const;

  /// Epsilon grid for one N; NonElasticMedians always includes 0.
  std::vector<double> eps_for(std::size_t n) const;
  std::size_t trials_for(std::size_t n) const;
};

struct CellRecord {
  std::size_t n = 0;
  double eps = 0.0;
  std::size_t eps_index = 0;
  std::size_t trials = 0;
  std::vector<std::string> shards;
  std::vector<std::string> columns;

  // CDF experiments
  std::string theorem;
  double law_constant = 0.0;
  double law_median = 0.0;
  std::optional<double> sup_distance;
  double normalized_median = 0.0;

  // NonElasticMedians
  std::optional<MedianEstimate> m_t;
  std::optional<MedianEstimate> m_T;
  double mean_alpha = 0.0;
  double zero_final_fraction = 0.0;
  double log_mt_ratio = 0.0;
  double log_mT_ratio = 0.0;
  double log_mT_nmt = 0.0;

  // PoissonCheck
  std::optional<PoissonCheck> poisson;
  double lambda = 0.0;

  // PairHistogram: largest |count - expected| / binomial SE over bins.
  std::optional<double> hist_max_z;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<CellRecord> cells;
  std::optional<double> convergence_slope;
  std::optional<RegressionFit> fit_t;    // log(M_t / M_t(eps=0))
  std::optional<RegressionFit> fit_T;    // log(M_T / M_T(eps=0))
  std::optional<RegressionFit> fit_TNt;  // log(M_T / (N M_t)), with intercept
  double wall_seconds = 0.0;
  std::size_t shards_reused = 0;
  std::filesystem::path report_path;

  const CellRecord& cell(std::size_t n, std::size_t eps_index = 0) const;
};

/// Runs every (N, eps) cell, writing shards and report.json under
/// config.output_dir. Valid shards from an earlier run are reused.
ExperimentReport run(const ExperimentConfig& config);

/// Column names of the per-trial shard rows of an experiment.
std::vector<std::string> shard_columns(ExperimentKind k);

/// One trial of an experiment at (N, eps); writes shard_columns() values.
void run_trial(const ExperimentConfig& config, std::size_t n, double eps, SeedSpec seed, std::span<double> row);

/// Seed base of the cell for N. Trials of one N share seeds across eps.
std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t n);

void write_report(const ExperimentReport& report, const std::filesystem::path& path);
ExperimentReport load_report(const std::filesystem::path& path);

/// Curve ids: convergence, medians, ratios, poisson, histogram, ecdf:N=<n>
/// (optionally ecdf:N=<n>,eps=<index>). Writes CSV to `out`.
void emit_curve(const ExperimentReport& report, const std::string& which, std::ostream& out);

// Shard files ---------------------------------------------------------------

struct ShardHeader {
  std::string experiment;
  std::size_t n = 0;
  double eps = 0.0;
  std::size_t shard = 0;
  std::uint64_t first_trial = 0;
  std::size_t trials = 0;
  std::vector<std::string> columns;
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

void write_shard(const std::filesystem::path& path, const ShardHeader& header, const std::vector<double>& rows);
/// Rows of a shard whose header matches `expect` and whose checksum
/// verifies; nullopt otherwise.
std::optional<std::vector<double>> read_shard(const std::filesystem::path& path, const ShardHeader& expect);

}  // namespace collide1d
