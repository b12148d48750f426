// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nftk/channel.hpp"
#include "nftk/common.hpp"
#include "nftk/config.hpp"
#include "nftk/recovery.hpp"

namespace nftk {

// ---------------------------------------------------------------------------
// Ground-truth matching and NMSE
// ---------------------------------------------------------------------------

struct MatchResult {
  std::vector<int> truth_to_estimate;  // -1 = missed truth
  double total_cost = 0.0;
};

/// One-to-one assignment between truths and estimates minimizing the
/// normalized squared parameter distance
/// (du)^2 + (dv)^2 + (d(1/r) * r_min)^2. r_min normalizes the inverse
/// distance to the comparable [0, 1] scale of the directional cosines.
MatchResult match_estimates(const std::vector<Scatterer>& truth, const EstimateSet& estimates,
                            double r_min);

struct NmseReport {
  // per-parameter NMSE, linear scale; misses enter with the saturated
  // squared error (parameter range squared)
  double u = 0.0;
  double v = 0.0;
  double invr = 0.0;
  double r = 0.0;
  // set when the truth parameter vector is all-zero and the value above is
  // an absolute MSE instead of a normalized one
  bool u_absolute = false;
  bool v_absolute = false;
  bool invr_absolute = false;
  bool r_absolute = false;
  double channel = 0.0;  // ||H - H_hat||^2 / ||H||^2, linear
  int misses = 0;
};

/// Parameter NMSE over the matched assignment plus channel NMSE against the
/// true (noise-free) channel matrix; H_hat is the projection of H onto the
/// exact-model steering vectors of the estimates (per-snapshot LS gains).
/// r_min/r_max bound the scenario distances and set the saturation ranges.
NmseReport nmse(const std::vector<Scatterer>& truth, const EstimateSet& estimates,
                const MatchResult& match, const ArrayGeometry& geom, const MatC& true_channel,
                double r_min, double r_max);

// ---------------------------------------------------------------------------
// Monte Carlo sweep
// ---------------------------------------------------------------------------

struct TrialRecord {
  std::string scenario_id;
  std::uint64_t seed = 0;
  std::string method_tag;
  NmseReport report;
  long search_space_size = 0;
  double wall_ms = 0.0;  // kept out of the deterministic CSV
};

struct SweepPointAggregate {
  double value = 0.0;  // swept variable value
  std::string method;
  // metric name -> (mean, stderr) over trials, linear scale
  std::map<std::string, std::pair<double, double>> metrics;
};

struct SweepResult {
  std::vector<TrialRecord> records;
  std::vector<SweepPointAggregate> aggregates;
  std::string csv_text;  // byte-deterministic given (config, master seed)
};

/// Names of the aggregated metrics, in CSV row order.
const std::vector<std::string>& sweep_metrics();

/// Full Monte Carlo sweep: per point and trial, sample a scene, synthesize
/// snapshots, run every configured method, and record NMSE. Writes the CSV
/// (and one SVG per metric unless svg_dir is "-"); both are deterministic
/// functions of (config, master_seed). Throws config_error before any trial
/// runs if a method tag is unknown or the master seed is missing.
SweepResult run_sweep(const Config& cfg);

/// Aggregation used by run_sweep, exposed so record order independence is
/// testable: records are keyed by (point index, method, trial).
std::vector<SweepPointAggregate> aggregate_records(const Config& cfg,
                                                   const std::vector<TrialRecord>& records);
std::string sweep_csv(const Config& cfg, const std::vector<SweepPointAggregate>& aggregates);

// ---------------------------------------------------------------------------
// Complexity accounting
// ---------------------------------------------------------------------------

struct ComplexityReport {
  long ad = 0;   // O_h n_h O_v n_v
  long pd = 0;   // ad * (S + 1)
  long tpd = 0;  // O_h n_h + O_v n_v + S_tpd
  bool ordering_holds = false;  // tpd < ad < pd
};

ComplexityReport complexity_report(int n_h, int n_v, int oversample_h, int oversample_v,
                                   int pd_levels, int tpd_levels);

/// Spearman rank correlation (average ranks for ties).
double spearman_rho(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace nftk
