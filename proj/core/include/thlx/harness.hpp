#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thlx/ensembles.hpp"
#include "thlx/metrics.hpp"
#include "thlx/types.hpp"

namespace thlx {

enum class ExperimentKind {
  error_curves,
  model_size_vs_threshold,
  refit_l2_vs_threshold,
  type12_curves,
  rho2_study,
  success_prob,
  roc_compare,
  diagnose,
};

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

enum class SigmaRule { fixed, sqrt_s_over_3, sqrt_s };

std::string to_string(SigmaRule r);
SigmaRule sigma_rule_from_string(const std::string& s);

enum class BetaKind { tiger, spiked, constant };

std::string to_string(BetaKind k);
BetaKind beta_kind_from_string(const std::string& s);

struct BetaConfig {
  BetaKind kind = BetaKind::spiked;
  Index s = 8;
  // tiger
  Index a0 = 0, s0 = 0;
  double c_a = 0.0, c_m = 1.0;
  SupportLayout layout = SupportLayout::permuted;
  // constant
  double magnitude = 0.9;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::type12_curves;
  EnsembleSpec design;
  BetaConfig beta;
  SigmaRule sigma_rule = SigmaRule::fixed;
  double sigma = 1.0;
  std::vector<double> penalty_factors{0.69};   // f_p, lambda_n = f_p * lambda * sigma
  std::vector<double> threshold_factors;       // f_t, t0 = f_t * lambda * sigma
  std::vector<Index> s_list;                   // rho2_study, success_prob
  std::vector<Index> n_list;                   // success_prob
  int reps = 100;
  std::uint64_t master_seed = 0;
  std::string out_dir = "thlx-run";
  LogBase log_base = LogBase::natural;
  std::optional<bool> fixed_design;  // default chosen per kind
  bool full_scale = false;

  bool design_is_fixed() const;
  double resolve_sigma(Index s) const;

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
  std::uint64_t hash() const;

  void validate() const;
};

/// One repetition at one sweep point, in the fixed metrics column order.
struct RunRecord {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  int rep = 0;
  std::string estimator;
  double lambda_factor = 0.0;
  double t0_factor = 0.0;
  ConfusionCounts counts;
  Rates rate;
  double rho2 = 0.0;
  double l2_err = 0.0;
  double l1_err_h = 0.0;
  double l1_err_delta = 0.0;
  double wall_seconds = 0.0;
  bool failed = false;
  std::string error;
};

struct ExperimentOutput {
  std::vector<RunRecord> records;
  std::string runs_csv_path;
  std::string summary_csv_path;
  std::string plot_script_path;
  std::string summary_csv;  // also returned in-memory for the tests
  int failures = 0;
};

/// Runs the declared sweep, persists config + metadata + per-run records +
/// aggregate summary, and writes a gnuplot script for the figure. Repetitions
/// fan out over a worker pool capped by THLX_THREADS; aggregation is by
/// repetition index, so outputs do not depend on the worker count.
ExperimentOutput run_experiment(const ExperimentConfig& config);

/// Self-contained gnuplot script for the given experiment kind.
std::string emit_plot_script(const std::string& summary_csv_path, ExperimentKind kind);

/// Fixed per-run CSV header shared by all experiment kinds.
std::string run_record_csv_header();
std::string to_csv_row(const RunRecord& r);

}  // namespace thlx
