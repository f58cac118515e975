#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "thlx/rng.hpp"
#include "thlx/types.hpp"

namespace thlx {

enum class ScanMode { exhaustive, greedy_sampled };

inline constexpr std::uint64_t kDefaultSubsetBudget = 1'000'000;

/// Number of size-m subsets of [0, p), saturating at 2^63-1.
std::uint64_t subset_count(Index p, Index m);

struct SparseEigs {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  bool exact = false;  // sampled mode: lambda_max is a lower bound of the true
                       // maximum, lambda_min an upper bound of the true minimum
};

/// Extremal eigenvalues of X_T^T X_T / n over |T| = m. Exhaustive mode scans
/// every subset (budget capped); sampled mode mixes random subsets with greedy
/// column swaps and flags the results as one-sided bounds.
SparseEigs sparse_eigs(const DesignMatrix& X, Index m, ScanMode mode,
                       std::uint64_t budget = kDefaultSubsetBudget,
                       RngStream* rng = nullptr);

struct ThetaEstimate {
  double theta = 0.0;
  bool exact = false;  // sampled mode: lower bound
};

/// Restricted orthogonality theta_{s,s'}: max over disjoint (T, T') of the
/// top singular value of X_T^T X_{T'} / n.
ThetaEstimate restricted_orthogonality(const DesignMatrix& X, Index s, Index s_prime,
                                       ScanMode mode,
                                       std::uint64_t budget = kDefaultSubsetBudget,
                                       RngStream* rng = nullptr);

struct ReLowerResult {
  double k_lower = 0.0;   // lower bound on the restricted eigenvalue constant K
  bool diverged = false;  // a near-null cone witness was found (K effectively infinite)
  double min_quotient = 0.0;
};

/// Projected-gradient search for min ||X v|| / (sqrt(n) ||v_J||) over the cone
/// ||v_{J^c}||_1 <= k0 ||v_J||_1, randomized over supports J of size s0.
/// Sampling can only overestimate the cone minimum, so k_lower <= true K.
ReLowerResult re_lower(const DesignMatrix& X, Index s0, double k0, int restarts,
                       RngStream& rng);

/// Smallest integer s0 with sum_i min(beta_i^2, (lambda sigma)^2) <= s0 (lambda sigma)^2.
Index essential_sparsity(const Signal& beta, double lambda_sigma);

struct IdealMse {
  double raw = 0.0;  // sum_i min(beta_i^2, sigma^2 / n)
  std::optional<double> lower_bound;  // min(1, 1/Lambda_max(s)) * raw
};

IdealMse ideal_mse(const Signal& beta, double sigma, Index n,
                   std::optional<double> lambda_max_s = {});

struct CountingBound {
  Index count = 0;   // |{ j in T0^c : |beta_j| >= lambda_sigma / sqrt(2 c') }|
  double bound = 0;  // (2c' - 1)(s0 - a0)
  bool holds = false;
};

CountingBound counting_bound_check(const Signal& beta, double lambda_sigma,
                                   double c_prime);

struct OracleConstantInputs {
  double d0 = 2.0;
  double k_s0_3 = 1.0;
  double k_s0_4 = 1.0;
  double lmax_s_minus_s0 = 1.0;
  double lmax_s0 = 1.0;
  double lmax_2s0 = 1.0;
  double lmin_2s0 = 1.0;
  double lmax_2s = 1.0;
  double lmin_2s = 1.0;
  double theta_s0_2s0 = 0.0;
  double c4 = 1.0;
  Index s0 = 1;
};

struct OracleConstants {
  double D0 = 0, D0_prime = 0, D1 = 0, D2 = 0, D3 = 0, D4 = 0;
  double ell_s0 = 0, D = 0;
  OracleConstantInputs inputs;
  // K(s0, k0) is only ever estimated, so constants built from it are
  // plug-in values, never certified ones.
  std::string provenance = "plug-in";

  std::string to_json() const;
};

/// Closed-form constants for the Lasso oracle bounds and the thresholded
/// refit. Throws std::domain_error when an eigenvalue input that appears in
/// a denominator is not positive.
OracleConstants oracle_constants(const OracleConstantInputs& in);

struct DSConstantInputs {
  double delta = 0.0;   // delta_{2s}
  double theta = 0.0;   // theta_{s,2s}
  double a = 0.0;
  double tau = 1.0;
  double c4 = 1.0;
  double lmin_2s0 = 1.0;
};

struct DSConstants {
  double C0 = 0, C0_prime = 0, C1 = 0, C2 = 0, C3 = 0;
  DSConstantInputs inputs;
  std::string provenance = "plug-in";

  std::string to_json() const;
};

/// Dantzig-selector constants. Requires the uniform uncertainty margin
/// delta + theta < 1 - tau; otherwise throws std::domain_error.
DSConstants ds_constants(const DSConstantInputs& in);

struct ThresholdRange {
  double t0 = 0.0;
  double beta_min_a0_requirement = 0.0;
  bool breve_below_estimate = false;  // a breve value did not exceed its estimate
};

/// t0 = min(breve_d1, breve_d0) * lambda_sigma and the beta_min lower bound
/// D0 * lambda_sigma * sqrt(s0) + t0 needed for zero false negatives among
/// the strong coordinates.
ThresholdRange threshold_range(const OracleConstants& oracle, double lambda_sigma,
                               double breve_d0, double breve_d1);

struct NoiseEventResult {
  double empirical = 0.0;
  double floor = 0.0;
  double bound = 0.0;
};

/// Monte-Carlo check of the noise correlation event: fraction of reps with
/// ||X^T eps / n||_inf within the closed-form bound, against its floor.
NoiseEventResult noise_event_check(const DesignMatrix& X, double sigma, double a,
                                   int reps, RngStream& rng);

struct IncoherenceReport {
  std::map<Index, SparseEigs> eigs;                        // keyed by m
  std::map<std::pair<Index, Index>, ThetaEstimate> theta;  // keyed by (s, s')
  std::map<Index, double> delta;                           // RIP constants, from eigs
  std::map<std::pair<Index, double>, ReLowerResult> re;    // keyed by (s0, k0)

  std::string to_json() const;
  std::string to_table() const;
};

struct DiagnoseRequest {
  std::vector<Index> eig_orders;
  std::vector<std::pair<Index, Index>> theta_pairs;
  std::vector<std::pair<Index, double>> re_params;
  ScanMode mode = ScanMode::exhaustive;
  std::uint64_t budget = kDefaultSubsetBudget;
  int re_restarts = 40;
  std::uint64_t seed = 0;
};

IncoherenceReport diagnose(const DesignMatrix& X, const DiagnoseRequest& req);

}  // namespace thlx
