#pragma once

#include <optional>
#include <vector>

#include "thlx/dantzig.hpp"
#include "thlx/lasso.hpp"
#include "thlx/types.hpp"

namespace thlx {

enum class SelectionSource { lasso, dantzig, external };

std::string to_string(SelectionSource s);

struct SelectionSet {
  std::vector<Index> indices;  // sorted, unique, in [0, p)
  double threshold_used = 0.0;
  SelectionSource source = SelectionSource::external;

  Index size() const { return static_cast<Index>(indices.size()); }
  bool contains(Index j) const;
};

/// I = { j : |beta_init_j| >= t0 }. Ties at exactly t0 are included.
SelectionSet threshold_select(const Signal& beta_init, double t0,
                              SelectionSource source = SelectionSource::external);

/// Least squares on the selected columns via Householder QR, zero elsewhere.
/// Throws std::runtime_error when |I| > n or the selected Gram is numerically
/// rank deficient (the message carries a condition estimate).
Signal ols_refit(const DesignMatrix& X, const Vector& Y, const SelectionSet& I);

struct EstimatorResult {
  Signal beta_init;
  SelectionSet selection;
  Signal beta_hat;  // zero outside selection.indices
  double lambda_n = 0.0;
  double t0 = 0.0;
  double init_seconds = 0.0;
  double refit_seconds = 0.0;
  std::vector<std::string> warnings;

  /// JSON record: selection indices, threshold, norms, timings.
  std::string to_json() const;
};

/// Lasso -> hard threshold at t0 -> OLS refit.
EstimatorResult thresholded_lasso(const DesignMatrix& X, const Vector& Y,
                                  double lambda_n, double t0,
                                  const LassoOptions& opts = {});

struct GaussDantzigOptions {
  double a = 0.0;
  double tau = 1.0;
  double c4 = 1.0;            // t0 = c4 * lambda_p_tau * sigma
  std::optional<double> c1;   // valid-range floor; default from the plug-in
                              // constants at delta = theta = 0
  DantzigOptions dantzig{};
};

/// Dantzig selector at lambda_n = (sqrt(1+a) + 1/tau) sqrt(2 ln p / n) sigma,
/// then threshold and OLS refit. Records a warning when c1 >= c4 empties the
/// admissible threshold range.
EstimatorResult gauss_dantzig(const DesignMatrix& X, const Vector& Y, double sigma,
                              const GaussDantzigOptions& opts = {});

/// Path element minimizing ||beta - beta_true||_2 (simulation-only comparator).
const FitResult& lasso_best_l2(const std::vector<FitResult>& path,
                               const Signal& beta_true);

/// Path element maximizing TP - FP against supp(beta_true); ties prefer the
/// smaller support.
const FitResult& lasso_best_support(const std::vector<FitResult>& path,
                                    const Signal& beta_true);

}  // namespace thlx
