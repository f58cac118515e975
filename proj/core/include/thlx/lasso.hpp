#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "thlx/types.hpp"

namespace thlx {

struct LassoOptions {
  int max_sweeps = 100000;
  double tol = 1e-8;                      // KKT residual tolerance
  std::optional<Vector> weights;          // per-coordinate penalty multipliers, >= 0

  void validate(Index p) const;
};

/// Shared solver output. For the Lasso, `objective` is the penalized
/// least-squares value and `kkt_residual` the stationarity violation;
/// for the Dantzig selector, `objective` is the l1 value, `kkt_residual`
/// the feasibility excess and `cert_gap` the optimality gap.
struct FitResult {
  Signal beta;
  double lambda_n = 0.0;
  double kkt_residual = 0.0;
  int iters = 0;
  double objective = 0.0;
  std::string method = "cd";
  double cert_gap = 0.0;

  Index nnz(double tol = 0.0) const { return static_cast<Index>(beta.support(tol).size()); }
};

/// sign(z) * max(|z| - t, 0).
double soft_threshold(double z, double t);

double lasso_objective(const DesignMatrix& X, const Vector& Y, const Signal& beta,
                       double lambda_n, const std::optional<Vector>& weights = {});

/// Max stationarity violation over coordinates; the certificate checked by tests.
double lasso_kkt_residual(const DesignMatrix& X, const Vector& Y, const Signal& beta,
                          double lambda_n, const std::optional<Vector>& weights = {});

struct LassoNonConvergence : std::runtime_error {
  LassoNonConvergence(std::string msg, FitResult best_iterate)
      : std::runtime_error(std::move(msg)), best(std::move(best_iterate)) {}
  FitResult best;
};

/// Cyclic coordinate descent for
///   min (1/2n) ||Y - X b||^2 + lambda_n sum_j w_j |b_j|
/// run to the KKT tolerance in opts. Throws LassoNonConvergence with the
/// best iterate if the sweep budget runs out.
FitResult fit_lasso(const DesignMatrix& X, const Vector& Y, double lambda_n,
                    const LassoOptions& opts = {});

/// Smallest penalty with all-zero solution, max_j |X_j^T Y / n| / w_j.
double lambda_max(const DesignMatrix& X, const Vector& Y,
                  const std::optional<Vector>& weights = {});

/// Geometric grid from lambda_max down to min_ratio * lambda_max.
std::vector<double> default_lambda_grid(const DesignMatrix& X, const Vector& Y,
                                        int count = 100, double min_ratio = 0.01);

/// Warm-started fits over a strictly decreasing positive grid.
std::vector<FitResult> lasso_path(const DesignMatrix& X, const Vector& Y,
                                  const std::vector<double>& grid,
                                  const LassoOptions& opts = {});

/// Second-stage weighted Lasso on supp(beta_init) with w_j = 1/|beta_init_j|,
/// solved on the reduced problem and re-embedded into length p.
std::vector<FitResult> fit_adaptive_lasso(const DesignMatrix& X, const Vector& Y,
                                          const Signal& beta_init,
                                          const std::vector<double>& grid,
                                          const LassoOptions& opts = {});

}  // namespace thlx
