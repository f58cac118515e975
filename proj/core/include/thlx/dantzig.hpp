#pragma once

#include "thlx/lasso.hpp"
#include "thlx/types.hpp"

namespace thlx {

enum class DantzigMethod { simplex, first_order };

struct DantzigOptions {
  double feas_tol = 1e-8;
  double opt_tol = 1e-6;
  DantzigMethod method = DantzigMethod::simplex;
  int max_iters = 0;  // 0 = method-specific default

  void validate() const;
};

/// min ||b||_1 subject to ||X^T (Y - X b) / n||_inf <= lambda_n, solved as a
/// linear program. The returned FitResult carries the feasibility excess in
/// kkt_residual and the optimality certificate in cert_gap.
FitResult fit_dantzig(const DesignMatrix& X, const Vector& Y, double lambda_n,
                      const DantzigOptions& opts = {});

struct DantzigFeasibility {
  bool feasible;
  double residual;  // ||X^T (Y - X b) / n||_inf
};

DantzigFeasibility dantzig_feasible(const DesignMatrix& X, const Vector& Y,
                                    const Signal& beta, double lambda_n,
                                    double feas_tol = 1e-8);

}  // namespace thlx
