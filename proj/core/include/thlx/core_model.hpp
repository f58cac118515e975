#pragma once

#include "thlx/types.hpp"

namespace thlx {

/// Rescales every column of X to l2 norm sqrt(n). The applied factors are
/// kept in DesignMatrix::column_scales. Throws std::domain_error naming the
/// offending column when one has zero norm. Idempotent.
DesignMatrix normalize_columns(const DesignMatrix& X);

/// lambda = sqrt(2 log(p) / n). Requires p >= 2, n >= 1.
double lambda_base(Index p, Index n, LogBase base = LogBase::natural);

struct NoiseBound {
  double bound;       // sigma * sqrt(1+a) * sqrt(2 ln(p) / n)
  double prob_floor;  // 1 - 1 / (sqrt(pi ln p) * p^a)
};

/// Bound on ||X^T eps / n||_inf holding with probability >= prob_floor
/// for N(0, sigma^2) noise against sqrt(n)-normalized columns.
/// Natural log throughout; this is the theory-facing quantity.
NoiseBound noise_bound(Index p, Index n, double sigma, double a);

}  // namespace thlx
