#include "thlx/lasso.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace thlx {

void LassoOptions::validate(Index p) const {
  if (!(tol > 0.0)) throw std::invalid_argument("LassoOptions: tol must be > 0");
  if (max_sweeps < 1) throw std::invalid_argument("LassoOptions: max_sweeps >= 1");
  if (weights) {
    if (weights->size() != p) throw std::invalid_argument("LassoOptions: weights length != p");
    if ((weights->array() < 0.0).any()) {
      throw std::invalid_argument("LassoOptions: weights must be >= 0");
    }
  }
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double lasso_objective(const DesignMatrix& X, const Vector& Y, const Signal& beta,
                       double lambda_n, const std::optional<Vector>& weights) {
  const double n = static_cast<double>(X.n());
  const double rss = (Y - X.data * beta.coef).squaredNorm();
  double pen = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    const double w = weights ? (*weights)[j] : 1.0;
    pen += w * std::abs(beta.coef[j]);
  }
  return rss / (2.0 * n) + lambda_n * pen;
}

double lasso_kkt_residual(const DesignMatrix& X, const Vector& Y, const Signal& beta,
                          double lambda_n, const std::optional<Vector>& weights) {
  const double n = static_cast<double>(X.n());
  const Vector r = Y - X.data * beta.coef;
  const Vector g = X.data.transpose() * r / n;
  double worst = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    const double w = weights ? (*weights)[j] : 1.0;
    const double target = lambda_n * w;
    double viol;
    if (beta.coef[j] == 0.0) {
      viol = std::max(0.0, std::abs(g[j]) - target);
    } else {
      viol = std::abs(g[j] - target * (beta.coef[j] > 0.0 ? 1.0 : -1.0));
    }
    worst = std::max(worst, viol);
  }
  return worst;
}

namespace {

struct CdWorkspace {
  Vector col_sq;  // ||X_j||^2 / n
  Vector residual;
  Vector weights;
};

// One cyclic pass over the given coordinates; returns the largest scaled
// coordinate move. Keeps the residual in sync.
double cd_sweep(const Matrix& X, double inv_n, double lambda_n, CdWorkspace& ws,
                Vector& beta, const std::vector<Index>& coords) {
  double max_move = 0.0;
  for (const Index j : coords) {
    const double aj = ws.col_sq[j];
    if (aj == 0.0) continue;
    const double old = beta[j];
    const double gj = X.col(j).dot(ws.residual) * inv_n;
    const double rho = gj + aj * old;
    const double next = soft_threshold(rho, lambda_n * ws.weights[j]) / aj;
    if (next != old) {
      ws.residual.noalias() -= X.col(j) * (next - old);
      beta[j] = next;
      max_move = std::max(max_move, std::sqrt(aj) * std::abs(next - old));
    }
  }
  return max_move;
}

std::vector<Index> all_coords(Index p) {
  std::vector<Index> v(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) v[static_cast<std::size_t>(j)] = j;
  return v;
}

std::vector<Index> active_coords(const Vector& beta) {
  std::vector<Index> v;
  for (Index j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0) v.push_back(j);
  return v;
}

FitResult fit_lasso_warm(const DesignMatrix& X, const Vector& Y, double lambda_n,
                         const LassoOptions& opts, Vector beta) {
  const Index p = X.p();
  opts.validate(p);
  if (Y.size() != X.n()) throw std::invalid_argument("fit_lasso: Y length != n");
  if (lambda_n < 0.0) throw std::invalid_argument("fit_lasso: lambda_n >= 0 required");

  const double inv_n = 1.0 / static_cast<double>(X.n());
  CdWorkspace ws;
  ws.col_sq = X.data.colwise().squaredNorm() * inv_n;
  ws.residual = Y - X.data * beta;
  ws.weights = opts.weights ? *opts.weights : Vector::Ones(p);

  const auto everyone = all_coords(p);
  const double inner_tol = 0.1 * opts.tol;
  int sweeps = 0;
  FitResult out;
  out.lambda_n = lambda_n;

#ifndef NDEBUG
  double prev_obj = lasso_objective(X, Y, Signal(beta), lambda_n, opts.weights);
#endif

  while (sweeps < opts.max_sweeps) {
    cd_sweep(X.data, inv_n, lambda_n, ws, beta, everyone);
    ++sweeps;
#ifndef NDEBUG
    {
      const double obj = lasso_objective(X, Y, Signal(beta), lambda_n, opts.weights);
      assert(obj <= prev_obj + 1e-10 * std::max(1.0, std::abs(prev_obj)));
      prev_obj = obj;
    }
#endif
    auto active = active_coords(beta);
    while (sweeps < opts.max_sweeps) {
      const double move = cd_sweep(X.data, inv_n, lambda_n, ws, beta, active);
      ++sweeps;
      if (move <= inner_tol) break;
    }
    const double kkt = lasso_kkt_residual(X, Y, Signal(beta), lambda_n, opts.weights);
    if (kkt <= opts.tol) {
      out.beta = Signal(std::move(beta));
      out.kkt_residual = kkt;
      out.iters = sweeps;
      out.objective = lasso_objective(X, Y, out.beta, lambda_n, opts.weights);
      return out;
    }
  }

  out.beta = Signal(std::move(beta));
  out.kkt_residual = lasso_kkt_residual(X, Y, out.beta, lambda_n, opts.weights);
  out.iters = sweeps;
  out.objective = lasso_objective(X, Y, out.beta, lambda_n, opts.weights);
  throw LassoNonConvergence(
      "fit_lasso: no convergence after " + std::to_string(sweeps) +
          " sweeps, KKT residual " + std::to_string(out.kkt_residual),
      std::move(out));
}

}  // namespace

FitResult fit_lasso(const DesignMatrix& X, const Vector& Y, double lambda_n,
                    const LassoOptions& opts) {
  return fit_lasso_warm(X, Y, lambda_n, opts, Vector::Zero(X.p()));
}

double lambda_max(const DesignMatrix& X, const Vector& Y,
                  const std::optional<Vector>& weights) {
  const Vector g = X.data.transpose() * Y / static_cast<double>(X.n());
  double lm = 0.0;
  for (Index j = 0; j < g.size(); ++j) {
    const double w = weights ? (*weights)[j] : 1.0;
    if (w > 0.0) lm = std::max(lm, std::abs(g[j]) / w);
  }
  return lm;
}

std::vector<double> default_lambda_grid(const DesignMatrix& X, const Vector& Y, int count,
                                        double min_ratio) {
  if (count < 1) throw std::invalid_argument("default_lambda_grid: count >= 1");
  if (!(min_ratio > 0.0 && min_ratio < 1.0)) {
    throw std::invalid_argument("default_lambda_grid: min_ratio in (0,1)");
  }
  const double top = lambda_max(X, Y);
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (top == 0.0) {
    // Y orthogonal to every column; any positive grid keeps beta = 0.
    for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] =
        std::pow(min_ratio, double(i) / std::max(1, count - 1));
    return grid;
  }
  for (int i = 0; i < count; ++i) {
    const double frac = count == 1 ? 0.0 : double(i) / double(count - 1);
    grid[static_cast<std::size_t>(i)] = top * std::pow(min_ratio, frac);
  }
  return grid;
}

std::vector<FitResult> lasso_path(const DesignMatrix& X, const Vector& Y,
                                  const std::vector<double>& grid,
                                  const LassoOptions& opts) {
  if (grid.empty()) throw std::invalid_argument("lasso_path: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw std::invalid_argument("lasso_path: grid must be positive");
    if (i > 0 && !(grid[i] < grid[i - 1])) {
      throw std::invalid_argument("lasso_path: grid must be strictly decreasing");
    }
  }
  std::vector<FitResult> path;
  path.reserve(grid.size());
  Vector warm = Vector::Zero(X.p());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    try {
      path.push_back(fit_lasso_warm(X, Y, grid[i], opts, warm));
    } catch (const LassoNonConvergence& e) {
      throw LassoNonConvergence(
          "lasso_path: grid index " + std::to_string(i) + ": " + e.what(), e.best);
    }
    warm = path.back().beta.coef;
  }
  return path;
}

std::vector<FitResult> fit_adaptive_lasso(const DesignMatrix& X, const Vector& Y,
                                          const Signal& beta_init,
                                          const std::vector<double>& grid,
                                          const LassoOptions& opts) {
  if (beta_init.size() != X.p()) {
    throw std::invalid_argument("fit_adaptive_lasso: beta_init length != p");
  }
  const auto supp = beta_init.support(0.0);
  const Index p = X.p();
  if (supp.empty()) {
    FitResult zero;
    zero.beta = Signal::zeros(p);
    zero.lambda_n = grid.empty() ? 0.0 : grid.front();
    zero.objective = Y.squaredNorm() / (2.0 * static_cast<double>(X.n()));
    return {zero};
  }

  const Index k = static_cast<Index>(supp.size());
  Matrix xr(X.n(), k);
  Vector w(k);
  for (Index c = 0; c < k; ++c) {
    const Index j = supp[static_cast<std::size_t>(c)];
    xr.col(c) = X.data.col(j);
    w[c] = 1.0 / std::abs(beta_init.coef[j]);
  }
  DesignMatrix Xr(std::move(xr), X.normalized);

  LassoOptions reduced = opts;
  reduced.weights = w;
  auto red_path = lasso_path(Xr, Y, grid, reduced);

  std::vector<FitResult> out;
  out.reserve(red_path.size());
  for (auto& fit : red_path) {
    FitResult full = fit;
    full.beta = Signal::zeros(p);
    for (Index c = 0; c < k; ++c) {
      full.beta.coef[supp[static_cast<std::size_t>(c)]] = fit.beta.coef[c];
    }
    out.push_back(std::move(full));
  }
  return out;
}

}  // namespace thlx
