#include "thlx/estimators.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "thlx/diagnostics.hpp"
#include "json.hpp"

namespace thlx {

namespace {
double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}
}  // namespace

std::string to_string(SelectionSource s) {
  switch (s) {
    case SelectionSource::lasso: return "lasso";
    case SelectionSource::dantzig: return "dantzig";
    case SelectionSource::external: return "external";
  }
  return "?";
}

bool SelectionSet::contains(Index j) const {
  return std::binary_search(indices.begin(), indices.end(), j);
}

SelectionSet threshold_select(const Signal& beta_init, double t0, SelectionSource source) {
  if (t0 < 0.0) throw std::invalid_argument("threshold_select: t0 >= 0 required");
  SelectionSet out;
  out.threshold_used = t0;
  out.source = source;
  for (Index j = 0; j < beta_init.size(); ++j) {
    const double mag = std::abs(beta_init.coef[j]);
    // Ties at exactly t0 are kept; t0 = 0 selects the support, not all of [p].
    if (mag >= t0 && mag > 0.0) out.indices.push_back(j);
  }
  return out;
}

Signal ols_refit(const DesignMatrix& X, const Vector& Y, const SelectionSet& I) {
  const Index p = X.p(), n = X.n();
  const Index k = I.size();
  if (Y.size() != n) throw std::invalid_argument("ols_refit: Y length != n");
  Signal out = Signal::zeros(p);
  if (k == 0) return out;
  if (k > n) {
    throw std::runtime_error("ols_refit: |I| = " + std::to_string(k) + " exceeds n = " +
                             std::to_string(n));
  }
  Matrix xi(n, k);
  for (Index c = 0; c < k; ++c) {
    const Index j = I.indices[static_cast<std::size_t>(c)];
    if (j < 0 || j >= p) throw std::invalid_argument("ols_refit: index out of range");
    xi.col(c) = X.data.col(j);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(xi);
  const auto& rdiag = qr.matrixR().diagonal();
  const double rmax = std::abs(rdiag[0]);
  const double rmin = std::abs(rdiag[k - 1]);
  if (rmax == 0.0 || rmin / rmax < 1e-12) {
    const double cond = rmin == 0.0 ? std::numeric_limits<double>::infinity() : rmax / rmin;
    throw std::runtime_error("ols_refit: selected Gram numerically rank deficient, "
                             "condition estimate " + std::to_string(cond));
  }
  const Vector coef = qr.solve(Y);
  for (Index c = 0; c < k; ++c) {
    out.coef[I.indices[static_cast<std::size_t>(c)]] = coef[c];
  }
  return out;
}

EstimatorResult thresholded_lasso(const DesignMatrix& X, const Vector& Y, double lambda_n,
                                  double t0, const LassoOptions& opts) {
  EstimatorResult res;
  res.lambda_n = lambda_n;
  res.t0 = t0;

  auto tic = std::chrono::steady_clock::now();
  FitResult init = fit_lasso(X, Y, lambda_n, opts);
  res.init_seconds = seconds_since(tic);
  res.beta_init = std::move(init.beta);

  res.selection = threshold_select(res.beta_init, t0, SelectionSource::lasso);

  tic = std::chrono::steady_clock::now();
  res.beta_hat = ols_refit(X, Y, res.selection);
  res.refit_seconds = seconds_since(tic);
  return res;
}

EstimatorResult gauss_dantzig(const DesignMatrix& X, const Vector& Y, double sigma,
                              const GaussDantzigOptions& opts) {
  if (opts.a < 0.0) throw std::invalid_argument("gauss_dantzig: a >= 0 required");
  if (!(opts.tau > 0.0)) throw std::invalid_argument("gauss_dantzig: tau > 0 required");
  if (!(sigma > 0.0)) throw std::invalid_argument("gauss_dantzig: sigma > 0 required");

  const double lambda = std::sqrt(2.0 * std::log(static_cast<double>(X.p())) /
                                  static_cast<double>(X.n()));
  const double lambda_p_tau = (std::sqrt(1.0 + opts.a) + 1.0 / opts.tau) * lambda;
  const double lambda_n = lambda_p_tau * sigma;
  const double t0 = opts.c4 * lambda_p_tau * sigma;

  EstimatorResult res;
  res.lambda_n = lambda_n;
  res.t0 = t0;

  double c1;
  if (opts.c1) {
    c1 = *opts.c1;
  } else {
    DSConstantInputs in;
    in.a = opts.a;
    in.tau = opts.tau;
    in.c4 = opts.c4;
    c1 = ds_constants(in).C1;
  }
  if (c1 >= opts.c4) {
    res.warnings.push_back("threshold range (C1, C4] empty: C1 = " + std::to_string(c1) +
                           " >= C4 = " + std::to_string(opts.c4));
  }

  auto tic = std::chrono::steady_clock::now();
  FitResult init = fit_dantzig(X, Y, lambda_n, opts.dantzig);
  res.init_seconds = seconds_since(tic);
  res.beta_init = std::move(init.beta);

  res.selection = threshold_select(res.beta_init, t0, SelectionSource::dantzig);

  tic = std::chrono::steady_clock::now();
  res.beta_hat = ols_refit(X, Y, res.selection);
  res.refit_seconds = seconds_since(tic);
  return res;
}

std::string EstimatorResult::to_json() const {
  nlohmann::json j;
  j["lambda_n"] = lambda_n;
  j["t0"] = t0;
  j["source"] = thlx::to_string(selection.source);
  j["selection"] = selection.indices;
  j["model_size"] = selection.size();
  j["norms"] = {{"beta_init_l1", beta_init.l1()},
                {"beta_init_l2", beta_init.l2()},
                {"beta_hat_l1", beta_hat.l1()},
                {"beta_hat_l2", beta_hat.l2()}};
  j["timings"] = {{"init_seconds", init_seconds}, {"refit_seconds", refit_seconds}};
  j["warnings"] = warnings;
  return j.dump(2);
}

const FitResult& lasso_best_l2(const std::vector<FitResult>& path, const Signal& beta_true) {
  if (path.empty()) throw std::invalid_argument("lasso_best_l2: empty path");
  std::size_t best = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double loss = (path[i].beta.coef - beta_true.coef).norm();
    if (loss < best_loss) {
      best_loss = loss;
      best = i;
    }
  }
  return path[best];
}

const FitResult& lasso_best_support(const std::vector<FitResult>& path,
                                    const Signal& beta_true) {
  if (path.empty()) throw std::invalid_argument("lasso_best_support: empty path");
  const auto supp = beta_true.support(0.0);
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  Index best_size = std::numeric_limits<Index>::max();
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto fit_supp = path[i].beta.support(0.0);
    Index tp = 0;
    for (const Index j : fit_supp) {
      if (std::binary_search(supp.begin(), supp.end(), j)) ++tp;
    }
    const Index fp = static_cast<Index>(fit_supp.size()) - tp;
    const double score = static_cast<double>(tp - fp);
    const Index size = static_cast<Index>(fit_supp.size());
    if (score > best_score || (score == best_score && size < best_size)) {
      best_score = score;
      best_size = size;
      best = i;
    }
  }
  return path[best];
}

}  // namespace thlx
