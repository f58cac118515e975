#include "thlx/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "thlx/diagnostics.hpp"

namespace thlx {

std::string to_string(Reference r) {
  return r == Reference::support_S ? "support_S" : "top_T0";
}

ConfusionCounts confusion(const SelectionSet& selection, const Signal& beta_true,
                          Reference reference, std::optional<double> lambda_sigma) {
  std::vector<Index> positives;
  if (reference == Reference::support_S) {
    positives = beta_true.support(0.0);
  } else {
    if (!lambda_sigma) {
      throw std::invalid_argument("confusion: top_T0 reference needs lambda_sigma");
    }
    const Index s0 = essential_sparsity(beta_true, *lambda_sigma);
    positives = beta_true.top_indices(s0);
  }

  ConfusionCounts c;
  c.reference = reference;
  const Index p = beta_true.size();
  for (Index j = 0; j < p; ++j) {
    const bool selected = selection.contains(j);
    const bool positive = std::binary_search(positives.begin(), positives.end(), j);
    if (selected && positive) ++c.tp;
    else if (selected && !positive) ++c.fp;
    else if (!selected && positive) ++c.fn;
    else ++c.tn;
  }
  return c;
}

Rates rates(const ConfusionCounts& c) {
  Rates r;
  r.fpr = (c.fp + c.tn) > 0 ? double(c.fp) / double(c.fp + c.tn) : 0.0;
  r.tpr = (c.tp + c.fn) > 0 ? double(c.tp) / double(c.tp + c.fn) : 0.0;
  return r;
}

double rho_squared(const Signal& beta_hat, const Signal& beta_true, double sigma, Index n) {
  if (beta_hat.size() != beta_true.size()) {
    throw std::invalid_argument("rho_squared: length mismatch");
  }
  const double denom = ideal_mse(beta_true, sigma, n).raw;
  if (denom <= 0.0) {
    throw std::domain_error("rho_squared: ideal MSE denominator is zero (beta == 0)");
  }
  return (beta_hat.coef - beta_true.coef).squaredNorm() / denom;
}

ErrorDecomposition error_decomposition(const Signal& beta_init, const Signal& beta_true,
                                       double lambda_sigma, const DesignMatrix* X) {
  if (beta_init.size() != beta_true.size()) {
    throw std::invalid_argument("error_decomposition: length mismatch");
  }
  const Index p = beta_true.size();

  ErrorDecomposition d;
  d.s0 = essential_sparsity(beta_true, lambda_sigma);
  d.t0 = beta_true.top_indices(d.s0);

  std::vector<char> in_t0(static_cast<std::size_t>(p), 0);
  for (const Index j : d.t0) in_t0[static_cast<std::size_t>(j)] = 1;

  // h = beta_init - beta_{T0}; delta = beta_init - beta.
  Vector h = beta_init.coef;
  for (const Index j : d.t0) h[j] -= beta_true.coef[j];
  const Vector delta = beta_init.coef - beta_true.coef;

  // T1: the s0 largest |h| outside T0 (never indices from T0 itself).
  {
    std::vector<Index> off;
    off.reserve(static_cast<std::size_t>(p - d.s0));
    for (Index j = 0; j < p; ++j) {
      if (!in_t0[static_cast<std::size_t>(j)]) off.push_back(j);
    }
    std::stable_sort(off.begin(), off.end(), [&](Index a, Index b) {
      const double va = std::abs(h[a]), vb = std::abs(h[b]);
      if (va != vb) return va > vb;
      return a < b;
    });
    const Index take = std::min(d.s0, static_cast<Index>(off.size()));
    d.t1.assign(off.begin(), off.begin() + take);
    std::sort(d.t1.begin(), d.t1.end());
  }
  d.t01 = d.t0;
  d.t01.insert(d.t01.end(), d.t1.begin(), d.t1.end());
  std::sort(d.t01.begin(), d.t01.end());

  std::vector<char> in_t01(static_cast<std::size_t>(p), 0);
  for (const Index j : d.t01) in_t01[static_cast<std::size_t>(j)] = 1;

  for (Index j = 0; j < p; ++j) {
    const double hv = h[j];
    const double ah = std::abs(hv);
    d.h_l1 += ah;
    d.h_l2 += hv * hv;
    if (in_t0[static_cast<std::size_t>(j)]) {
      d.h_t0_l1 += ah;
      d.h_t0_l2 += hv * hv;
    } else {
      d.h_t0c_l1 += ah;
      const double bv = beta_true.coef[j];
      d.beta_t0c_l1 += std::abs(bv);
      d.beta_t0c_l2 += bv * bv;
    }
    if (in_t01[static_cast<std::size_t>(j)]) {
      d.h_t01_l2 += hv * hv;
    } else {
      d.h_t01c_l2 += hv * hv;
    }
    d.delta_l1 += std::abs(delta[j]);
    d.delta_l2 += delta[j] * delta[j];
  }
  d.h_t0_l2 = std::sqrt(d.h_t0_l2);
  d.h_t01_l2 = std::sqrt(d.h_t01_l2);
  d.h_t01c_l2 = std::sqrt(d.h_t01c_l2);
  d.h_l2 = std::sqrt(d.h_l2);
  d.delta_l2 = std::sqrt(d.delta_l2);
  d.beta_t0c_l2 = std::sqrt(d.beta_t0c_l2);

  if (X != nullptr) {
    if (X->p() != p) throw std::invalid_argument("error_decomposition: X has wrong p");
    d.pred_err = (X->data * delta).norm() / std::sqrt(static_cast<double>(X->n()));
  }
  return d;
}

bool exact_sign_recovery(const Signal& beta_hat, const Signal& beta_true) {
  if (beta_hat.size() != beta_true.size()) {
    throw std::invalid_argument("exact_sign_recovery: length mismatch");
  }
  auto sgn = [](double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); };
  for (Index j = 0; j < beta_hat.size(); ++j) {
    if (sgn(beta_hat.coef[j]) != sgn(beta_true.coef[j])) return false;
  }
  return true;
}

}  // namespace thlx
