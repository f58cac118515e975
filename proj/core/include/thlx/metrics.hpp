#pragma once

#include <optional>
#include <vector>

#include "thlx/estimators.hpp"
#include "thlx/types.hpp"

namespace thlx {

/// Positive class for confusion counts: the support of the true beta, or the
/// s0 largest coordinates T0 (the stricter reading used for the tiger runs).
enum class Reference { support_S, top_T0 };

std::string to_string(Reference r);

struct ConfusionCounts {
  Index tp = 0, fp = 0, tn = 0, fn = 0;
  Reference reference = Reference::support_S;

  Index total() const { return tp + fp + tn + fn; }
};

/// reference == top_T0 needs lambda_sigma to locate T0.
ConfusionCounts confusion(const SelectionSet& selection, const Signal& beta_true,
                          Reference reference,
                          std::optional<double> lambda_sigma = {});

struct Rates {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// FPR = fp/(fp+tn), TPR = tp/(tp+fn); empty denominators give 0.
Rates rates(const ConfusionCounts& c);

/// ||beta_hat - beta||^2 / sum_i min(beta_i^2, sigma^2/n). Throws
/// std::domain_error when the denominator vanishes (beta == 0).
double rho_squared(const Signal& beta_hat, const Signal& beta_true, double sigma,
                   Index n);

/// h = beta_init - beta_{T0} and delta = beta_init - beta, split across
/// T0 (s0 largest |beta|, ties to the lower index), T1 (s0 largest |h|
/// outside T0) and T01 = T0 union T1.
struct ErrorDecomposition {
  Index s0 = 0;
  std::vector<Index> t0, t1, t01;
  double h_t0_l1 = 0, h_t0_l2 = 0, h_t0c_l1 = 0;
  double h_t01_l2 = 0, h_t01c_l2 = 0;
  double h_l1 = 0, h_l2 = 0;
  double delta_l1 = 0, delta_l2 = 0;
  double beta_t0c_l1 = 0, beta_t0c_l2 = 0;
  std::optional<double> pred_err;  // ||X delta||_2 / sqrt(n), when X given
};

ErrorDecomposition error_decomposition(const Signal& beta_init, const Signal& beta_true,
                                       double lambda_sigma,
                                       const DesignMatrix* X = nullptr);

/// sign(beta_hat_j) == sign(beta_j) for every j, with sign(0) = 0.
bool exact_sign_recovery(const Signal& beta_hat, const Signal& beta_true);

}  // namespace thlx
