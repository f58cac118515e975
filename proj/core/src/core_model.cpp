#include "thlx/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace thlx {

std::vector<Index> Signal::support(double tol) const {
  std::vector<Index> out;
  for (Index j = 0; j < coef.size(); ++j) {
    if (std::abs(coef[j]) > tol) out.push_back(j);
  }
  return out;
}

std::vector<Index> Signal::top_indices(Index k) const {
  const Index p = coef.size();
  if (k < 0) k = 0;
  if (k > p) k = p;
  std::vector<Index> idx(static_cast<std::size_t>(p));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    const double va = std::abs(coef[a]), vb = std::abs(coef[b]);
    if (va != vb) return va > vb;
    return a < b;  // ties to the lower index
  });
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

void Signal::require_finite(const char* what) const {
  if (!coef.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entry");
  }
}

void DesignMatrix::require_valid() const {
  if (n() < 1 || p() < 1) throw std::invalid_argument("DesignMatrix: n >= 1 and p >= 1 required");
  if (!data.allFinite()) throw std::invalid_argument("DesignMatrix: non-finite entry");
}

double log_with_base(double x, LogBase base) {
  return base == LogBase::natural ? std::log(x) : std::log2(x);
}

std::string to_string(LogBase base) {
  return base == LogBase::natural ? "natural" : "two";
}

LogBase log_base_from_string(const std::string& s) {
  if (s == "natural") return LogBase::natural;
  if (s == "two" || s == "2") return LogBase::two;
  throw std::invalid_argument("unknown log base: " + s);
}

PenaltyScale PenaltyScale::make(Index p, Index n, LogBase base, double sigma, double a,
                                double d0) {
  if (!(sigma > 0.0)) throw std::invalid_argument("PenaltyScale: sigma must be > 0");
  if (a < 0.0) throw std::invalid_argument("PenaltyScale: a must be >= 0");
  PenaltyScale ps;
  ps.lambda = lambda_base(p, n, base);
  ps.log_base = base;
  ps.sigma = sigma;
  ps.a = a;
  ps.d0 = d0;
  return ps;
}

DesignMatrix normalize_columns(const DesignMatrix& X) {
  X.require_valid();
  const Index n = X.n(), p = X.p();
  const double target = std::sqrt(static_cast<double>(n));
  DesignMatrix out;
  out.data = X.data;
  out.column_scales.resize(static_cast<std::size_t>(p), 1.0);
  for (Index j = 0; j < p; ++j) {
    const double norm = out.data.col(j).norm();
    if (norm == 0.0) {
      throw std::domain_error("normalize_columns: zero column " + std::to_string(j));
    }
    const double scale = target / norm;
    out.data.col(j) *= scale;
    out.column_scales[static_cast<std::size_t>(j)] = scale;
  }
  out.normalized = true;
  return out;
}

double lambda_base(Index p, Index n, LogBase base) {
  if (p < 2) throw std::domain_error("lambda_base: p >= 2 required");
  if (n < 1) throw std::domain_error("lambda_base: n >= 1 required");
  return std::sqrt(2.0 * log_with_base(static_cast<double>(p), base) /
                   static_cast<double>(n));
}

NoiseBound noise_bound(Index p, Index n, double sigma, double a) {
  if (p < 2) throw std::domain_error("noise_bound: p >= 2 required");
  if (n < 1) throw std::domain_error("noise_bound: n >= 1 required");
  if (!(sigma > 0.0)) throw std::domain_error("noise_bound: sigma must be > 0");
  if (a < 0.0) throw std::domain_error("noise_bound: a must be >= 0");
  const double lp = std::log(static_cast<double>(p));
  NoiseBound out;
  out.bound = sigma * std::sqrt(1.0 + a) * std::sqrt(2.0 * lp / static_cast<double>(n));
  out.prob_floor = 1.0 - 1.0 / (std::sqrt(M_PI * lp) * std::pow(static_cast<double>(p), a));
  return out;
}

}  // namespace thlx
