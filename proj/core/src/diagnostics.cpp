#include "thlx/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "thlx/core_model.hpp"
#include "thlx/lasso.hpp"
#include "json.hpp"

namespace thlx {

std::uint64_t subset_count(Index p, Index m) {
  if (m < 0 || m > p) return 0;
  long double acc = 1.0L;
  const long double cap = 9.2e18L;
  for (Index i = 1; i <= m; ++i) {
    acc = acc * static_cast<long double>(p - m + i) / static_cast<long double>(i);
    if (acc > cap) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(acc + 0.5L);
}

namespace {

template <typename F>
void for_each_combination(Index universe, Index m, F&& fn) {
  if (m == 0 || m > universe) return;
  std::vector<Index> c(static_cast<std::size_t>(m));
  std::iota(c.begin(), c.end(), Index{0});
  while (true) {
    fn(c);
    Index i = m - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == universe - m + i) --i;
    if (i < 0) break;
    ++c[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < m; ++j) {
      c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

Matrix submatrix_cols(const Matrix& x, const std::vector<Index>& cols) {
  Matrix out(x.rows(), static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Index>(c)) = x.col(cols[c]);
  return out;
}

// Extremal eigenvalues of X_T^T X_T / n for one subset.
std::pair<double, double> subset_eig_range(const Matrix& x, const std::vector<Index>& t) {
  const Matrix xt = submatrix_cols(x, t);
  const Matrix gram = xt.transpose() * xt / static_cast<double>(x.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev[0], ev[ev.size() - 1]};
}

double subset_pair_theta(const Matrix& x, const std::vector<Index>& t,
                         const std::vector<Index>& tp) {
  const Matrix cross = submatrix_cols(x, t).transpose() * submatrix_cols(x, tp) /
                       static_cast<double>(x.rows());
  Eigen::JacobiSVD<Matrix> svd(cross);
  return svd.singularValues()[0];
}

// Euclidean projection of v onto the l1 ball of the given radius.
void project_l1_ball(Eigen::Ref<Vector> v, double radius) {
  if (radius <= 0.0) {
    v.setZero();
    return;
  }
  const double l1 = v.lpNorm<1>();
  if (l1 <= radius) return;
  std::vector<double> mags(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(v[i]);
  std::sort(mags.begin(), mags.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    cum += mags[k];
    const double cand = (cum - radius) / static_cast<double>(k + 1);
    if (cand < mags[k]) tau = cand;
  }
  for (Index i = 0; i < v.size(); ++i) {
    v[i] = soft_threshold(v[i], tau);
  }
}

}  // namespace

namespace {

int diag_worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("THLX_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) hw = std::min(hw, cap);
  }
  return hw;
}

// Enumeration partitioned by the leading subset element; the reduction is a
// min/max over per-chunk extrema, so the outcome is chunking-independent.
template <typename Chunk>
void parallel_first_element(Index p, Index m, Chunk&& chunk) {
  const int workers = std::min<int>(diag_worker_count(), std::max<Index>(1, p - m + 1));
  if (workers <= 1) {
    for (Index first = 0; first + m <= p; ++first) chunk(first);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const Index first = next.fetch_add(1);
        if (first + m > p) break;
        chunk(first);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

SparseEigs sparse_eigs(const DesignMatrix& X, Index m, ScanMode mode, std::uint64_t budget,
                       RngStream* rng) {
  X.require_valid();
  const Index p = X.p();
  if (m < 1 || m > p) throw std::invalid_argument("sparse_eigs: 1 <= m <= p required");
  budget = std::min(budget, kDefaultSubsetBudget);  // hard cap

  SparseEigs out;
  out.lambda_min = std::numeric_limits<double>::infinity();
  out.lambda_max = -std::numeric_limits<double>::infinity();

  if (mode == ScanMode::exhaustive) {
    const std::uint64_t count = subset_count(p, m);
    if (count > budget) {
      throw std::runtime_error(
          "sparse_eigs: C(p,m) = " + std::to_string(count) + " exceeds budget " +
          std::to_string(budget) + "; use greedy_sampled mode");
    }
    std::vector<double> chunk_min(static_cast<std::size_t>(p),
                                  std::numeric_limits<double>::infinity());
    std::vector<double> chunk_max(static_cast<std::size_t>(p),
                                  -std::numeric_limits<double>::infinity());
    parallel_first_element(p, m, [&](Index first) {
      double lo_all = std::numeric_limits<double>::infinity();
      double hi_all = -std::numeric_limits<double>::infinity();
      if (m == 1) {
        const auto [lo, hi] = subset_eig_range(X.data, {first});
        lo_all = lo;
        hi_all = hi;
      } else {
        // Subsets with leading element `first`: combinations of the rest.
        std::vector<Index> t(static_cast<std::size_t>(m));
        t[0] = first;
        for_each_combination(p - first - 1, m - 1, [&](const std::vector<Index>& tail) {
          for (Index i = 1; i < m; ++i) {
            t[static_cast<std::size_t>(i)] = first + 1 + tail[static_cast<std::size_t>(i - 1)];
          }
          const auto [lo, hi] = subset_eig_range(X.data, t);
          lo_all = std::min(lo_all, lo);
          hi_all = std::max(hi_all, hi);
        });
      }
      chunk_min[static_cast<std::size_t>(first)] = lo_all;
      chunk_max[static_cast<std::size_t>(first)] = hi_all;
    });
    for (Index first = 0; first + m <= p; ++first) {
      out.lambda_min = std::min(out.lambda_min, chunk_min[static_cast<std::size_t>(first)]);
      out.lambda_max = std::max(out.lambda_max, chunk_max[static_cast<std::size_t>(first)]);
    }
    out.exact = true;
    return out;
  }

  RngStream fallback(12345);
  RngStream& r = rng ? *rng : fallback;
  const int samples = static_cast<int>(std::min<std::uint64_t>(budget, 2000));
  std::vector<Index> best_max, best_min;
  for (int it = 0; it < samples; ++it) {
    auto t = r.sample_indices(p, m);
    std::sort(t.begin(), t.end());
    const auto [lo, hi] = subset_eig_range(X.data, t);
    if (hi > out.lambda_max) {
      out.lambda_max = hi;
      best_max = t;
    }
    if (lo < out.lambda_min) {
      out.lambda_min = lo;
      best_min = t;
    }
  }
  // Greedy single-column swaps from the best sampled subsets.
  auto improve = [&](std::vector<Index> t, bool maximize) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (std::size_t slot = 0; slot < t.size() && !moved; ++slot) {
        for (Index j = 0; j < p && !moved; ++j) {
          if (std::find(t.begin(), t.end(), j) != t.end()) continue;
          auto cand = t;
          cand[slot] = j;
          std::sort(cand.begin(), cand.end());
          const auto [lo, hi] = subset_eig_range(X.data, cand);
          if (maximize && hi > out.lambda_max + 1e-14) {
            out.lambda_max = hi;
            t = cand;
            moved = true;
          } else if (!maximize && lo < out.lambda_min - 1e-14) {
            out.lambda_min = lo;
            t = cand;
            moved = true;
          }
        }
      }
    }
  };
  if (!best_max.empty()) improve(best_max, true);
  if (!best_min.empty()) improve(best_min, false);
  out.exact = false;
  return out;
}

ThetaEstimate restricted_orthogonality(const DesignMatrix& X, Index s, Index s_prime,
                                       ScanMode mode, std::uint64_t budget,
                                       RngStream* rng) {
  X.require_valid();
  const Index p = X.p();
  if (s < 1 || s_prime < 1 || s + s_prime > p) {
    throw std::invalid_argument("restricted_orthogonality: need s, s' >= 1, s + s' <= p");
  }

  ThetaEstimate out;
  out.theta = 0.0;
  budget = std::min(budget, kDefaultSubsetBudget);  // hard cap

  if (mode == ScanMode::exhaustive) {
    const std::uint64_t outer = subset_count(p, s);
    const std::uint64_t inner = subset_count(p - s, s_prime);
    if (inner == 0 || outer > budget / inner) {
      throw std::runtime_error("restricted_orthogonality: pair enumeration exceeds budget " +
                               std::to_string(budget) + "; use greedy_sampled mode");
    }
    std::vector<double> chunk_best(static_cast<std::size_t>(p), 0.0);
    parallel_first_element(p, s, [&](Index first) {
      double best = 0.0;
      auto scan_pairs = [&](const std::vector<Index>& t) {
        std::vector<Index> rest;
        rest.reserve(static_cast<std::size_t>(p - s));
        for (Index j = 0; j < p; ++j) {
          if (!std::binary_search(t.begin(), t.end(), j)) rest.push_back(j);
        }
        for_each_combination(static_cast<Index>(rest.size()), s_prime,
                             [&](const std::vector<Index>& pick) {
                               std::vector<Index> tp(pick.size());
                               for (std::size_t i = 0; i < pick.size(); ++i) {
                                 tp[i] = rest[static_cast<std::size_t>(pick[i])];
                               }
                               best = std::max(best, subset_pair_theta(X.data, t, tp));
                             });
      };
      if (s == 1) {
        scan_pairs({first});
      } else {
        std::vector<Index> t(static_cast<std::size_t>(s));
        t[0] = first;
        for_each_combination(p - first - 1, s - 1, [&](const std::vector<Index>& tail) {
          for (Index i = 1; i < s; ++i) {
            t[static_cast<std::size_t>(i)] = first + 1 + tail[static_cast<std::size_t>(i - 1)];
          }
          scan_pairs(t);
        });
      }
      chunk_best[static_cast<std::size_t>(first)] = best;
    });
    for (const double b : chunk_best) out.theta = std::max(out.theta, b);
    out.exact = true;
    return out;
  }

  RngStream fallback(54321);
  RngStream& r = rng ? *rng : fallback;
  const int samples = static_cast<int>(std::min<std::uint64_t>(budget, 2000));
  for (int it = 0; it < samples; ++it) {
    auto both = r.sample_indices(p, s + s_prime);
    std::vector<Index> t(both.begin(), both.begin() + s);
    std::vector<Index> tp(both.begin() + s, both.end());
    std::sort(t.begin(), t.end());
    std::sort(tp.begin(), tp.end());
    out.theta = std::max(out.theta, subset_pair_theta(X.data, t, tp));
  }
  out.exact = false;
  return out;
}

ReLowerResult re_lower(const DesignMatrix& X, Index s0, double k0, int restarts,
                       RngStream& rng) {
  X.require_valid();
  const Index p = X.p();
  if (s0 < 1 || s0 > p) throw std::invalid_argument("re_lower: 1 <= s0 <= p required");
  if (!(k0 > 0.0)) throw std::invalid_argument("re_lower: k0 > 0 required");
  if (restarts < 1) restarts = 1;

  const Matrix gram = X.data.transpose() * X.data / static_cast<double>(X.n());

  // Step size from the top eigenvalue of the Gram.
  Vector pw = Vector::Ones(p).normalized();
  double top = 1.0;
  for (int it = 0; it < 50; ++it) {
    pw = gram * pw;
    top = pw.norm();
    if (top == 0.0) break;
    pw /= top;
  }
  const double step = 0.45 / std::max(top, 1e-12);

  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  const Vector vmin = es.eigenvectors().col(0);

  double best_q = std::numeric_limits<double>::infinity();

  auto run_from = [&](const std::vector<Index>& j_set, Vector v) {
    std::vector<char> in_j(static_cast<std::size_t>(p), 0);
    for (const Index j : j_set) in_j[static_cast<std::size_t>(j)] = 1;

    auto project = [&](Vector& w) {
      double nj = 0.0, l1j = 0.0;
      for (Index i = 0; i < p; ++i) {
        if (in_j[static_cast<std::size_t>(i)]) nj += w[i] * w[i];
      }
      nj = std::sqrt(nj);
      if (nj < 1e-14) {
        for (const Index j : j_set) w[j] = 1.0 / std::sqrt(double(j_set.size()));
        nj = 1.0;
      } else {
        for (Index i = 0; i < p; ++i) {
          if (in_j[static_cast<std::size_t>(i)]) w[i] /= nj;
        }
      }
      for (const Index j : j_set) l1j += std::abs(w[j]);
      Vector off(p - static_cast<Index>(j_set.size()));
      Index c = 0;
      for (Index i = 0; i < p; ++i) {
        if (!in_j[static_cast<std::size_t>(i)]) off[c++] = w[i];
      }
      project_l1_ball(off, k0 * l1j);
      c = 0;
      for (Index i = 0; i < p; ++i) {
        if (!in_j[static_cast<std::size_t>(i)]) w[i] = off[c++];
      }
    };

    project(v);
    for (int it = 0; it < 250; ++it) {
      const double q2 = v.dot(gram * v);
      best_q = std::min(best_q, std::sqrt(std::max(q2, 0.0)));
      Vector g = 2.0 * (gram * v);
      v -= step * g;
      project(v);
    }
    const double q2 = v.dot(gram * v);
    best_q = std::min(best_q, std::sqrt(std::max(q2, 0.0)));
  };

  // Seeded start: support of the smallest eigenvector.
  {
    Signal vm{vmin};
    auto j_set = vm.top_indices(s0);
    run_from(j_set, vmin);
  }
  for (int r = 0; r < restarts; ++r) {
    auto j_set = rng.sample_indices(p, s0);
    std::sort(j_set.begin(), j_set.end());
    Vector v = Vector::Zero(p);
    for (const Index j : j_set) v[j] = rng.normal();
    run_from(j_set, v);
  }

  ReLowerResult out;
  out.min_quotient = best_q;
  if (best_q < 1e-8) {
    out.diverged = true;
    out.k_lower = std::numeric_limits<double>::infinity();
  } else {
    out.k_lower = 1.0 / best_q;
  }
  return out;
}

Index essential_sparsity(const Signal& beta, double lambda_sigma) {
  if (!(lambda_sigma > 0.0)) {
    throw std::invalid_argument("essential_sparsity: lambda_sigma > 0 required");
  }
  const double ls2 = lambda_sigma * lambda_sigma;
  double sum = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    sum += std::min(beta.coef[j] * beta.coef[j], ls2);
  }
  const double ratio = sum / ls2;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, std::abs(ratio))) {
    return static_cast<Index>(nearest);
  }
  return static_cast<Index>(std::ceil(ratio));
}

IdealMse ideal_mse(const Signal& beta, double sigma, Index n,
                   std::optional<double> lambda_max_s) {
  if (!(sigma > 0.0)) throw std::invalid_argument("ideal_mse: sigma > 0 required");
  if (n < 1) throw std::invalid_argument("ideal_mse: n >= 1 required");
  const double var = sigma * sigma / static_cast<double>(n);
  IdealMse out;
  for (Index j = 0; j < beta.size(); ++j) {
    out.raw += std::min(beta.coef[j] * beta.coef[j], var);
  }
  if (lambda_max_s) {
    out.lower_bound = std::min(1.0, 1.0 / *lambda_max_s) * out.raw;
  }
  return out;
}

CountingBound counting_bound_check(const Signal& beta, double lambda_sigma,
                                   double c_prime) {
  if (!(c_prime > 0.5)) {
    throw std::invalid_argument("counting_bound_check: c' > 1/2 required");
  }
  const Index s0 = essential_sparsity(beta, lambda_sigma);
  const auto t0 = beta.top_indices(s0);
  Index a0 = 0;
  for (Index j = 0; j < beta.size(); ++j) {
    if (std::abs(beta.coef[j]) > lambda_sigma) ++a0;
  }
  // sigma sqrt(log p / (c' n)) expressed through lambda sigma.
  const double threshold = lambda_sigma / std::sqrt(2.0 * c_prime);
  CountingBound out;
  for (Index j = 0; j < beta.size(); ++j) {
    if (std::binary_search(t0.begin(), t0.end(), j)) continue;
    if (std::abs(beta.coef[j]) >= threshold) ++out.count;
  }
  out.bound = (2.0 * c_prime - 1.0) * static_cast<double>(s0 - a0);
  out.holds = static_cast<double>(out.count) <= out.bound + 1e-12;
  return out;
}

OracleConstants oracle_constants(const OracleConstantInputs& in) {
  if (!(in.d0 > 0.0)) throw std::domain_error("oracle_constants: d0 > 0 required");
  for (const double v : {in.lmin_2s0}) {
    if (!(v > 0.0)) {
      throw std::domain_error("oracle_constants: Lambda_min(2s0) must be > 0");
    }
  }
  for (const double v : {in.lmax_s_minus_s0, in.lmax_s0, in.lmax_2s0, in.lmax_2s}) {
    if (!(v >= 0.0)) throw std::domain_error("oracle_constants: negative eigenvalue input");
  }

  OracleConstants c;
  c.inputs = in;
  c.ell_s0 = std::min(in.theta_s0_2s0 / std::sqrt(in.lmin_2s0), std::sqrt(in.lmax_s0));
  c.D = std::sqrt(in.lmax_s_minus_s0 / in.lmin_2s0) *
        (1.0 + 3.0 * c.ell_s0 * std::sqrt(in.lmax_s_minus_s0) / in.d0);

  const double k3 = in.k_s0_3, k4 = in.k_s0_4;
  const double lm = in.lmax_s_minus_s0;

  c.D0 = std::max(c.D, std::sqrt(2.0) * (in.d0 * k4 * k4 + k3 * std::sqrt(lm) +
                                         2.0 * in.d0 * k3 * k3));
  c.D0_prime = std::max({c.D, in.d0 * k4 * k4,
                         k3 * std::sqrt(lm) + 3.0 * in.d0 * k3 * k3});
  c.D1 = in.d0 * std::max({lm / (in.d0 * in.d0) + 2.25 * k3 * k3, 4.0 * k4 * k4,
                           3.0 * lm / (in.d0 * in.d0)});
  c.D2 = in.d0 * std::max({lm / (in.d0 * in.d0) + 4.0 * k3 * k3, 5.0 * k4 * k4,
                           4.0 * lm / (in.d0 * in.d0)});
  c.D3 = std::sqrt(lm) + in.d0 * k4 / 2.0 + in.d0 * k3;

  const double spread = in.lmax_2s - in.lmin_2s;
  const double d4sq = ((c.D0_prime + in.c4) * (c.D0_prime + in.c4) + 1.0) *
                      (1.5 + spread * spread / (2.0 * in.lmin_2s0 * in.lmin_2s0));
  c.D4 = std::sqrt(d4sq);
  return c;
}

DSConstants ds_constants(const DSConstantInputs& in) {
  if (!(in.tau > 0.0)) throw std::domain_error("ds_constants: tau > 0 required");
  if (in.a < 0.0) throw std::domain_error("ds_constants: a >= 0 required");
  if (!(in.lmin_2s0 > 0.0)) {
    throw std::domain_error("ds_constants: Lambda_min(2s0) must be > 0");
  }
  // The idealized plug-in (delta = theta = 0) is always evaluable; otherwise
  // the uniform uncertainty margin must hold.
  if (in.delta + in.theta > 0.0 && in.delta + in.theta >= 1.0 - in.tau) {
    throw std::domain_error("ds_constants: UUP violated, delta + theta >= 1 - tau");
  }
  if (1.0 - in.delta - in.theta <= 0.0) {
    throw std::domain_error("ds_constants: 1 - delta - theta must be positive");
  }

  DSConstants c;
  c.inputs = in;
  const double d = in.delta, th = in.theta;
  const double denom = 1.0 - d - th;
  c.C0 = 2.0 * std::sqrt(2.0) * (1.0 + (1.0 - d * d) / denom) +
         (1.0 + 1.0 / std::sqrt(2.0)) * (1.0 + d) * (1.0 + d) / denom;
  c.C0_prime = c.C0 / denom + th * (1.0 + d) / (denom * denom);
  c.C1 = c.C0_prime + (1.0 + d) / denom;
  c.C2 = 2.0 * c.C0_prime + (1.0 + d) / denom;
  const double lp = std::sqrt(1.0 + in.a) + 1.0 / in.tau;
  c.C3 = std::sqrt(3.0 * lp * lp * ((c.C0_prime + in.c4) * (c.C0_prime + in.c4) + 1.0) +
                   4.0 * (1.0 + in.a) / (in.lmin_2s0 * in.lmin_2s0));
  return c;
}

std::string OracleConstants::to_json() const {
  nlohmann::json j;
  j["provenance"] = provenance;
  j["D0"] = D0;
  j["D0_prime"] = D0_prime;
  j["D1"] = D1;
  j["D2"] = D2;
  j["D3"] = D3;
  j["D4"] = D4;
  j["ell_s0"] = ell_s0;
  j["D"] = D;
  j["inputs"] = {{"d0", inputs.d0},
                 {"k_s0_3", inputs.k_s0_3},
                 {"k_s0_4", inputs.k_s0_4},
                 {"lmax_s_minus_s0", inputs.lmax_s_minus_s0},
                 {"lmax_s0", inputs.lmax_s0},
                 {"lmax_2s0", inputs.lmax_2s0},
                 {"lmin_2s0", inputs.lmin_2s0},
                 {"lmax_2s", inputs.lmax_2s},
                 {"lmin_2s", inputs.lmin_2s},
                 {"theta_s0_2s0", inputs.theta_s0_2s0},
                 {"c4", inputs.c4},
                 {"s0", inputs.s0}};
  return j.dump(2);
}

std::string DSConstants::to_json() const {
  nlohmann::json j;
  j["provenance"] = provenance;
  j["C0"] = C0;
  j["C0_prime"] = C0_prime;
  j["C1"] = C1;
  j["C2"] = C2;
  j["C3"] = C3;
  j["inputs"] = {{"delta", inputs.delta}, {"theta", inputs.theta}, {"a", inputs.a},
                 {"tau", inputs.tau},     {"c4", inputs.c4},      {"lmin_2s0", inputs.lmin_2s0}};
  return j.dump(2);
}

ThresholdRange threshold_range(const OracleConstants& oracle, double lambda_sigma,
                               double breve_d0, double breve_d1) {
  if (!(lambda_sigma > 0.0)) {
    throw std::invalid_argument("threshold_range: lambda_sigma > 0 required");
  }
  ThresholdRange out;
  out.breve_below_estimate = !(breve_d0 > oracle.D0) || !(breve_d1 > oracle.D1);
  out.t0 = std::min(breve_d0, breve_d1) * lambda_sigma;
  out.beta_min_a0_requirement =
      oracle.D0 * lambda_sigma * std::sqrt(static_cast<double>(oracle.inputs.s0)) + out.t0;
  return out;
}

NoiseEventResult noise_event_check(const DesignMatrix& X, double sigma, double a, int reps,
                                   RngStream& rng) {
  X.require_valid();
  if (reps < 100) throw std::invalid_argument("noise_event_check: reps >= 100 required");
  const auto nb = noise_bound(X.p(), X.n(), sigma, a);
  const double n = static_cast<double>(X.n());
  Index hits = 0;
  Vector eps(X.n());
  for (int r = 0; r < reps; ++r) {
    for (Index i = 0; i < X.n(); ++i) eps[i] = sigma * rng.normal();
    const double corr = (X.data.transpose() * eps / n).lpNorm<Eigen::Infinity>();
    if (corr <= nb.bound) ++hits;
  }
  NoiseEventResult out;
  out.empirical = static_cast<double>(hits) / static_cast<double>(reps);
  out.floor = nb.prob_floor;
  out.bound = nb.bound;
  return out;
}

IncoherenceReport diagnose(const DesignMatrix& X, const DiagnoseRequest& req) {
  IncoherenceReport rep;
  RandomSource source(req.seed);
  for (const Index m : req.eig_orders) {
    auto stream = source.stream(static_cast<std::uint64_t>(m));
    rep.eigs[m] = sparse_eigs(X, m, req.mode, req.budget, &stream);
    rep.delta[m] = std::max(rep.eigs[m].lambda_max - 1.0, 1.0 - rep.eigs[m].lambda_min);
  }
  std::uint64_t tick = 1000;
  for (const auto& [s, sp] : req.theta_pairs) {
    auto stream = source.stream(tick++);
    rep.theta[{s, sp}] = restricted_orthogonality(X, s, sp, req.mode, req.budget, &stream);
  }
  for (const auto& [s0, k0] : req.re_params) {
    auto stream = source.stream(tick++);
    rep.re[{s0, k0}] = re_lower(X, s0, k0, req.re_restarts, stream);
  }
  return rep;
}

std::string IncoherenceReport::to_json() const {
  nlohmann::json j;
  j["sparse_eigs"] = nlohmann::json::array();
  for (const auto& [m, e] : eigs) {
    j["sparse_eigs"].push_back({{"m", m},
                                {"lambda_min", e.lambda_min},
                                {"lambda_max", e.lambda_max},
                                {"exact", e.exact}});
  }
  j["delta"] = nlohmann::json::array();
  for (const auto& [m, d] : delta) {
    j["delta"].push_back({{"s", m}, {"delta", d}});
  }
  j["theta"] = nlohmann::json::array();
  for (const auto& [key, t] : theta) {
    j["theta"].push_back({{"s", key.first},
                          {"s_prime", key.second},
                          {"theta", t.theta},
                          {"exact", t.exact}});
  }
  j["re_lower"] = nlohmann::json::array();
  for (const auto& [key, r] : re) {
    nlohmann::json item = {{"s0", key.first},
                           {"k0", key.second},
                           {"diverged", r.diverged},
                           {"min_quotient", r.min_quotient}};
    if (r.diverged) {
      item["k_lower"] = "inf";
    } else {
      item["k_lower"] = r.k_lower;
    }
    j["re_lower"].push_back(item);
  }
  return j.dump(2);
}

std::string IncoherenceReport::to_table() const {
  std::ostringstream os;
  os << "m   lambda_min   lambda_max   delta_s      exact\n";
  for (const auto& [m, e] : eigs) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-3lld %-12.6f %-12.6f %-12.6f %s\n",
                  static_cast<long long>(m), e.lambda_min, e.lambda_max,
                  delta.count(m) ? delta.at(m) : 0.0, e.exact ? "yes" : "no(bound)");
    os << buf;
  }
  if (!theta.empty()) {
    os << "(s,s')  theta        exact\n";
    for (const auto& [key, t] : theta) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "(%lld,%lld)  %-12.6f %s\n",
                    static_cast<long long>(key.first), static_cast<long long>(key.second),
                    t.theta, t.exact ? "yes" : "no(lower)");
      os << buf;
    }
  }
  if (!re.empty()) {
    os << "(s0,k0)  K_lower      diverged\n";
    for (const auto& [key, r] : re) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "(%lld,%.2f)  %-12.6f %s\n",
                    static_cast<long long>(key.first), key.second,
                    r.diverged ? -1.0 : r.k_lower, r.diverged ? "yes" : "no");
      os << buf;
    }
  }
  return os.str();
}

}  // namespace thlx
