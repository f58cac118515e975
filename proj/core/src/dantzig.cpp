#include "thlx/dantzig.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

namespace thlx {

void DantzigOptions::validate() const {
  if (!(feas_tol > 0.0)) throw std::invalid_argument("DantzigOptions: feas_tol > 0");
  if (!(opt_tol > 0.0)) throw std::invalid_argument("DantzigOptions: opt_tol > 0");
  if (max_iters < 0) throw std::invalid_argument("DantzigOptions: max_iters >= 0");
}

DantzigFeasibility dantzig_feasible(const DesignMatrix& X, const Vector& Y,
                                    const Signal& beta, double lambda_n,
                                    double feas_tol) {
  if (beta.size() != X.p()) throw std::invalid_argument("dantzig_feasible: beta length != p");
  if (Y.size() != X.n()) throw std::invalid_argument("dantzig_feasible: Y length != n");
  const Vector corr =
      X.data.transpose() * (Y - X.data * beta.coef) / static_cast<double>(X.n());
  DantzigFeasibility out;
  out.residual = corr.size() ? corr.lpNorm<Eigen::Infinity>() : 0.0;
  out.feasible = out.residual <= lambda_n + feas_tol;
  return out;
}

namespace {

// Dense two-phase primal simplex on the split formulation
//   min sum(x+ + x-)
//   s.t.  G(x+ - x-) + s_u = b + lambda
//        -G(x+ - x-) + s_l = lambda - b,   all variables >= 0,
// with G = X^T X / n and b = X^T Y / n. Columns are generated on the fly
// from this structure. Dantzig pricing normally; Bland's rule once the
// objective stalls, for anti-cycling.
class DantzigSimplex {
 public:
  DantzigSimplex(const Matrix& gram, const Vector& b, double lambda)
      : g_(gram), p_(gram.rows()), m_(2 * gram.rows()), nreal_(4 * gram.rows()) {
    rhs_.resize(m_);
    rowsign_ = Vector::Ones(m_);
    for (Index i = 0; i < p_; ++i) rhs_[i] = b[i] + lambda;
    for (Index i = 0; i < p_; ++i) rhs_[p_ + i] = lambda - b[i];
    for (Index i = 0; i < m_; ++i) {
      if (rhs_[i] < 0.0) {
        rowsign_[i] = -1.0;
        rhs_[i] = -rhs_[i];
      }
    }
  }

  struct Result {
    Vector beta;
    double l1 = 0.0;
    int pivots = 0;
    bool feasible_lp = true;
    double dual_gap = 0.0;
  };

  Result solve(int max_pivots) {
    basis_.resize(static_cast<std::size_t>(m_));
    // Slacks stay basic in unflipped rows; flipped rows get artificials.
    for (Index i = 0; i < m_; ++i) {
      basis_[static_cast<std::size_t>(i)] =
          rowsign_[i] > 0.0 ? slack_id(i) : artificial_id(i);
    }
    refactorize();
    xb_ = rhs_;  // Binv == I at the start

    Result res;
    if (any_artificial()) {
      run_phase(/*phase1=*/true, max_pivots, res.pivots);
      const double infeas = artificial_level();
      if (infeas > 1e-7 * std::max(1.0, rhs_.maxCoeff())) {
        res.feasible_lp = false;
        return res;
      }
      pivot_out_artificials();
    }
    run_phase(/*phase1=*/false, max_pivots, res.pivots);

    res.beta = Vector::Zero(p_);
    for (Index i = 0; i < m_; ++i) {
      const Index id = basis_[static_cast<std::size_t>(i)];
      if (id < p_) res.beta[id] += xb_[i];
      else if (id < 2 * p_) res.beta[id - p_] -= xb_[i];
    }
    res.l1 = 0.0;
    for (Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < 2 * p_) res.l1 += xb_[i];
    }
    res.dual_gap = final_gap();
    return res;
  }

 private:
  static constexpr double kPivTol = 1e-9;
  static constexpr double kCostTol = 1e-9;

  Index slack_id(Index row) const { return 2 * p_ + row; }
  Index artificial_id(Index row) const { return nreal_ + row; }

  bool any_artificial() const {
    for (const Index id : basis_)
      if (id >= nreal_) return true;
    return false;
  }

  double artificial_level() const {
    double lvl = 0.0;
    for (Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] >= nreal_) lvl += std::max(0.0, xb_[i]);
    }
    return lvl;
  }

  double cost_of(Index id, bool phase1) const {
    if (phase1) return id >= nreal_ ? 1.0 : 0.0;
    if (id < 2 * p_) return 1.0;
    return 0.0;  // slacks; artificials kept pinned at zero in phase 2
  }

  // Column of the (row-sign-normalized) constraint matrix.
  Vector column(Index id) const {
    Vector col = Vector::Zero(m_);
    if (id < p_) {
      for (Index i = 0; i < p_; ++i) {
        col[i] = rowsign_[i] * g_(i, id);
        col[p_ + i] = -rowsign_[p_ + i] * g_(i, id);
      }
    } else if (id < 2 * p_) {
      const Index j = id - p_;
      for (Index i = 0; i < p_; ++i) {
        col[i] = -rowsign_[i] * g_(i, j);
        col[p_ + i] = rowsign_[p_ + i] * g_(i, j);
      }
    } else if (id < nreal_) {
      const Index row = id - 2 * p_;
      col[row] = rowsign_[row];
    } else {
      col[id - nreal_] = 1.0;
    }
    return col;
  }

  void refactorize() {
    Matrix b(m_, m_);
    for (Index i = 0; i < m_; ++i) b.col(i) = column(basis_[static_cast<std::size_t>(i)]);
    binv_ = b.partialPivLu().inverse();
  }

  void recompute_xb() {
    xb_ = binv_ * rhs_;
  }

  // Reduced costs of all real columns, via the structured pricing vector.
  // Returns the entering column id or -1 when optimal.
  Index price(bool phase1, bool bland) const {
    Vector cb(m_);
    for (Index i = 0; i < m_; ++i)
      cb[i] = cost_of(basis_[static_cast<std::size_t>(i)], phase1);
    Vector y = binv_.transpose() * cb;
    Vector ys = y.cwiseProduct(rowsign_);
    Vector diff(p_);
    for (Index i = 0; i < p_; ++i) diff[i] = ys[i] - ys[p_ + i];
    Vector gd = g_ * diff;

    Index best = -1;
    double best_red = 0.0;
    auto consider = [&](Index id, double red) {
      if (red >= -kCostTol) return;
      if (bland) {
        if (best == -1 || id < best) { best = id; best_red = red; }
      } else {
        if (best == -1 || red < best_red) { best = id; best_red = red; }
      }
    };
    for (Index j = 0; j < p_; ++j) consider(j, cost_of(j, phase1) - gd[j]);
    for (Index j = 0; j < p_; ++j) consider(p_ + j, cost_of(p_ + j, phase1) + gd[j]);
    for (Index i = 0; i < m_; ++i) {
      consider(2 * p_ + i, cost_of(2 * p_ + i, phase1) - ys[i]);
    }
    return best;
  }

  void run_phase(bool phase1, int max_pivots, int& pivots) {
    int stall = 0;
    double last_obj = std::numeric_limits<double>::infinity();
    while (pivots < max_pivots) {
      const bool bland = stall > 2 * static_cast<int>(m_);
      const Index enter = price(phase1, bland);
      if (enter < 0) return;  // optimal for this phase

      const Vector dir = binv_ * column(enter);
      Index leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m_; ++i) {
        const Index id = basis_[static_cast<std::size_t>(i)];
        // Basic artificials are pinned at zero in phase 2.
        if (!phase1 && id >= nreal_ && dir[i] < -kPivTol) {
          leave = i;
          best_ratio = 0.0;
          break;
        }
        if (dir[i] > kPivTol) {
          const double ratio = std::max(0.0, xb_[i]) / dir[i];
          if (ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 && leave >= 0 &&
               id < basis_[static_cast<std::size_t>(leave)])) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) {
        throw std::runtime_error("fit_dantzig: simplex detected an unbounded ray");
      }

      pivot(enter, leave, dir);
      ++pivots;
      if (pivots % 64 == 0) {
        refactorize();
        recompute_xb();
      }
      double obj = 0.0;
      for (Index i = 0; i < m_; ++i)
        obj += cost_of(basis_[static_cast<std::size_t>(i)], phase1) * xb_[i];
      if (obj < last_obj - 1e-12) {
        last_obj = obj;
        stall = 0;
      } else {
        ++stall;
      }
    }
    throw std::runtime_error("fit_dantzig: simplex pivot budget exhausted");
  }

  void pivot(Index enter, Index leave, const Vector& dir) {
    const double piv = dir[leave];
    Vector row = binv_.row(leave) / piv;
    for (Index i = 0; i < m_; ++i) {
      if (i == leave) continue;
      if (dir[i] != 0.0) binv_.row(i) -= dir[i] * row.transpose();
    }
    binv_.row(leave) = row.transpose();
    basis_[static_cast<std::size_t>(leave)] = enter;
    recompute_xb();
  }

  void pivot_out_artificials() {
    for (Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < nreal_) continue;
      bool replaced = false;
      for (Index id = 0; id < nreal_ && !replaced; ++id) {
        bool in_basis = false;
        for (const Index bid : basis_)
          if (bid == id) { in_basis = true; break; }
        if (in_basis) continue;
        const Vector dir = binv_ * column(id);
        if (std::abs(dir[i]) > 1e-7) {
          pivot(id, i, dir);
          replaced = true;
        }
      }
      // A redundant row keeps its artificial basic at zero; phase 2 pins it.
    }
    refactorize();
    recompute_xb();
  }

  double final_gap() const {
    // Simplex optimality certificate: primal objective minus dual objective
    // y^T rhs with y from the final basis (zero up to roundoff).
    Vector cb(m_);
    for (Index i = 0; i < m_; ++i)
      cb[i] = cost_of(basis_[static_cast<std::size_t>(i)], /*phase1=*/false);
    const Vector y = binv_.transpose() * cb;
    double primal = 0.0;
    for (Index i = 0; i < m_; ++i)
      if (basis_[static_cast<std::size_t>(i)] < 2 * p_) primal += xb_[i];
    return std::abs(primal - y.dot(rhs_));
  }

  Matrix g_;
  Index p_, m_, nreal_;
  Vector rhs_;
  Vector rowsign_;
  std::vector<Index> basis_;
  Matrix binv_;
  Vector xb_;
};

// Linearized ADMM on  min ||x||_1 + I{||z||_inf <= lambda}  s.t.  Gx + z = b.
// Returns once the constraint residual and a scaled dual certificate close.
Vector dantzig_admm(const Matrix& g, const Vector& b, double lambda, double feas_tol,
                    double opt_tol, int max_iters, double& gap_out, int& iters_out) {
  const Index p = g.rows();
  // Spectral norm of G by power iteration, for the linearization constant.
  Vector v = Vector::Ones(p).normalized();
  double snorm = 1.0;
  for (int it = 0; it < 60; ++it) {
    v = g * v;
    snorm = v.norm();
    if (snorm == 0.0) break;
    v /= snorm;
  }
  snorm = std::max(snorm, 1e-12);

  const double rho = 1.0;
  const double mu = 1.01 * rho * snorm * snorm;
  Vector x = Vector::Zero(p), z = Vector::Zero(p), u = Vector::Zero(p);

  gap_out = std::numeric_limits<double>::infinity();
  for (iters_out = 0; iters_out < max_iters; ++iters_out) {
    const Vector gx = g * x;
    const Vector grad = g * (gx + z - b + u);
    for (Index j = 0; j < p; ++j) {
      x[j] = soft_threshold(x[j] - (rho / mu) * grad[j], 1.0 / mu);
    }
    const Vector gx2 = g * x;
    z = (b - gx2 - u).cwiseMax(-lambda).cwiseMin(lambda);
    u += gx2 + z - b;

    if (iters_out % 25 == 0 || iters_out == max_iters - 1) {
      const double primal_res = (gx2 + z - b).lpNorm<Eigen::Infinity>();
      // Dual candidate nu = rho * u scaled into ||G nu||_inf <= 1.
      Vector nu = rho * u;
      const double scale = std::max(1.0, (g * nu).lpNorm<Eigen::Infinity>());
      nu /= scale;
      const double dual_obj = -nu.dot(b) - lambda * nu.lpNorm<1>();
      gap_out = x.lpNorm<1>() - dual_obj;
      const double feas = (b - gx2).lpNorm<Eigen::Infinity>();
      if (primal_res <= 0.5 * feas_tol && feas <= lambda + feas_tol &&
          gap_out <= opt_tol) {
        return x;
      }
    }
  }
  throw std::runtime_error(
      "fit_dantzig: first_order solver did not reach the requested tolerances");
}

}  // namespace

FitResult fit_dantzig(const DesignMatrix& X, const Vector& Y, double lambda_n,
                      const DantzigOptions& opts) {
  opts.validate();
  X.require_valid();
  if (Y.size() != X.n()) throw std::invalid_argument("fit_dantzig: Y length != n");
  if (lambda_n < 0.0) throw std::invalid_argument("fit_dantzig: lambda_n >= 0 required");

  const Index p = X.p();
  const double n = static_cast<double>(X.n());
  const Matrix gram = X.data.transpose() * X.data / n;
  const Vector b = X.data.transpose() * Y / n;

  FitResult out;
  out.lambda_n = lambda_n;

  if (b.lpNorm<Eigen::Infinity>() <= lambda_n) {
    // Zero is feasible and l1-minimal.
    out.beta = Signal::zeros(p);
    out.objective = 0.0;
    out.kkt_residual = 0.0;
    out.method = opts.method == DantzigMethod::simplex ? "simplex" : "first_order";
    out.cert_gap = 0.0;
    return out;
  }

  if (opts.method == DantzigMethod::simplex) {
    const int budget = opts.max_iters > 0 ? opts.max_iters
                                          : 20000 + 200 * static_cast<int>(p);
    DantzigSimplex lp(gram, b, lambda_n);
    auto res = lp.solve(budget);
    if (!res.feasible_lp) {
      throw std::runtime_error("fit_dantzig: LP reported infeasible constraints");
    }
    out.beta = Signal(std::move(res.beta));
    out.iters = res.pivots;
    out.method = "simplex";
    out.cert_gap = res.dual_gap;
  } else {
    const int budget = opts.max_iters > 0 ? opts.max_iters : 200000;
    double gap = 0.0;
    int iters = 0;
    Vector x = dantzig_admm(gram, b, lambda_n, opts.feas_tol, opts.opt_tol, budget, gap,
                            iters);
    out.beta = Signal(std::move(x));
    out.iters = iters;
    out.method = "first_order";
    out.cert_gap = gap;
  }

  out.objective = out.beta.l1();
  const Vector corr = b - gram * out.beta.coef;
  out.kkt_residual = std::max(0.0, corr.lpNorm<Eigen::Infinity>() - lambda_n);
  if (out.kkt_residual > opts.feas_tol) {
    throw std::runtime_error("fit_dantzig: solution violates the feasibility certificate");
  }
  return out;
}

}  // namespace thlx
