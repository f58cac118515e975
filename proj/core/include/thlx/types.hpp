#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace thlx {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Length-p coefficient vector (true beta, Lasso/Dantzig iterates, refits).
struct Signal {
  Vector coef;

  Signal() = default;
  explicit Signal(Vector v) : coef(std::move(v)) {}
  static Signal zeros(Index p) { return Signal(Vector::Zero(p)); }

  Index size() const { return coef.size(); }
  double operator[](Index j) const { return coef[j]; }

  double l1() const { return coef.lpNorm<1>(); }
  double l2() const { return coef.norm(); }
  double linf() const { return coef.size() ? coef.lpNorm<Eigen::Infinity>() : 0.0; }

  /// Indices with |coef| strictly above tol, ascending.
  std::vector<Index> support(double tol = 0.0) const;

  /// Indices of the k largest |coef|; ties broken by lower index.
  std::vector<Index> top_indices(Index k) const;

  void require_finite(const char* what = "signal") const;
};

/// Dense n-by-p design. Columns are expected to carry l2 norm sqrt(n)
/// once normalize_columns has run; `column_scales` keeps the applied factors.
struct DesignMatrix {
  Matrix data;
  bool normalized = false;
  std::vector<double> column_scales;

  DesignMatrix() = default;
  explicit DesignMatrix(Matrix m, bool is_normalized = false)
      : data(std::move(m)), normalized(is_normalized) {}

  Index n() const { return data.rows(); }
  Index p() const { return data.cols(); }

  void require_valid() const;
};

struct NoiseSpec {
  double sigma = 1.0;
  explicit NoiseSpec(double s) : sigma(s) {
    if (!(s > 0.0)) throw std::invalid_argument("NoiseSpec: sigma must be > 0");
  }
};

enum class LogBase { natural, two };

double log_with_base(double x, LogBase base);
std::string to_string(LogBase base);
LogBase log_base_from_string(const std::string& s);

/// Base penalty scale lambda = sqrt(2 log(p) / n) and the parameters
/// that turn it into a Lasso penalty lambda_n = d0 * lambda * sigma.
struct PenaltyScale {
  double lambda = 0.0;
  LogBase log_base = LogBase::natural;
  double sigma = 1.0;
  double a = 0.0;
  double d0 = 2.0;

  static PenaltyScale make(Index p, Index n, LogBase base, double sigma,
                           double a = 0.0, double d0 = 2.0);

  double lambda_sigma() const { return lambda * sigma; }
  double lambda_n() const { return d0 * lambda * sigma; }
};

}  // namespace thlx
