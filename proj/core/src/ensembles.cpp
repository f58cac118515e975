#include "thlx/ensembles.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "thlx/core_model.hpp"

namespace thlx {

std::string to_string(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::iid_gaussian: return "iid_gaussian";
    case EnsembleKind::toeplitz: return "toeplitz";
    case EnsembleKind::bernoulli_pm1: return "bernoulli_pm1";
  }
  return "?";
}

EnsembleKind ensemble_kind_from_string(const std::string& s) {
  if (s == "iid_gaussian") return EnsembleKind::iid_gaussian;
  if (s == "toeplitz") return EnsembleKind::toeplitz;
  if (s == "bernoulli_pm1") return EnsembleKind::bernoulli_pm1;
  throw std::invalid_argument("unknown ensemble kind: " + s);
}

void EnsembleSpec::validate() const {
  if (n < 1 || p < 1) throw std::invalid_argument("EnsembleSpec: n >= 1, p >= 1");
  if (kind == EnsembleKind::toeplitz && !(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("EnsembleSpec: toeplitz needs gamma in (0,1)");
  }
}

Matrix toeplitz_covariance(Index p, double gamma) {
  Matrix t(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j) t(i, j) = std::pow(gamma, std::abs(double(i - j)));
  return t;
}

Matrix toeplitz_chol_upper(Index p, double gamma) {
  const Matrix t = toeplitz_covariance(p, gamma);
  Eigen::LLT<Matrix> llt(t);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("toeplitz_chol_upper: factorization failed");
  }
  return Matrix(llt.matrixU());
}

namespace {

Matrix fill_gaussian(Index n, Index p, RngStream& rng) {
  Matrix z(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) z(i, j) = rng.normal();
  return z;
}

}  // namespace

DesignMatrix gen_design_toeplitz(Index n, const Matrix& chol_upper, bool normalize,
                                 RngStream& rng) {
  const Index p = chol_upper.cols();
  Matrix z = fill_gaussian(n, p, rng);
  DesignMatrix x(Matrix(z * chol_upper));
  return normalize ? normalize_columns(x) : x;
}

DesignMatrix gen_design(const EnsembleSpec& spec, RngStream& rng) {
  spec.validate();
  switch (spec.kind) {
    case EnsembleKind::iid_gaussian: {
      DesignMatrix x(fill_gaussian(spec.n, spec.p, rng));
      return spec.normalize ? normalize_columns(x) : x;
    }
    case EnsembleKind::toeplitz: {
      return gen_design_toeplitz(spec.n, toeplitz_chol_upper(spec.p, spec.gamma),
                                 spec.normalize, rng);
    }
    case EnsembleKind::bernoulli_pm1: {
      Matrix m(spec.n, spec.p);
      for (Index i = 0; i < spec.n; ++i)
        for (Index j = 0; j < spec.p; ++j) m(i, j) = rng.sign();
      DesignMatrix x(std::move(m));
      return spec.normalize ? normalize_columns(x) : x;
    }
  }
  throw std::logic_error("gen_design: unreachable");
}

TigerBetaSpec TigerBetaSpec::from_counts(Index p, Index a0, Index s0, Index s, double c_a,
                                         double c_m, double lambda_sigma,
                                         SupportLayout layout) {
  TigerBetaSpec spec;
  spec.p = p;
  spec.a0 = a0;
  spec.s0 = s0;
  spec.s = s;
  spec.c_a = c_a;
  spec.c_m = c_m;
  spec.c_t = (s > s0) ? std::sqrt(double(s0 - a0) * (1.0 - c_m * c_m) / double(s - s0))
                      : 0.0;
  spec.lambda_sigma = lambda_sigma;
  spec.layout = layout;
  spec.validate();
  return spec;
}

TigerBetaSpec TigerBetaSpec::from_tail_height(Index p, Index a0, Index s0, double c_a,
                                              double c_m, double c_t_target,
                                              double lambda_sigma, SupportLayout layout) {
  Index tail = 0;
  if (c_t_target > 0.0 && s0 > a0 && c_m < 1.0) {
    const double exact = double(s0 - a0) * (1.0 - c_m * c_m) / (c_t_target * c_t_target);
    tail = static_cast<Index>(std::llround(exact));
    if (tail < 1) tail = 1;
  }
  return from_counts(p, a0, s0, s0 + tail, c_a, c_m, lambda_sigma, layout);
}

void TigerBetaSpec::validate() const {
  if (!(a0 >= 0 && a0 <= s0 && s0 <= s && s <= p)) {
    throw std::invalid_argument("TigerBetaSpec: need a0 <= s0 <= s <= p");
  }
  if (!(c_a > 1.0)) throw std::invalid_argument("TigerBetaSpec: c_a > 1 required");
  if (!(c_m > 0.0 && c_m <= 1.0)) {
    throw std::invalid_argument("TigerBetaSpec: c_m in (0,1] required");
  }
  if (!(lambda_sigma > 0.0)) {
    throw std::invalid_argument("TigerBetaSpec: lambda_sigma must be > 0");
  }
  if (s > s0) {
    const double lhs = double(s - s0) * c_t * c_t;
    const double rhs = double(s0 - a0) * (1.0 - c_m * c_m);
    if (std::abs(lhs - rhs) > 1e-9 * std::max(1.0, rhs)) {
      throw std::invalid_argument("TigerBetaSpec: (s-s0) c_t^2 != (s0-a0)(1-c_m^2)");
    }
  }
}

Signal gen_beta_tiger(const TigerBetaSpec& spec, RngStream& rng) {
  spec.validate();
  std::vector<Index> pos;
  if (spec.layout == SupportLayout::permuted) {
    pos = rng.sample_indices(spec.p, spec.s);
  } else {
    pos.resize(static_cast<std::size_t>(spec.s));
    for (Index j = 0; j < spec.s; ++j) pos[static_cast<std::size_t>(j)] = j;
  }
  Signal beta = Signal::zeros(spec.p);
  for (Index k = 0; k < spec.s; ++k) {
    double mag;
    if (k < spec.a0) {
      mag = spec.c_a * spec.lambda_sigma;
    } else if (k < spec.s0) {
      mag = spec.c_m * spec.lambda_sigma;
    } else {
      mag = spec.c_t * spec.lambda_sigma;
    }
    beta.coef[pos[static_cast<std::size_t>(k)]] = rng.sign() * mag;
  }
  return beta;
}

Signal gen_beta_spiked(Index p, Index s, RngStream& rng) {
  if (s > p || s < 0) throw std::invalid_argument("gen_beta_spiked: 0 <= s <= p");
  Signal beta = Signal::zeros(p);
  const auto pos = rng.sample_indices(p, s);
  for (Index k = 0; k < s; ++k) {
    const double mu = rng.sign();
    beta.coef[pos[static_cast<std::size_t>(k)]] = mu * (1.0 + std::abs(rng.normal()));
  }
  return beta;
}

Signal gen_beta_const(Index p, Index s, double magnitude, RngStream& rng) {
  if (s > p || s < 0) throw std::invalid_argument("gen_beta_const: 0 <= s <= p");
  if (!(magnitude > 0.0)) throw std::invalid_argument("gen_beta_const: magnitude > 0");
  Signal beta = Signal::zeros(p);
  const auto pos = rng.sample_indices(p, s);
  for (Index k = 0; k < s; ++k) {
    beta.coef[pos[static_cast<std::size_t>(k)]] = rng.sign() * magnitude;
  }
  return beta;
}

Vector gen_observation(const DesignMatrix& X, const Signal& beta, const NoiseSpec& noise,
                       RngStream& rng) {
  if (beta.size() != X.p()) {
    throw std::invalid_argument("gen_observation: beta length != p");
  }
  Vector y = X.data * beta.coef;
  for (Index i = 0; i < y.size(); ++i) y[i] += noise.sigma * rng.normal();
  return y;
}

}  // namespace thlx
