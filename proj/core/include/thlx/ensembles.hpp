#pragma once

#include "thlx/rng.hpp"
#include "thlx/types.hpp"

namespace thlx {

enum class EnsembleKind { iid_gaussian, toeplitz, bernoulli_pm1 };

std::string to_string(EnsembleKind k);
EnsembleKind ensemble_kind_from_string(const std::string& s);

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::iid_gaussian;
  Index n = 0;
  Index p = 0;
  double gamma = 0.0;  // Toeplitz row correlation, in (0, 1)
  bool normalize = true;

  void validate() const;
};

/// [T(gamma)]_{ij} = gamma^{|i-j|}.
Matrix toeplitz_covariance(Index p, double gamma);

/// Upper-triangular factor U with U^T U = T(gamma), for row sampling X = Z U.
Matrix toeplitz_chol_upper(Index p, double gamma);

DesignMatrix gen_design(const EnsembleSpec& spec, RngStream& rng);

/// Toeplitz draw reusing a precomputed factor (the factorization is
/// O(p^3); experiment loops that redraw X per repetition share it).
DesignMatrix gen_design_toeplitz(Index n, const Matrix& chol_upper, bool normalize,
                                 RngStream& rng);

enum class SupportLayout { permuted, leading_blocks };

/// Four-block coefficient model: a0 strong coordinates at c_a*lambda_sigma,
/// s0-a0 moderate at c_m*lambda_sigma, s-s0 weak at c_t*lambda_sigma, rest zero.
struct TigerBetaSpec {
  Index p = 0;
  Index a0 = 0;
  Index s0 = 0;
  Index s = 0;
  double c_a = 0.0;  // > 1
  double c_m = 1.0;  // in (0, 1]
  double c_t = 0.0;  // tied to the others: (s-s0) c_t^2 = (s0-a0)(1-c_m^2)
  double lambda_sigma = 0.0;
  SupportLayout layout = SupportLayout::permuted;

  /// Counts given; c_t solved from the calibration identity (0 when s == s0).
  static TigerBetaSpec from_counts(Index p, Index a0, Index s0, Index s, double c_a,
                                   double c_m, double lambda_sigma,
                                   SupportLayout layout = SupportLayout::permuted);

  /// Tail height given; s - s0 is rounded to the nearest integer satisfying
  /// the calibration identity and c_t recomputed so it holds exactly.
  static TigerBetaSpec from_tail_height(Index p, Index a0, Index s0, double c_a,
                                        double c_m, double c_t_target,
                                        double lambda_sigma,
                                        SupportLayout layout = SupportLayout::permuted);

  void validate() const;
};

Signal gen_beta_tiger(const TigerBetaSpec& spec, RngStream& rng);

/// s random coordinates with value mu_i (1 + |g_i|), mu_i = +-1, g_i ~ N(0,1).
Signal gen_beta_spiked(Index p, Index s, RngStream& rng);

/// s random coordinates at +-magnitude.
Signal gen_beta_const(Index p, Index s, double magnitude, RngStream& rng);

/// Y = X beta + eps, eps iid N(0, sigma^2).
Vector gen_observation(const DesignMatrix& X, const Signal& beta, const NoiseSpec& noise,
                       RngStream& rng);

}  // namespace thlx
