#include <cmath>

#include "doctest.h"
#include "test_helpers.hpp"
#include "thlx/metrics.hpp"

using namespace thlx;
using namespace thlx_test;

namespace {
SelectionSet make_sel(std::vector<Index> idx) {
  SelectionSet s;
  s.indices = std::move(idx);
  return s;
}
}  // namespace

TEST_CASE("confusion counts under both references") {
  Signal beta = Signal::zeros(10);
  beta.coef[1] = 2.0;
  beta.coef[4] = -1.5;
  beta.coef[7] = 0.3;

  // Perfect support selection.
  auto c = confusion(make_sel({1, 4, 7}), beta, Reference::support_S);
  CHECK(c.tp == 3);
  CHECK(c.fp == 0);
  CHECK(c.fn == 0);
  CHECK(c.tn == 7);
  CHECK(c.total() == 10);

  // Empty selection.
  auto c0 = confusion(make_sel({}), beta, Reference::support_S);
  CHECK(c0.tp == 0);
  CHECK(c0.fn == 3);

  // Under top_T0 with a scale that caps s0 below the support size.
  // sum min(beta^2, ls^2) with ls = 1: 1 + 1 + 0.09 = 2.09 -> s0 = 3.
  auto ct = confusion(make_sel({1, 4}), beta, Reference::top_T0, 1.0);
  CHECK(ct.tp == 2);
  CHECK(ct.fn == 1);
  CHECK_THROWS_AS(confusion(make_sel({1}), beta, Reference::top_T0), std::invalid_argument);
}

TEST_CASE("tiger-style confusion: T0 selection vs full support") {
  const double ls = lambda_base(2048, 1600, LogBase::two);
  const auto spec = TigerBetaSpec::from_counts(2048, 30, 50, 130, 8.528,
                                               1.0 / std::sqrt(2.0), ls,
                                               SupportLayout::leading_blocks);
  RandomSource src(100);
  auto rng = src.stream(0);
  const Signal beta = gen_beta_tiger(spec, rng);
  const auto t0_set = beta.top_indices(50);

  const auto under_t0 = confusion(make_sel({t0_set.begin(), t0_set.end()}), beta,
                                  Reference::top_T0, ls);
  CHECK(under_t0.fp == 0);
  CHECK(under_t0.fn == 0);

  const auto under_s = confusion(make_sel({t0_set.begin(), t0_set.end()}), beta,
                                 Reference::support_S);
  CHECK(under_s.fp == 0);
  CHECK(under_s.fn == 80);
}

TEST_CASE("rates on reference confusion counts") {
  auto r0 = rates({8, 0, 248, 0, Reference::support_S});
  CHECK(r0.fpr == 0.0);
  CHECK(r0.tpr == 1.0);

  // Select everything: FPR = TPR = 1.
  auto r1 = rates({8, 248, 0, 0, Reference::support_S});
  CHECK(r1.fpr == 1.0);
  CHECK(r1.tpr == 1.0);

  // fp=3, tn=245, tp=8, fn=0.
  auto r2 = rates({8, 3, 245, 0, Reference::support_S});
  CHECK(r2.fpr == doctest::Approx(3.0 / 248.0));
  CHECK(r2.tpr == 1.0);

  // Zero denominators give zero rates.
  auto r3 = rates({0, 0, 0, 0, Reference::support_S});
  CHECK(r3.fpr == 0.0);
  CHECK(r3.tpr == 0.0);
}

TEST_CASE("rho squared") {
  Signal beta = Signal::zeros(6);
  beta.coef << 2, -2, 1, 0, 0, 0;
  CHECK(rho_squared(beta, beta, 1.0, 50) == doctest::Approx(0.0));

  Signal off = beta;
  off.coef[0] += 0.1;
  const double denom = 3.0 / 50.0;  // all terms variance-capped
  CHECK(rho_squared(off, beta, 1.0, 50) == doctest::Approx(0.01 / denom));

  CHECK_THROWS_AS(rho_squared(off, Signal::zeros(6), 1.0, 50), std::domain_error);

  // Invariant under a joint permutation of coordinates.
  Signal perm_hat = Signal::zeros(6);
  Signal perm_true = Signal::zeros(6);
  const std::vector<Index> perm{3, 0, 5, 1, 4, 2};
  for (Index j = 0; j < 6; ++j) {
    perm_hat.coef[perm[static_cast<std::size_t>(j)]] = off.coef[j];
    perm_true.coef[perm[static_cast<std::size_t>(j)]] = beta.coef[j];
  }
  CHECK(rho_squared(perm_hat, perm_true, 1.0, 50) ==
        doctest::Approx(rho_squared(off, beta, 1.0, 50)));
}

TEST_CASE("error decomposition definition unwinds") {
  // beta_init = beta: h = -beta restricted off T0... i.e. h = beta_{T0^c}.
  const double ls = 0.5;
  Signal beta = Signal::zeros(8);
  beta.coef << 3, -2, 0.3, 0.2, 0, 0, 0, 0;  // s0 = ceil((0.25+0.25+0.09+0.04)/0.25) = 3
  const auto d = error_decomposition(beta, beta, ls);
  CHECK(d.s0 == 3);
  CHECK(d.h_t0_l1 == doctest::Approx(0.0));
  // Off T0, h and beta coincide.
  CHECK(d.h_t0c_l1 == doctest::Approx(d.beta_t0c_l1));
  CHECK(d.delta_l1 == doctest::Approx(0.0));

  // beta_init = beta_{T0}: all h-norms vanish; |delta|_2 = |beta_{T0^c}|_2 <= ls sqrt(s0).
  Signal init_t0 = Signal::zeros(8);
  for (const Index j : d.t0) init_t0.coef[j] = beta.coef[j];
  const auto d2 = error_decomposition(init_t0, beta, ls);
  CHECK(d2.h_l1 == doctest::Approx(0.0));
  CHECK(d2.h_t01_l2 == doctest::Approx(0.0));
  CHECK(d2.delta_l2 == doctest::Approx(d2.beta_t0c_l2));
  CHECK(d2.delta_l2 <= ls * std::sqrt(double(d2.s0)) + 1e-12);
}

TEST_CASE("decomposition identities hold on random pairs") {
  RandomSource src(101);
  for (int t = 0; t < 20; ++t) {
    auto rng = src.stream(10 + t);
    Signal beta = gen_beta_spiked(30, 6, rng);
    Signal init = beta;
    for (Index j = 0; j < init.size(); ++j) init.coef[j] += 0.3 * rng.normal();
    check_vector_identities(init, beta, 0.4, threshold_select(init, 0.5).size(), 0.5);

    // T1 never intersects T0, T01 is their union.
    const auto d = error_decomposition(init, beta, 0.4);
    for (const Index j : d.t1) {
      CHECK_FALSE(std::binary_search(d.t0.begin(), d.t0.end(), j));
    }
    CHECK(d.t01.size() == d.t0.size() + d.t1.size());
  }
}

TEST_CASE("cone lemma direction on conforming vectors") {
  // When |h_{T0^c}|_1 <= k0 |h_{T0}|_1, we must get |h|_2 <= sqrt(1+k0) |h_J0|_2
  // with J0 the s0 largest |h| coordinates.
  RandomSource src(102);
  const double k0 = 3.0;
  int asserted = 0;
  for (int t = 0; t < 40; ++t) {
    auto rng = src.stream(t);
    Signal beta = gen_beta_spiked(20, 4, rng);
    Signal init = beta;
    // Concentrated perturbation so the cone condition tends to hold.
    for (const Index j : beta.support()) init.coef[j] += 0.5 * rng.normal();
    for (Index j = 0; j < 20; ++j) init.coef[j] += 0.01 * rng.normal();
    const auto d = error_decomposition(init, beta, 0.4);
    if (d.s0 == 0) continue;
    if (d.h_t0c_l1 <= k0 * d.h_t0_l1) {
      // Recompute h and its top-s0 l2 mass.
      Vector h = init.coef;
      for (const Index j : d.t0) h[j] -= beta.coef[j];
      Signal hs{h};
      const auto j0 = hs.top_indices(d.s0);
      double mass = 0.0;
      for (const Index j : j0) mass += h[j] * h[j];
      CHECK(d.h_l2 <= std::sqrt(1.0 + k0) * std::sqrt(mass) + 1e-10);
      ++asserted;
    }
  }
  CHECK(asserted > 0);
}

TEST_CASE("exact sign recovery") {
  Signal beta = Signal::zeros(5);
  beta.coef << 1, -2, 0, 0, 3;
  CHECK(exact_sign_recovery(beta, beta));

  Signal extra = beta;
  extra.coef[2] = 0.01;
  CHECK_FALSE(exact_sign_recovery(extra, beta));

  Signal scaled = beta;
  scaled.coef << 0.1, -9, 0, 0, 0.2;
  CHECK(exact_sign_recovery(scaled, beta));

  Signal flipped = beta;
  flipped.coef[0] = -1;
  CHECK_FALSE(exact_sign_recovery(flipped, beta));
}
