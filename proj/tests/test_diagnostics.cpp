#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "test_helpers.hpp"
#include "thlx/diagnostics.hpp"

using namespace thlx;
using namespace thlx_test;

TEST_CASE("sparse_eigs on orthonormal-scale columns is exactly one") {
  const Index n = 6;
  DesignMatrix X(Matrix::Identity(n, n) * std::sqrt(double(n)), true);
  for (Index m : {1, 2, 4, 6}) {
    const auto e = sparse_eigs(X, m, ScanMode::exhaustive);
    CHECK(e.exact);
    CHECK(e.lambda_min == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.lambda_max == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("duplicated column pair makes lambda_min(2) zero") {
  RandomSource src(81);
  auto inst = make_instance(src, 0, 12, 6, 2, 0.5);
  inst.X.data.col(5) = inst.X.data.col(0);
  const auto e = sparse_eigs(inst.X, 2, ScanMode::exhaustive);
  CHECK(e.lambda_min == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("exhaustive sparse_eigs equals the brute-force subset scan") {
  RandomSource src(82);
  const auto inst = make_instance(src, 1, 10, 8, 3, 0.5);
  const auto lib = sparse_eigs(inst.X, 3, ScanMode::exhaustive);
  const auto brute = brute_sparse_eig_scan(inst.X, 3);
  CHECK(lib.lambda_min == brute.lambda_min);
  CHECK(lib.lambda_max == brute.lambda_max);
}

TEST_CASE("sparse_eigs budget and sampled-mode flags") {
  RandomSource src(83);
  const auto inst = make_instance(src, 2, 20, 40, 5, 0.5);
  CHECK_THROWS_WITH_AS(sparse_eigs(inst.X, 10, ScanMode::exhaustive, 1000),
                       doctest::Contains("budget"), std::runtime_error);
  auto rng = src.stream(9);
  const auto sampled = sparse_eigs(inst.X, 3, ScanMode::greedy_sampled, 200, &rng);
  CHECK_FALSE(sampled.exact);
  const auto exact = sparse_eigs(inst.X, 3, ScanMode::exhaustive);
  // Sampled extrema are one-sided bounds of the true ones.
  CHECK(sampled.lambda_max <= exact.lambda_max + 1e-12);
  CHECK(sampled.lambda_min >= exact.lambda_min - 1e-12);
}

TEST_CASE("sparse eigenvalue monotonicity in m") {
  RandomSource src(84);
  const auto inst = make_instance(src, 3, 14, 9, 3, 0.5);
  double prev_min = 2.0, prev_max = 0.0;
  for (Index m = 1; m <= 4; ++m) {
    const auto e = sparse_eigs(inst.X, m, ScanMode::exhaustive);
    CHECK(e.lambda_min <= prev_min + 1e-12);
    CHECK(e.lambda_max >= prev_max - 1e-12);
    prev_min = e.lambda_min;
    prev_max = e.lambda_max;
  }
}

TEST_CASE("restricted orthogonality: orthogonal, duplicated, brute force") {
  const Index n = 6;
  DesignMatrix I6(Matrix::Identity(n, n) * std::sqrt(double(n)), true);
  CHECK(restricted_orthogonality(I6, 1, 2, ScanMode::exhaustive).theta ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(restricted_orthogonality(I6, 2, 3, ScanMode::exhaustive).theta ==
        doctest::Approx(0.0).epsilon(1e-12));

  Matrix two(4, 2);
  two.col(0) = (Vector(4) << 1, 1, 1, 1).finished();
  two.col(1) = two.col(0);
  const DesignMatrix dup(std::move(two), true);
  CHECK(restricted_orthogonality(dup, 1, 1, ScanMode::exhaustive).theta ==
        doctest::Approx(1.0).epsilon(1e-12));

  RandomSource src(85);
  const auto inst = make_instance(src, 4, 12, 6, 2, 0.5);
  const auto lib = restricted_orthogonality(inst.X, 1, 2, ScanMode::exhaustive);
  CHECK(lib.exact);
  CHECK(lib.theta == brute_theta_scan(inst.X, 1, 2));
}

TEST_CASE("theta bounds: Cauchy-Schwarz and the parallelogram inequality") {
  RandomSource src(86);
  for (int t = 0; t < 5; ++t) {
    const auto inst = make_instance(src, 10 + t, 12, 8, 3, 0.5);
    for (Index s : {1, 2}) {
      const auto th = restricted_orthogonality(inst.X, s, s, ScanMode::exhaustive);
      const auto es = sparse_eigs(inst.X, s, ScanMode::exhaustive);
      const auto e2s = sparse_eigs(inst.X, 2 * s, ScanMode::exhaustive);
      CHECK(th.theta <= std::sqrt(es.lambda_max * es.lambda_max) + 1e-10);
      CHECK(th.theta <= (e2s.lambda_max - e2s.lambda_min) / 2.0 + 1e-10);
    }
    // orthocauchy with s0 = 1: theta_{1,2} against both closed-form caps.
    const auto th12 = restricted_orthogonality(inst.X, 1, 2, ScanMode::exhaustive);
    const auto e1 = sparse_eigs(inst.X, 1, ScanMode::exhaustive);
    const auto e2 = sparse_eigs(inst.X, 2, ScanMode::exhaustive);
    const auto e3 = sparse_eigs(inst.X, 3, ScanMode::exhaustive);
    const double cap = std::min(std::sqrt(e1.lambda_max * e2.lambda_max),
                                (e3.lambda_max - e3.lambda_min) / 2.0);
    CHECK(th12.theta <= cap + 1e-10);
  }
}

TEST_CASE("re_lower: orthonormal case, null witness, k0 monotonicity") {
  const Index n = 8;
  DesignMatrix I8(Matrix::Identity(n, n) * std::sqrt(double(n)), true);
  RandomSource src(87);
  auto rng = src.stream(0);
  const auto r = re_lower(I8, 2, 3.0, 20, rng);
  CHECK_FALSE(r.diverged);
  CHECK(r.k_lower >= 0.9);
  CHECK(r.k_lower <= 1.0 + 1e-9);

  // admissible2 direction on the orthonormal case: Lambda_min(2 s0) >= 1/(2 K^2)
  // with the analytic K = 1.
  const auto e = sparse_eigs(I8, 4, ScanMode::exhaustive);
  CHECK(e.lambda_min >= 1.0 / (2.0 * 1.0 * 1.0) - 1e-12);

  auto dup_inst = make_instance(src, 5, 16, 8, 2, 0.5);
  dup_inst.X.data.col(7) = dup_inst.X.data.col(0);
  auto rng2 = src.stream(1);
  const auto rd = re_lower(dup_inst.X, 2, 3.0, 40, rng2);
  CHECK(rd.diverged);

  const auto inst = make_instance(src, 6, 20, 10, 3, 0.5);
  auto rng3 = src.stream(2);
  const auto k_small = re_lower(inst.X, 2, 1.0, 30, rng3);
  auto rng4 = src.stream(2);
  const auto k_large = re_lower(inst.X, 2, 4.0, 30, rng4);
  CHECK(k_large.k_lower >= k_small.k_lower - 1e-9);
}

TEST_CASE("essential sparsity basics") {
  CHECK(essential_sparsity(Signal::zeros(10), 0.1) == 0);
  Signal one = Signal::zeros(10);
  one.coef[3] = 1.0;  // 10x the scale 0.1
  CHECK(essential_sparsity(one, 0.1) == 1);
  // Remark-style consequence: the (s0+1)-th largest |beta| is below the scale.
  RandomSource src(88);
  auto rng = src.stream(0);
  Signal beta = Signal::zeros(50);
  for (Index j = 0; j < 50; ++j) beta.coef[j] = 0.3 * rng.normal();
  const double ls = 0.25;
  const Index s0 = essential_sparsity(beta, ls);
  if (s0 < 50) {
    const auto order = beta.top_indices(s0 + 1);
    double smallest = std::numeric_limits<double>::infinity();
    for (const Index j : order) smallest = std::min(smallest, std::abs(beta.coef[j]));
    CHECK(smallest < ls);
  }
}

TEST_CASE("ideal_mse raw sum and lower bound") {
  CHECK(ideal_mse(Signal::zeros(8), 1.0, 100).raw == 0.0);

  Signal strong = Signal::zeros(6);
  strong.coef << 5, -5, 5, 0, 0, 0;
  const auto m = ideal_mse(strong, 1.0, 50);
  CHECK(m.raw == doctest::Approx(3.0 / 50.0));
  CHECK_FALSE(m.lower_bound.has_value());

  const auto mb = ideal_mse(strong, 1.0, 50, 2.0);
  CHECK(*mb.lower_bound == doctest::Approx(0.5 * 3.0 / 50.0));

  // Tiger magnitudes at p=2048, n=1600: every term caps at sigma^2/n.
  const double ls = lambda_base(2048, 1600, LogBase::two);
  const auto spec = TigerBetaSpec::from_counts(2048, 30, 50, 130, 8.528,
                                               1.0 / std::sqrt(2.0), ls);
  RandomSource src(89);
  auto rng = src.stream(0);
  const Signal beta = gen_beta_tiger(spec, rng);
  const auto mt = ideal_mse(beta, 1.0, 1600);
  CHECK(mt.raw == doctest::Approx(130.0 / 1600.0).epsilon(1e-9));
}

TEST_CASE("counting bound check") {
  const double ls = lambda_base(2048, 1600, LogBase::two);
  const auto spec = TigerBetaSpec::from_counts(2048, 30, 50, 130, 8.528,
                                               1.0 / std::sqrt(2.0), ls);
  RandomSource src(90);
  auto rng = src.stream(0);
  const Signal beta = gen_beta_tiger(spec, rng);

  const auto c1 = counting_bound_check(beta, ls, 1.0);
  CHECK(c1.holds);
  CHECK(c1.bound == doctest::Approx(20.0));

  // Exactly sparse with all coordinates above the scale: zero tail count.
  Signal big = Signal::zeros(32);
  for (Index j = 0; j < 5; ++j) big.coef[j] = 3.0;
  const auto c2 = counting_bound_check(big, 1.0, 1.0);
  CHECK(c2.count == 0);
  CHECK(c2.holds);

  // c' = log(p)/2 reproduces the sigma sqrt(2/n) tail threshold and the
  // (log p - 1)(s0 - a0) bound, in the same log base as lambda sigma.
  const double cp = std::log2(2048.0) / 2.0;
  CHECK(ls / std::sqrt(2.0 * cp) ==
        doctest::Approx(std::sqrt(2.0 / 1600.0)).epsilon(1e-12));
  const auto c3 = counting_bound_check(beta, ls, cp);
  CHECK(c3.bound == doctest::Approx((std::log2(2048.0) - 1.0) * 20.0));

  CHECK_THROWS_AS(counting_bound_check(beta, ls, 0.5), std::invalid_argument);
}

TEST_CASE("oracle constants reproduce the idealized hand evaluation") {
  OracleConstantInputs in;  // all eigenvalues 1, theta 0, K = 1, d0 = 2, c4 = 1
  in.d0 = 2.0;
  in.c4 = 8.0;
  in.s0 = 50;
  const auto c = oracle_constants(in);
  CHECK(c.ell_s0 == doctest::Approx(0.0));
  CHECK(c.D == doctest::Approx(1.0));
  CHECK(c.D0_prime == doctest::Approx(7.0));
  CHECK(c.D1 == doctest::Approx(8.0));
  CHECK(c.D3 == doctest::Approx(4.0));
  CHECK(c.D0 == doctest::Approx(7.0 * std::sqrt(2.0)));
  // D4^2 at C4 = D1 = 8 and D0' = 7: ((7+8)^2 + 1) * 3/2 = 339.
  CHECK(c.D4 * c.D4 == doctest::Approx(339.0));
}

TEST_CASE("constants report carries the plug-in provenance label") {
  OracleConstantInputs in;
  in.d0 = 2.0;
  const auto c = oracle_constants(in);
  CHECK(c.provenance == "plug-in");
  CHECK(c.to_json().find("plug-in") != std::string::npos);
  CHECK(c.to_json().find("\"s0\"") != std::string::npos);

  const auto d = ds_constants(DSConstantInputs{});
  CHECK(d.to_json().find("plug-in") != std::string::npos);
}

TEST_CASE("oracle constants: monotonicity in Lambda_max(s - s0) and domain errors") {
  OracleConstantInputs in;
  in.d0 = 2.0;
  double prev0 = 0, prev1 = 0, prev2 = 0, prev3 = 0;
  bool first = true;
  for (double lmax : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    in.lmax_s_minus_s0 = lmax;
    const auto c = oracle_constants(in);
    if (!first) {
      CHECK(c.D0 >= prev0 - 1e-12);
      CHECK(c.D1 >= prev1 - 1e-12);
      CHECK(c.D2 >= prev2 - 1e-12);
      CHECK(c.D3 >= prev3 - 1e-12);
    }
    prev0 = c.D0;
    prev1 = c.D1;
    prev2 = c.D2;
    prev3 = c.D3;
    first = false;
  }

  in.lmin_2s0 = 0.0;
  CHECK_THROWS_AS(oracle_constants(in), std::domain_error);
}

TEST_CASE("ds constants: idealized plug-in values and UUP boundary") {
  DSConstantInputs in;  // delta = theta = 0, a = 0, tau = 1, c4 = 1, lmin = 1
  const auto c = ds_constants(in);
  const double c0 = 4.0 * std::sqrt(2.0) + 1.0 + 1.0 / std::sqrt(2.0);
  CHECK(c.C0 == doctest::Approx(c0).epsilon(1e-12));
  CHECK(c.C0_prime == doctest::Approx(c0).epsilon(1e-12));
  CHECK(c.C1 == doctest::Approx(c0 + 1.0).epsilon(1e-12));
  CHECK(c.C2 == doctest::Approx(2.0 * c0 + 1.0).epsilon(1e-12));
  CHECK(c.C1 == doctest::Approx(8.364).epsilon(1e-3));
  CHECK(c.C2 == doctest::Approx(15.73).epsilon(1e-3));

  // C3 at a=0, tau=1, C4=C1: 12 ((C0'+C4)^2 + 1) + 4.
  DSConstantInputs in3 = in;
  in3.c4 = c.C1;
  const auto c3 = ds_constants(in3);
  const double expect = 12.0 * ((c0 + c.C1) * (c0 + c.C1) + 1.0) + 4.0;
  CHECK(c3.C3 * c3.C3 == doctest::Approx(expect).epsilon(1e-9));
  CHECK(c3.C3 * c3.C3 == doctest::Approx(2985.0).epsilon(2e-3));

  // delta + theta = 1 - tau exactly: rejected.
  DSConstantInputs bad;
  bad.delta = 0.25;
  bad.theta = 0.25;
  bad.tau = 0.5;
  CHECK_THROWS_WITH_AS(ds_constants(bad), doctest::Contains("UUP"), std::domain_error);
}

TEST_CASE("threshold_range recommendation") {
  OracleConstantInputs in;
  in.d0 = 2.0;
  in.s0 = 50;
  const auto oracle = oracle_constants(in);
  const double ls = 0.117;

  const auto eq = threshold_range(oracle, ls, 12.0, 12.0);
  CHECK(eq.t0 == doctest::Approx(12.0 * ls));
  CHECK(eq.beta_min_a0_requirement ==
        doctest::Approx(oracle.D0 * ls * std::sqrt(50.0) + 12.0 * ls));
  CHECK_FALSE(eq.breve_below_estimate);

  // Requirement grows with s0.
  OracleConstantInputs in2 = in;
  in2.s0 = 100;
  const auto oracle2 = oracle_constants(in2);
  const auto bigger = threshold_range(oracle2, ls, 12.0, 12.0);
  CHECK(bigger.beta_min_a0_requirement > eq.beta_min_a0_requirement);

  // breve at or below the estimate flags a warning.
  const auto warn = threshold_range(oracle, ls, oracle.D0, 12.0);
  CHECK(warn.breve_below_estimate);
}

TEST_CASE("noise event: empirical probability respects the floor") {
  RandomSource src(91);
  auto design_rng = src.stream(0);
  const DesignMatrix X = gen_design({EnsembleKind::iid_gaussian, 32, 64, 0.0, true},
                                    design_rng);
  auto rng = src.stream(1);
  const auto r = noise_event_check(X, 1.0, 1.0, 400, rng);
  CHECK(r.empirical >= r.floor - 3.0 * std::sqrt(r.floor * (1 - r.floor) / 400.0));
  CHECK(r.floor > 0.99);  // a = 1 drives the floor near one

  // Scale invariance in sigma: identical indicator stream.
  auto rng_a = src.stream(2);
  auto rng_b = src.stream(2);
  const auto r1 = noise_event_check(X, 1.0, 0.0, 150, rng_a);
  const auto r2 = noise_event_check(X, 7.5, 0.0, 150, rng_b);
  CHECK(r1.empirical == r2.empirical);

  CHECK_THROWS_AS(noise_event_check(X, 1.0, 0.0, 50, rng), std::invalid_argument);
}

TEST_CASE("RIP bridge and report serialization") {
  RandomSource src(92);
  const auto inst = make_instance(src, 7, 14, 7, 3, 0.5);
  DiagnoseRequest req;
  req.eig_orders = {1, 2, 3};
  req.theta_pairs = {{1, 2}};
  req.re_params = {{1, 3.0}};
  const auto rep = diagnose(inst.X, req);

  for (const auto& [m, e] : rep.eigs) {
    const double d = rep.delta.at(m);
    CHECK(1.0 + d >= e.lambda_max - 1e-12);
    CHECK(1.0 - d <= e.lambda_min + 1e-12);
    // Equality by construction on one side.
    CHECK(d == doctest::Approx(std::max(e.lambda_max - 1.0, 1.0 - e.lambda_min)));
  }

  const auto json = rep.to_json();
  CHECK(json.find("sparse_eigs") != std::string::npos);
  CHECK(json.find("re_lower") != std::string::npos);
  CHECK(rep.to_table().find("lambda_min") != std::string::npos);
}
