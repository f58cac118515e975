// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line with the quantities that decided it.

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "test_helpers.hpp"
#include "thlx/core_model.hpp"
#include "thlx/dantzig.hpp"
#include "thlx/diagnostics.hpp"
#include "thlx/ensembles.hpp"
#include "thlx/estimators.hpp"
#include "thlx/harness.hpp"
#include "thlx/lasso.hpp"
#include "thlx/metrics.hpp"

using namespace thlx;
using namespace thlx_test;

namespace {

void report(int criterion, const char* what, bool ok) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, what);
  std::fflush(stdout);
  CHECK_MESSAGE(ok, "criterion ", criterion, ": ", what);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream is(text);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

int column_of(const CsvTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == name) return static_cast<int>(i);
  }
  throw std::runtime_error("missing column " + name);
}

double auc_step_extended(std::vector<std::pair<double, double>> pts) {
  pts.emplace_back(0.0, 0.0);
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) / 2.0;
  }
  area += (1.0 - pts.back().first) * pts.back().second;
  return area;
}

}  // namespace

TEST_CASE("criterion 1: solver objectives match the enumeration oracles") {
  RandomSource src(101);
  double worst_lasso = 0.0, worst_dantzig = 0.0;
  int n_lasso = 0, n_dantzig = 0;

  for (int t = 0; t < 200; ++t) {
    auto geom = src.stream(1000 + static_cast<std::uint64_t>(t));
    // 140 joint instances keep p small enough for the Dantzig vertex oracle.
    const bool joint = t < 140;
    const Index p = joint ? 2 + static_cast<Index>(geom.uniform_index(6))
                          : 8 + static_cast<Index>(geom.uniform_index(3));
    const Index n = std::min<Index>(15, p + 1 + static_cast<Index>(geom.uniform_index(8)));
    const Index s = 1 + static_cast<Index>(geom.uniform_index(p));
    const auto inst = make_instance(src, 2000 + static_cast<std::uint64_t>(t), n, p, s, 0.6);

    LassoOptions opts;
    opts.tol = 1e-10;
    const double lam_l = (0.05 + 0.55 * geom.uniform01()) *
                         std::max(lambda_max(inst.X, inst.Y), 1e-3);
    const auto lfit = fit_lasso(inst.X, inst.Y, lam_l, opts);
    const double loracle = lasso_sign_pattern_oracle(inst.X, inst.Y, lam_l);
    worst_lasso = std::max(worst_lasso, std::abs(lfit.objective - loracle));
    ++n_lasso;

    if (joint) {
      const double bmax = (inst.X.data.transpose() * inst.Y / double(n))
                              .lpNorm<Eigen::Infinity>();
      const double lam_d = (0.2 + 0.6 * geom.uniform01()) * bmax;
      const auto dfit = fit_dantzig(inst.X, inst.Y, lam_d);
      const double doracle = dantzig_vertex_oracle(inst.X, inst.Y, lam_d);
      worst_dantzig = std::max(worst_dantzig, std::abs(dfit.objective - doracle));
      ++n_dantzig;
    }
  }
  std::printf("  lasso: %d instances, worst objective gap %.3e\n", n_lasso, worst_lasso);
  std::printf("  dantzig: %d instances, worst l1 gap %.3e\n", n_dantzig, worst_dantzig);
  report(1, "lasso within 1e-8 and dantzig within 1e-6 of the oracles",
         worst_lasso <= 1e-8 && worst_dantzig <= 1e-6);
}

TEST_CASE("criterion 2: certificates hold on 1000 fuzzed instances") {
  RandomSource src(202);
  bool ok = true;
  double worst_kkt = 0.0, worst_feas = 0.0, worst_gap = 0.0;

  for (int t = 0; t < 600 && ok; ++t) {
    auto geom = src.stream(3000 + static_cast<std::uint64_t>(t));
    const Index p = 4 + static_cast<Index>(geom.uniform_index(37));
    const Index n = 6 + static_cast<Index>(geom.uniform_index(25));
    const Index s = 1 + static_cast<Index>(geom.uniform_index(std::min<Index>(p, 10)));
    const auto inst = make_instance(src, 4000 + static_cast<std::uint64_t>(t), n, p, s,
                                    0.3 + geom.uniform01());
    LassoOptions opts;
    if (t % 5 == 0) {
      Vector w(p);
      for (Index j = 0; j < p; ++j) w[j] = 0.25 + 2.0 * geom.uniform01();
      opts.weights = w;
    }
    const double lam = std::pow(10.0, -2.5 * geom.uniform01()) *
                       std::max(lambda_max(inst.X, inst.Y, opts.weights), 1e-3);
    const auto fit = fit_lasso(inst.X, inst.Y, lam, opts);
    const double kkt = lasso_kkt_residual(inst.X, inst.Y, fit.beta, lam, opts.weights);
    worst_kkt = std::max(worst_kkt, kkt);
    if (kkt > opts.tol) ok = false;
  }

  for (int t = 0; t < 400 && ok; ++t) {
    auto geom = src.stream(5000 + static_cast<std::uint64_t>(t));
    const bool first_order = t % 20 == 0;
    const Index p = first_order ? 4 + static_cast<Index>(geom.uniform_index(7))
                                : 4 + static_cast<Index>(geom.uniform_index(13));
    const Index n = p + 2 + static_cast<Index>(geom.uniform_index(12));
    const Index s = 1 + static_cast<Index>(geom.uniform_index(std::min<Index>(p, 6)));
    const auto inst = make_instance(src, 6000 + static_cast<std::uint64_t>(t), n, p, s, 0.5);
    const double bmax = (inst.X.data.transpose() * inst.Y / double(n))
                            .lpNorm<Eigen::Infinity>();
    DantzigOptions opts;
    if (first_order) {
      opts.method = DantzigMethod::first_order;
      opts.opt_tol = 1e-5;
      opts.max_iters = 500000;
    }
    const double lam = (0.05 + 0.9 * geom.uniform01()) * bmax;
    const auto fit = fit_dantzig(inst.X, inst.Y, lam, opts);
    const auto feas = dantzig_feasible(inst.X, inst.Y, fit.beta, lam, opts.feas_tol);
    worst_feas = std::max(worst_feas, feas.residual - lam);
    worst_gap = std::max(worst_gap, fit.cert_gap);
    if (!feas.feasible || fit.cert_gap > opts.opt_tol) ok = false;
  }

  std::printf("  worst lasso KKT %.3e | worst dantzig feasibility excess %.3e, gap %.3e\n",
              worst_kkt, worst_feas, worst_gap);
  report(2, "KKT/feasibility certificates at the configured tolerances (1000 instances)",
         ok);
}

TEST_CASE("criterion 3: tiger table row reproduction and essential sparsity") {
  const double ls = lambda_base(2048, 1600, LogBase::two);
  const auto spec = TigerBetaSpec::from_counts(2048, 30, 50, 130, 8.528,
                                               1.0 / std::sqrt(2.0), ls);
  RandomSource src(303);
  auto rng = src.stream(0);
  const Signal beta = gen_beta_tiger(spec, rng);

  double l1s = 0, l1m = 0, l1t = 0, l2s = 0, l2m = 0, l2t = 0;
  const double ma = spec.c_a * ls, mm = spec.c_m * ls;
  for (Index j = 0; j < beta.size(); ++j) {
    const double v = std::abs(beta.coef[j]);
    if (v == 0.0) continue;
    if (std::abs(v - ma) < 1e-12) { l1s += v; l2s += v * v; }
    else if (std::abs(v - mm) < 1e-12) { l1m += v; l2m += v * v; }
    else { l1t += v; l2t += v * v; }
  }
  l2s = std::sqrt(l2s);
  l2m = std::sqrt(l2m);
  l2t = std::sqrt(l2t);

  const double c_t_small = spec.c_t * ls * std::sqrt(1600.0);
  const double diffs[12] = {
      std::abs(spec.c_a * ls - 1.0),   std::abs(spec.c_m - 0.707),
      std::abs(spec.c_m * ls - 0.083), std::abs(spec.c_t - 0.354),
      std::abs(spec.c_t * ls - 0.041), std::abs(c_t_small - 1.658),
      std::abs(l1s - 30.0),            std::abs(l1m - 1.658),
      std::abs(l1t - 3.317),           std::abs(l2s - 5.477),
      std::abs(l2m - 0.371),           std::abs(l2t - 0.371)};
  double worst = 0.0;
  for (const double d : diffs) worst = std::max(worst, d);
  const Index s0 = essential_sparsity(beta, ls);
  std::printf("  worst of 12 table deviations %.2e, essential sparsity %lld\n", worst,
              static_cast<long long>(s0));
  report(3, "all twelve table values within 1e-3 and s0 == 50 at base-2 lambda*sigma",
         worst < 1e-3 && s0 == 50);
}

TEST_CASE("criterion 4: noise event probability respects the closed-form floor") {
  RandomSource src(404);
  auto design_rng = src.stream(0);
  const DesignMatrix X = gen_design({EnsembleKind::iid_gaussian, 72, 256, 0.0, true},
                                    design_rng);
  auto rng = src.stream(1);
  const int reps = 2000;
  const auto r = noise_event_check(X, 1.0, 0.0, reps, rng);
  const double sd = std::sqrt(r.floor * (1.0 - r.floor) / reps);
  std::printf("  empirical %.4f vs floor %.4f (floor - 3sd = %.4f)\n", r.empirical,
              r.floor, r.floor - 3.0 * sd);
  report(4, "empirical noise-event probability >= floor - 3 binomial sd",
         r.empirical >= r.floor - 3.0 * sd);
}

TEST_CASE("criterion 5: diagnostics equal brute-force scans bitwise, bounds hold") {
  RandomSource src(505);
  bool bitwise = true, bounds = true;
  for (int t = 0; t < 50; ++t) {
    const auto inst = make_instance(src, 100 + static_cast<std::uint64_t>(t), 12, 8, 3, 0.5);

    std::map<Index, SparseEigs> eigs;
    for (Index m : {1, 2, 3, 4, 6}) {
      eigs[m] = sparse_eigs(inst.X, m, ScanMode::exhaustive);
    }
    for (Index m : {1, 2, 3}) {
      const auto brute = brute_sparse_eig_scan(inst.X, m);
      if (eigs[m].lambda_min != brute.lambda_min ||
          eigs[m].lambda_max != brute.lambda_max) {
        bitwise = false;
      }
    }
    std::map<std::pair<Index, Index>, double> theta;
    for (auto [s, sp] : {std::pair<Index, Index>{1, 1}, {1, 2}, {2, 2}, {2, 4}}) {
      theta[{s, sp}] = restricted_orthogonality(inst.X, s, sp, ScanMode::exhaustive).theta;
    }
    for (auto [s, sp] : {std::pair<Index, Index>{1, 1}, {1, 2}, {2, 2}}) {
      if (theta[{s, sp}] != brute_theta_scan(inst.X, s, sp)) bitwise = false;
    }

    // Parallelogram bound theta_{s,s} <= (Lmax(2s) - Lmin(2s)) / 2.
    for (Index s : {Index{1}, Index{2}}) {
      if (theta[{s, s}] > (eigs[2 * s].lambda_max - eigs[2 * s].lambda_min) / 2.0 + 1e-10) {
        bounds = false;
      }
    }
    // theta_{s0,2s0} <= min(sqrt(Lmax(s0) Lmax(2s0)), (Lmax(3s0) - Lmin(3s0))/2).
    for (Index s0 : {Index{1}, Index{2}}) {
      const double cap =
          std::min(std::sqrt(eigs[s0].lambda_max * eigs[2 * s0].lambda_max),
                   (eigs[3 * s0].lambda_max - eigs[3 * s0].lambda_min) / 2.0);
      if (theta[{s0, 2 * s0}] > cap + 1e-10) bounds = false;
    }
  }
  report(5, "exhaustive scans equal brute force bitwise on 50 designs", bitwise);
  report(5, "restricted-orthogonality eigenvalue bounds hold on every design", bounds);
}

TEST_CASE("criterion 6: type I/II threshold sweep has a low-error point") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::type12_curves;
  cfg.design = {EnsembleKind::iid_gaussian, 72, 256, 0.0, true};
  cfg.beta.kind = BetaKind::spiked;
  cfg.beta.s = 8;
  cfg.sigma_rule = SigmaRule::sqrt_s_over_3;
  cfg.penalty_factors = {0.69};
  cfg.threshold_factors = {0.5, 0.75, 1.0, 1.25, 1.5};
  cfg.reps = 100;
  cfg.master_seed = 606;
  cfg.out_dir = "acceptance-out/type12";
  const auto out = run_experiment(cfg);

  const auto table = parse_csv(out.summary_csv);
  const int c_t0 = column_of(table, "t0_factor");
  const int c_fp = column_of(table, "fp_mean");
  const int c_fn = column_of(table, "fn_mean");
  bool found = false;
  for (const auto& row : table.rows) {
    const double fp = std::stod(row[static_cast<std::size_t>(c_fp)]);
    const double fn = std::stod(row[static_cast<std::size_t>(c_fn)]);
    std::printf("  t0 = %s lambda*sigma: mean FP %.3f, mean FN %.3f\n",
                row[static_cast<std::size_t>(c_t0)].c_str(), fp, fn);
    if (fp <= 0.5 && fn <= 0.5) found = true;
  }
  report(6, "some t0 in [0.5, 1.5] lambda*sigma has mean FP <= 0.5 and mean FN <= 0.5",
         found);
}

TEST_CASE("criterion 7: rho^2 study at p=2000 (thresholded vs path-optimal lasso)") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::rho2_study;
  cfg.design = {EnsembleKind::iid_gaussian, 400, 2000, 0.0, true};
  cfg.beta.kind = BetaKind::spiked;
  cfg.sigma_rule = SigmaRule::sqrt_s_over_3;
  cfg.penalty_factors = {0.69};
  cfg.threshold_factors = {1.0};
  cfg.s_list = {18, 100};
  cfg.reps = 50;
  cfg.master_seed = 707;
  cfg.out_dir = "acceptance-out/rho2";
  const auto out = run_experiment(cfg);

  const auto table = parse_csv(out.summary_csv);
  const int c_s = column_of(table, "s");
  const int c_t = column_of(table, "rho2_thresholded_mean");
  const int c_l = column_of(table, "rho2_lasso_mean");
  double t18 = -1, l18 = -1, t100 = -1, l100 = -1;
  for (const auto& row : table.rows) {
    const long long s = std::stoll(row[static_cast<std::size_t>(c_s)]);
    const double rt = std::stod(row[static_cast<std::size_t>(c_t)]);
    const double rl = std::stod(row[static_cast<std::size_t>(c_l)]);
    std::printf("  s = %lld: thresholded mean rho2 %.3f | lasso mean rho2 %.3f\n", s, rt,
                rl);
    if (s == 18) { t18 = rt; l18 = rl; }
    if (s == 100) { t100 = rt; l100 = rl; }
  }
  report(7, "s=18: thresholded mean rho2 < 3 and lasso-optimal mean rho2 > 5",
         t18 >= 0 && t18 < 3.0 && l18 > 5.0);
  report(7, "s=100: both estimators exceed rho2 = 20 (breakdown regime)",
         t100 > 20.0 && l100 > 20.0);
}

TEST_CASE("criterion 8: deterministic vector identities on estimator runs") {
  RandomSource src(808);
  int runs = 0;

  // Thresholded Lasso across ensemble/beta shapes.
  for (int t = 0; t < 10; ++t) {
    const auto inst = make_instance(src, 10 + static_cast<std::uint64_t>(t), 48, 64, 6, 0.5);
    const double ls = lambda_base(64, 48) * 0.5;
    const auto est = thresholded_lasso(inst.X, inst.Y, 0.5 * ls, 0.8 * ls);
    check_vector_identities(est.beta_init, inst.beta, ls, est.selection.size(), est.t0);
    ++runs;
  }
  {
    const Matrix chol = toeplitz_chol_upper(96, 0.7);
    const double ls = lambda_base(96, 64, LogBase::two);
    const auto spec = TigerBetaSpec::from_counts(96, 4, 8, 24, 8.5, 1.0 / std::sqrt(2.0), ls);
    for (int t = 0; t < 10; ++t) {
      auto brng = src.stream(100 + static_cast<std::uint64_t>(t));
      auto drng = src.stream(200 + static_cast<std::uint64_t>(t));
      auto nrng = src.stream(300 + static_cast<std::uint64_t>(t));
      const Signal beta = gen_beta_tiger(spec, brng);
      const DesignMatrix X = gen_design_toeplitz(64, chol, true, drng);
      const Vector Y = gen_observation(X, beta, NoiseSpec(1.0), nrng);
      const auto est = thresholded_lasso(X, Y, 0.4 * ls, 1.0 * ls);
      check_vector_identities(est.beta_init, beta, ls, est.selection.size(), est.t0);
      const auto c = confusion(est.selection, beta, Reference::top_T0, ls);
      CHECK(est.selection.size() == c.tp + c.fp);
      ++runs;
    }
  }
  // Gauss-Dantzig runs.
  for (int t = 0; t < 10; ++t) {
    const auto inst = make_instance(src, 400 + static_cast<std::uint64_t>(t), 36, 24, 3, 0.3);
    const double ls = lambda_base(24, 36) * 0.3;
    GaussDantzigOptions opts;
    opts.c4 = 1.0;
    opts.c1 = 0.5;
    const auto est = gauss_dantzig(inst.X, inst.Y, 0.3, opts);
    check_vector_identities(est.beta_init, inst.beta, ls, est.selection.size(), est.t0);
    ++runs;
  }
  std::printf("  identities checked on %d estimator runs\n", runs);
  report(8, "tail bound, Pythagoras split, counting bound, and l1 gap identity hold",
         runs == 30);
}

TEST_CASE("criterion 9: scaled tiger run keeps strong variables and few FPs") {
  const Index p = 512, n = 400, a0 = 8, s0 = 13, s = 33;
  const double ls = lambda_base(p, n, LogBase::two);
  const auto spec = TigerBetaSpec::from_counts(p, a0, s0, s, 8.5, 1.0 / std::sqrt(2.0), ls);
  RandomSource src(909);
  auto brng = src.stream(0);
  const Signal beta = gen_beta_tiger(spec, brng);
  const Matrix chol = toeplitz_chol_upper(p, 0.7);

  const int reps = 100;
  int survive = 0;
  double fp_sum = 0.0;
  const double strong_floor = 0.99 * spec.c_a * ls;
  for (int r = 0; r < reps; ++r) {
    auto drng = src.stream(100 + static_cast<std::uint64_t>(r));
    auto nrng = src.stream(10000 + static_cast<std::uint64_t>(r));
    const DesignMatrix X = gen_design_toeplitz(n, chol, true, drng);
    const Vector Y = gen_observation(X, beta, NoiseSpec(1.0), nrng);
    const auto fit = fit_lasso(X, Y, 0.3 * ls);

    // Survival at the top of the (lambda*sigma, 2 lambda*sigma] interval
    // implies survival everywhere below it (selections nest in t0).
    const auto sel_hi = threshold_select(fit.beta, 2.0 * ls, SelectionSource::lasso);
    bool all = true;
    for (Index j = 0; j < p; ++j) {
      if (std::abs(beta.coef[j]) > strong_floor && !sel_hi.contains(j)) all = false;
    }
    survive += all ? 1 : 0;

    const auto sel_lo = threshold_select(fit.beta, 1.0 * ls, SelectionSource::lasso);
    const auto c = confusion(sel_lo, beta, Reference::top_T0, ls);
    fp_sum += double(c.fp);
  }
  std::printf("  all-strong survival at t0 = 2 lambda*sigma: %d/%d; mean FP at "
              "t0 = lambda*sigma: %.2f\n",
              survive, reps, fp_sum / reps);
  report(9, "strong coordinates survive t0 in (1, 2] lambda*sigma in >= 95 of 100 reps",
         survive >= 95);
  report(9, "mean FP count at t0 = lambda*sigma is <= 2", fp_sum / reps <= 2.0);
}

TEST_CASE("criterion 10: thresholded-lasso ROC area dominates both comparators") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::roc_compare;
  cfg.design = {EnsembleKind::iid_gaussian, 165, 256, 0.0, true};
  cfg.beta.kind = BetaKind::spiked;
  cfg.beta.s = 32;
  cfg.sigma_rule = SigmaRule::sqrt_s_over_3;
  cfg.penalty_factors = {0.69};
  for (int i = 0; i < 16; ++i) cfg.threshold_factors.push_back(0.01 + 1.49 * i / 15.0);
  cfg.reps = 100;
  cfg.master_seed = 1010;
  cfg.out_dir = "acceptance-out/roc";
  const auto out = run_experiment(cfg);

  const auto table = parse_csv(out.summary_csv);
  const int c_est = column_of(table, "estimator");
  const int c_fpr = column_of(table, "fpr_mean");
  const int c_tpr = column_of(table, "tpr_mean");
  std::vector<std::pair<double, double>> tl, la, ad;
  for (const auto& row : table.rows) {
    const auto& est = row[static_cast<std::size_t>(c_est)];
    const double fpr = std::stod(row[static_cast<std::size_t>(c_fpr)]);
    const double tpr = std::stod(row[static_cast<std::size_t>(c_tpr)]);
    if (est == "thresholded_lasso") tl.emplace_back(fpr, tpr);
    else if (est == "lasso") la.emplace_back(fpr, tpr);
    else ad.emplace_back(fpr, tpr);
  }
  const double a_tl = auc_step_extended(tl);
  const double a_la = auc_step_extended(la);
  const double a_ad = auc_step_extended(ad);
  std::printf("  AUC: thresholded %.4f | lasso %.4f | adaptive %.4f\n", a_tl, a_la, a_ad);
  report(10, "thresholded-lasso ROC area >= ordinary lasso", a_tl >= a_la);
  report(10, "thresholded-lasso ROC area >= adaptive lasso", a_tl >= a_ad);
}
