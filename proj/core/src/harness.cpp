#include "thlx/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "thlx/core_model.hpp"
#include "thlx/diagnostics.hpp"
#include "thlx/estimators.hpp"
#include "thlx/io.hpp"
#include "thlx/version.hpp"
#include "json.hpp"

namespace thlx {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
  int n = 0;
};

MeanStd summarize(const std::vector<double>& vals) {
  MeanStd m;
  m.n = static_cast<int>(vals.size());
  if (m.n == 0) return m;
  double sum = 0.0;
  for (const double v : vals) sum += v;
  m.mean = sum / m.n;
  if (m.n > 1) {
    double ss = 0.0;
    for (const double v : vals) ss += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(ss / (m.n - 1));
  }
  return m;
}

int worker_count(int reps) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("THLX_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) hw = std::min(hw, cap);
  }
  return std::max(1, std::min(hw, reps));
}

// Repetitions own disjoint RNG streams and write into their own slots, so
// the outcome does not depend on how work lands on threads.
void parallel_reps(int reps, const std::function<void(int)>& work) {
  const int workers = worker_count(reps);
  if (workers == 1) {
    for (int r = 0; r < reps; ++r) work(r);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::mutex err_mutex;
  std::exception_ptr first_error;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const int r = next.fetch_add(1);
        if (r >= reps) break;
        try {
          work(r);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

constexpr std::uint64_t kPhaseFixedDesign = 1;
constexpr std::uint64_t kPhaseFixedBeta = 2;
constexpr std::uint64_t kPhaseRepDesign = 3;
constexpr std::uint64_t kPhaseRepBeta = 4;
constexpr std::uint64_t kPhaseRepNoise = 5;

std::uint64_t stream_id(std::uint64_t block, std::uint64_t phase, std::uint64_t rep) {
  return (block << 40) ^ (phase << 32) ^ rep;
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::error_curves: return "error_curves";
    case ExperimentKind::model_size_vs_threshold: return "model_size_vs_threshold";
    case ExperimentKind::refit_l2_vs_threshold: return "refit_l2_vs_threshold";
    case ExperimentKind::type12_curves: return "type12_curves";
    case ExperimentKind::rho2_study: return "rho2_study";
    case ExperimentKind::success_prob: return "success_prob";
    case ExperimentKind::roc_compare: return "roc_compare";
    case ExperimentKind::diagnose: return "diagnose";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (const auto k :
       {ExperimentKind::error_curves, ExperimentKind::model_size_vs_threshold,
        ExperimentKind::refit_l2_vs_threshold, ExperimentKind::type12_curves,
        ExperimentKind::rho2_study, ExperimentKind::success_prob,
        ExperimentKind::roc_compare, ExperimentKind::diagnose}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown experiment kind: " + s);
}

std::string to_string(SigmaRule r) {
  switch (r) {
    case SigmaRule::fixed: return "fixed";
    case SigmaRule::sqrt_s_over_3: return "sqrt_s_over_3";
    case SigmaRule::sqrt_s: return "sqrt_s";
  }
  return "?";
}

SigmaRule sigma_rule_from_string(const std::string& s) {
  for (const auto r : {SigmaRule::fixed, SigmaRule::sqrt_s_over_3, SigmaRule::sqrt_s}) {
    if (to_string(r) == s) return r;
  }
  throw std::invalid_argument("unknown sigma rule: " + s);
}

std::string to_string(BetaKind k) {
  switch (k) {
    case BetaKind::tiger: return "tiger";
    case BetaKind::spiked: return "spiked";
    case BetaKind::constant: return "constant";
  }
  return "?";
}

BetaKind beta_kind_from_string(const std::string& s) {
  for (const auto k : {BetaKind::tiger, BetaKind::spiked, BetaKind::constant}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown beta kind: " + s);
}

bool ExperimentConfig::design_is_fixed() const {
  if (fixed_design) return *fixed_design;
  switch (kind) {
    case ExperimentKind::type12_curves:
    case ExperimentKind::rho2_study:
    case ExperimentKind::success_prob:
    case ExperimentKind::roc_compare:
      return true;  // one ensemble, repetitions redraw beta and noise
    default:
      return false;  // redraw the design inside the repetition loop
  }
}

double ExperimentConfig::resolve_sigma(Index s) const {
  switch (sigma_rule) {
    case SigmaRule::fixed: return sigma;
    case SigmaRule::sqrt_s_over_3: return std::sqrt(static_cast<double>(s)) / 3.0;
    case SigmaRule::sqrt_s: return std::sqrt(static_cast<double>(s));
  }
  return sigma;
}

void ExperimentConfig::validate() const {
  design.validate();
  if (reps < 1) throw std::invalid_argument("ExperimentConfig: reps >= 1");
  if (sigma_rule == SigmaRule::fixed && !(sigma > 0.0)) {
    throw std::invalid_argument("ExperimentConfig: sigma must be > 0");
  }
  const bool sweeps_threshold = kind == ExperimentKind::type12_curves ||
                                kind == ExperimentKind::model_size_vs_threshold ||
                                kind == ExperimentKind::refit_l2_vs_threshold ||
                                kind == ExperimentKind::roc_compare;
  if (penalty_factors.empty() && kind != ExperimentKind::diagnose) {
    throw std::invalid_argument("ExperimentConfig: penalty_factors must be nonempty");
  }
  if (sweeps_threshold && threshold_factors.empty()) {
    throw std::invalid_argument("ExperimentConfig: threshold_factors must be nonempty");
  }
  if ((kind == ExperimentKind::rho2_study || kind == ExperimentKind::success_prob) &&
      s_list.empty()) {
    throw std::invalid_argument("ExperimentConfig: s_list must be nonempty");
  }
  if (kind == ExperimentKind::success_prob && n_list.empty()) {
    throw std::invalid_argument("ExperimentConfig: n_list must be nonempty");
  }
  if ((kind == ExperimentKind::rho2_study || kind == ExperimentKind::success_prob ||
       kind == ExperimentKind::type12_curves || kind == ExperimentKind::refit_l2_vs_threshold) &&
      threshold_factors.empty()) {
    throw std::invalid_argument("ExperimentConfig: threshold_factors must be nonempty");
  }
}

std::string ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["kind"] = thlx::to_string(kind);
  j["design"] = {{"kind", thlx::to_string(design.kind)},
                 {"n", design.n},
                 {"p", design.p},
                 {"gamma", design.gamma},
                 {"normalize", design.normalize}};
  j["beta"] = {{"kind", thlx::to_string(beta.kind)},
               {"s", beta.s},
               {"a0", beta.a0},
               {"s0", beta.s0},
               {"c_a", beta.c_a},
               {"c_m", beta.c_m},
               {"layout", beta.layout == SupportLayout::permuted ? "permuted" : "leading_blocks"},
               {"magnitude", beta.magnitude}};
  j["sigma_rule"] = thlx::to_string(sigma_rule);
  j["sigma"] = sigma;
  j["penalty_factors"] = penalty_factors;
  j["threshold_factors"] = threshold_factors;
  j["s_list"] = s_list;
  j["n_list"] = n_list;
  j["reps"] = reps;
  j["master_seed"] = master_seed;
  j["out_dir"] = out_dir;
  j["log_base"] = thlx::to_string(log_base);
  if (fixed_design) j["fixed_design"] = *fixed_design;
  j["full_scale"] = full_scale;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ExperimentConfig c;
  c.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
  const auto& d = j.at("design");
  c.design.kind = ensemble_kind_from_string(d.at("kind").get<std::string>());
  c.design.n = d.at("n").get<Index>();
  c.design.p = d.at("p").get<Index>();
  c.design.gamma = d.value("gamma", 0.0);
  c.design.normalize = d.value("normalize", true);
  if (j.contains("beta")) {
    const auto& b = j.at("beta");
    c.beta.kind = beta_kind_from_string(b.at("kind").get<std::string>());
    c.beta.s = b.value("s", Index{0});
    c.beta.a0 = b.value("a0", Index{0});
    c.beta.s0 = b.value("s0", Index{0});
    c.beta.c_a = b.value("c_a", 0.0);
    c.beta.c_m = b.value("c_m", 1.0);
    c.beta.layout = b.value("layout", std::string("permuted")) == "leading_blocks"
                        ? SupportLayout::leading_blocks
                        : SupportLayout::permuted;
    c.beta.magnitude = b.value("magnitude", 0.9);
  }
  c.sigma_rule = sigma_rule_from_string(j.value("sigma_rule", std::string("fixed")));
  c.sigma = j.value("sigma", 1.0);
  c.penalty_factors = j.value("penalty_factors", std::vector<double>{0.69});
  c.threshold_factors = j.value("threshold_factors", std::vector<double>{});
  c.s_list = j.value("s_list", std::vector<Index>{});
  c.n_list = j.value("n_list", std::vector<Index>{});
  c.reps = j.value("reps", 100);
  c.master_seed = j.value("master_seed", std::uint64_t{0});
  c.out_dir = j.value("out_dir", std::string("thlx-run"));
  c.log_base = log_base_from_string(j.value("log_base", std::string("natural")));
  if (j.contains("fixed_design")) c.fixed_design = j.at("fixed_design").get<bool>();
  c.full_scale = j.value("full_scale", false);
  return c;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(to_json()); }

std::string run_record_csv_header() {
  return "seed,estimator,lambda_factor,t0_factor,tp,fp,tn,fn,fpr,tpr,rho2,l2_err,"
         "l1_err_h,l1_err_delta";
}

std::string to_csv_row(const RunRecord& r) {
  std::ostringstream os;
  os << r.seed << "," << r.estimator << "," << fmt(r.lambda_factor) << ","
     << fmt(r.t0_factor) << "," << r.counts.tp << "," << r.counts.fp << ","
     << r.counts.tn << "," << r.counts.fn << "," << fmt(r.rate.fpr) << ","
     << fmt(r.rate.tpr) << "," << fmt(r.rho2) << "," << fmt(r.l2_err) << ","
     << fmt(r.l1_err_h) << "," << fmt(r.l1_err_delta);
  return os.str();
}

namespace {

struct RunContext {
  const ExperimentConfig& cfg;
  RandomSource source;
  double lambda = 0.0;        // base scale in the configured log base
  std::uint64_t config_hash = 0;

  explicit RunContext(const ExperimentConfig& c)
      : cfg(c), source(c.master_seed), config_hash(c.hash()) {}
};

Signal make_beta(const ExperimentConfig& cfg, Index s, double lambda_sigma,
                 RngStream& rng) {
  switch (cfg.beta.kind) {
    case BetaKind::tiger: {
      const auto spec = TigerBetaSpec::from_counts(cfg.design.p, cfg.beta.a0, cfg.beta.s0,
                                                   s, cfg.beta.c_a, cfg.beta.c_m,
                                                   lambda_sigma, cfg.beta.layout);
      return gen_beta_tiger(spec, rng);
    }
    case BetaKind::spiked:
      return gen_beta_spiked(cfg.design.p, s, rng);
    case BetaKind::constant:
      return gen_beta_const(cfg.design.p, s, cfg.beta.magnitude, rng);
  }
  throw std::logic_error("make_beta: unreachable");
}

RunRecord base_record(const RunContext& ctx, int rep, std::string estimator,
                      double lambda_factor, double t0_factor) {
  RunRecord r;
  r.config_hash = ctx.config_hash;
  r.seed = ctx.cfg.master_seed;
  r.rep = rep;
  r.estimator = std::move(estimator);
  r.lambda_factor = lambda_factor;
  r.t0_factor = t0_factor;
  return r;
}

void fill_metrics(RunRecord& r, const SelectionSet& sel, const Signal& beta_hat,
                  const Signal& beta_init, const Signal& beta_true, double sigma,
                  Index n, double lambda_sigma, Reference reference) {
  r.counts = confusion(sel, beta_true, reference,
                       reference == Reference::top_T0
                           ? std::optional<double>(lambda_sigma)
                           : std::nullopt);
  r.rate = rates(r.counts);
  r.rho2 = rho_squared(beta_hat, beta_true, sigma, n);
  const auto dec = error_decomposition(beta_init, beta_true, lambda_sigma);
  r.l2_err = (beta_hat.coef - beta_true.coef).norm();
  r.l1_err_h = dec.h_l1;
  r.l1_err_delta = dec.delta_l1;
}

struct SummaryBuilder {
  std::ostringstream os;
  explicit SummaryBuilder(const std::string& header) { os << header << "\n"; }
  template <typename... T>
  void row(const T&... cells) {
    bool first = true;
    ((os << (first ? "" : ",") << cells, first = false), ...);
    os << "\n";
  }
  std::string str() const { return os.str(); }
};

// --- kind implementations -------------------------------------------------

struct KindResult {
  std::vector<RunRecord> records;
  std::string summary;
};

// Shared per-repetition pipeline for the kinds that sweep thresholds over a
// single Lasso fit (type12, model size, refit l2, roc: thresholded arm).
struct ThresholdSweepRow {
  double t0_factor = 0.0;
  RunRecord record;
};

KindResult run_type12(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  const Index s = cfg.beta.s;
  const double sigma = cfg.resolve_sigma(s);
  const double ls = ctx.lambda * sigma;
  const double fp_factor = cfg.penalty_factors.front();

  auto design_rng = ctx.source.stream(stream_id(0, kPhaseFixedDesign, 0));
  const DesignMatrix X = gen_design(cfg.design, design_rng);

  const int reps = cfg.reps;
  const std::size_t sweep = cfg.threshold_factors.size();
  std::vector<std::vector<RunRecord>> per_rep(static_cast<std::size_t>(reps));

  parallel_reps(reps, [&](int rep) {
    auto beta_rng = ctx.source.stream(stream_id(0, kPhaseRepBeta, rep));
    auto noise_rng = ctx.source.stream(stream_id(0, kPhaseRepNoise, rep));
    const Signal beta = make_beta(cfg, s, ls, beta_rng);
    const Vector Y = gen_observation(X, beta, NoiseSpec(sigma), noise_rng);

    std::vector<RunRecord> rows;
    rows.reserve(sweep);
    FitResult init;
    bool init_ok = true;
    std::string init_err;
    try {
      init = fit_lasso(X, Y, fp_factor * ls);
    } catch (const std::exception& e) {
      init_ok = false;
      init_err = e.what();
    }
    Index previous_model = std::numeric_limits<Index>::max();
    double previous_ft = -1.0;
    for (const double ft : cfg.threshold_factors) {
      RunRecord r = base_record(ctx, rep, "thresholded_lasso", fp_factor, ft);
      if (!init_ok) {
        r.failed = true;
        r.error = init_err;
        rows.push_back(std::move(r));
        continue;
      }
      try {
        const auto sel = threshold_select(init.beta, ft * ls, SelectionSource::lasso);
        if (ft >= previous_ft && sel.size() > previous_model) {
          throw std::logic_error("threshold sweep: model size increased with t0");
        }
        previous_model = sel.size();
        previous_ft = ft;
        const Signal refit = ols_refit(X, Y, sel);
        fill_metrics(r, sel, refit, init.beta, beta, sigma, X.n(), ls,
                     Reference::support_S);
      } catch (const std::exception& e) {
        r.failed = true;
        r.error = e.what();
      }
      rows.push_back(std::move(r));
    }
    per_rep[static_cast<std::size_t>(rep)] = std::move(rows);
  });

  KindResult out;
  for (const auto& rows : per_rep) {
    out.records.insert(out.records.end(), rows.begin(), rows.end());
  }

  SummaryBuilder sb("t0_factor,fp_mean,fp_std,fn_mean,fn_std,rho2_mean,failures");
  for (std::size_t i = 0; i < sweep; ++i) {
    std::vector<double> fps, fns, rhos;
    int failures = 0;
    for (int rep = 0; rep < reps; ++rep) {
      const auto& r = per_rep[static_cast<std::size_t>(rep)][i];
      if (r.failed) {
        ++failures;
        continue;
      }
      fps.push_back(static_cast<double>(r.counts.fp));
      fns.push_back(static_cast<double>(r.counts.fn));
      rhos.push_back(r.rho2);
    }
    const auto fp = summarize(fps), fn = summarize(fns), rho = summarize(rhos);
    sb.row(fmt(cfg.threshold_factors[i]), fmt(fp.mean), fmt(fp.std), fmt(fn.mean),
           fmt(fn.std), fmt(rho.mean), failures);
  }
  out.summary = sb.str();
  return out;
}

KindResult run_model_size(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  const Index s = cfg.beta.s;
  const double sigma = cfg.resolve_sigma(s);
  const double ls = ctx.lambda * sigma;

  auto beta_rng = ctx.source.stream(stream_id(0, kPhaseFixedBeta, 0));
  const Signal beta = make_beta(cfg, s, ls, beta_rng);

  Matrix chol;
  if (cfg.design.kind == EnsembleKind::toeplitz) {
    chol = toeplitz_chol_upper(cfg.design.p, cfg.design.gamma);
  }
  const bool fixed = cfg.design_is_fixed();
  DesignMatrix fixed_X;
  if (fixed) {
    auto rng = ctx.source.stream(stream_id(0, kPhaseFixedDesign, 0));
    fixed_X = cfg.design.kind == EnsembleKind::toeplitz
                  ? gen_design_toeplitz(cfg.design.n, chol, cfg.design.normalize, rng)
                  : gen_design(cfg.design, rng);
  }

  const int reps = cfg.reps;
  const std::size_t sweep = cfg.threshold_factors.size();
  const std::size_t n_fp = cfg.penalty_factors.size();
  std::vector<std::vector<RunRecord>> per_rep(static_cast<std::size_t>(reps));

  parallel_reps(reps, [&](int rep) {
    auto design_rng = ctx.source.stream(stream_id(0, kPhaseRepDesign, rep));
    auto noise_rng = ctx.source.stream(stream_id(0, kPhaseRepNoise, rep));
    DesignMatrix X;
    if (fixed) {
      X = fixed_X;
    } else if (cfg.design.kind == EnsembleKind::toeplitz) {
      X = gen_design_toeplitz(cfg.design.n, chol, cfg.design.normalize, design_rng);
    } else {
      X = gen_design(cfg.design, design_rng);
    }
    const Vector Y = gen_observation(X, beta, NoiseSpec(sigma), noise_rng);

    std::vector<RunRecord> rows;
    rows.reserve(sweep * n_fp);
    for (const double fp_factor : cfg.penalty_factors) {
      FitResult init;
      bool init_ok = true;
      std::string init_err;
      try {
        init = fit_lasso(X, Y, fp_factor * ls);
      } catch (const std::exception& e) {
        init_ok = false;
        init_err = e.what();
      }
      for (const double ft : cfg.threshold_factors) {
        RunRecord r = base_record(ctx, rep, "thresholded_lasso", fp_factor, ft);
        if (!init_ok) {
          r.failed = true;
          r.error = init_err;
          rows.push_back(std::move(r));
          continue;
        }
        try {
          const auto sel = threshold_select(init.beta, ft * ls, SelectionSource::lasso);
          const Signal refit = ols_refit(X, Y, sel);
          fill_metrics(r, sel, refit, init.beta, beta, sigma, X.n(), ls,
                       Reference::top_T0);
          if (sel.size() != r.counts.tp + r.counts.fp) {
            throw std::logic_error("model size != TP + FP");
          }
        } catch (const std::exception& e) {
          r.failed = true;
          r.error = e.what();
        }
        rows.push_back(std::move(r));
      }
    }
    per_rep[static_cast<std::size_t>(rep)] = std::move(rows);
  });

  KindResult out;
  for (const auto& rows : per_rep) {
    out.records.insert(out.records.end(), rows.begin(), rows.end());
  }

  SummaryBuilder sb(
      "f_p,t0_factor,model_size_mean,model_size_std,tp_mean,tp_std,fp_mean,fp_std,"
      "failures");
  std::size_t idx = 0;
  for (std::size_t a = 0; a < n_fp; ++a) {
    for (std::size_t i = 0; i < sweep; ++i, ++idx) {
      std::vector<double> sizes, tps, fps;
      int failures = 0;
      for (int rep = 0; rep < reps; ++rep) {
        const auto& r = per_rep[static_cast<std::size_t>(rep)][idx];
        if (r.failed) {
          ++failures;
          continue;
        }
        sizes.push_back(static_cast<double>(r.counts.tp + r.counts.fp));
        tps.push_back(static_cast<double>(r.counts.tp));
        fps.push_back(static_cast<double>(r.counts.fp));
      }
      const auto sz = summarize(sizes), tp = summarize(tps), fp = summarize(fps);
      sb.row(fmt(cfg.penalty_factors[a]), fmt(cfg.threshold_factors[i]), fmt(sz.mean),
             fmt(sz.std), fmt(tp.mean), fmt(tp.std), fmt(fp.mean), fmt(fp.std),
             failures);
    }
  }
  out.summary = sb.str();
  return out;
}

KindResult run_refit_l2(RunContext& ctx) {
  // Same sweep machinery as model size, different summary columns.
  const auto& cfg = ctx.cfg;
  const Index s = cfg.beta.s;
  const double sigma = cfg.resolve_sigma(s);
  const double ls = ctx.lambda * sigma;

  auto beta_rng = ctx.source.stream(stream_id(0, kPhaseFixedBeta, 0));
  const Signal beta = make_beta(cfg, s, ls, beta_rng);

  Matrix chol;
  if (cfg.design.kind == EnsembleKind::toeplitz) {
    chol = toeplitz_chol_upper(cfg.design.p, cfg.design.gamma);
  }

  const int reps = cfg.reps;
  const std::size_t sweep = cfg.threshold_factors.size();
  const std::size_t n_fp = cfg.penalty_factors.size();
  std::vector<std::vector<RunRecord>> per_rep(static_cast<std::size_t>(reps));
  std::vector<std::vector<double>> init_l2(static_cast<std::size_t>(reps));

  parallel_reps(reps, [&](int rep) {
    auto design_rng = ctx.source.stream(stream_id(0, kPhaseRepDesign, rep));
    auto noise_rng = ctx.source.stream(stream_id(0, kPhaseRepNoise, rep));
    DesignMatrix X = cfg.design.kind == EnsembleKind::toeplitz
                         ? gen_design_toeplitz(cfg.design.n, chol, cfg.design.normalize,
                                               design_rng)
                         : gen_design(cfg.design, design_rng);
    const Vector Y = gen_observation(X, beta, NoiseSpec(sigma), noise_rng);

    std::vector<RunRecord> rows;
    std::vector<double> inits;
    for (const double fp_factor : cfg.penalty_factors) {
      FitResult init = fit_lasso(X, Y, fp_factor * ls);
      inits.push_back((init.beta.coef - beta.coef).norm());
      for (const double ft : cfg.threshold_factors) {
        RunRecord r = base_record(ctx, rep, "thresholded_lasso", fp_factor, ft);
        try {
          const auto sel = threshold_select(init.beta, ft * ls, SelectionSource::lasso);
          const Signal refit = ols_refit(X, Y, sel);
          fill_metrics(r, sel, refit, init.beta, beta, sigma, X.n(), ls,
                       Reference::top_T0);
        } catch (const std::exception& e) {
          r.failed = true;
          r.error = e.what();
        }
        rows.push_back(std::move(r));
      }
    }
    per_rep[static_cast<std::size_t>(rep)] = std::move(rows);
    init_l2[static_cast<std::size_t>(rep)] = std::move(inits);
  });

  KindResult out;
  for (const auto& rows : per_rep) {
    out.records.insert(out.records.end(), rows.begin(), rows.end());
  }

  SummaryBuilder sb("f_p,t0_factor,refit_l2_mean,refit_l2_std,lasso_l2_mean,failures");
  std::size_t idx = 0;
  for (std::size_t a = 0; a < n_fp; ++a) {
    std::vector<double> lasso_l2;
    for (int rep = 0; rep < reps; ++rep) {
      lasso_l2.push_back(init_l2[static_cast<std::size_t>(rep)][a]);
    }
    const auto il = summarize(lasso_l2);
    for (std::size_t i = 0; i < sweep; ++i, ++idx) {
      std::vector<double> l2s;
      int failures = 0;
      for (int rep = 0; rep < reps; ++rep) {
        const auto& r = per_rep[static_cast<std::size_t>(rep)][idx];
        if (r.failed) {
          ++failures;
          continue;
        }
        l2s.push_back(r.l2_err);
      }
      const auto l2 = summarize(l2s);
      sb.row(fmt(cfg.penalty_factors[a]), fmt(cfg.threshold_factors[i]), fmt(l2.mean),
             fmt(l2.std), fmt(il.mean), failures);
    }
  }
  out.summary = sb.str();
  return out;
}

KindResult run_error_curves(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  const Index s = cfg.beta.s;
  const double sigma = cfg.resolve_sigma(s);
  const double ls = ctx.lambda * sigma;

  auto beta_rng = ctx.source.stream(stream_id(0, kPhaseFixedBeta, 0));
  const Signal beta = make_beta(cfg, s, ls, beta_rng);

  Matrix chol;
  if (cfg.design.kind == EnsembleKind::toeplitz) {
    chol = toeplitz_chol_upper(cfg.design.p, cfg.design.gamma);
  }

  const int reps = cfg.reps;
  const std::size_t n_fp = cfg.penalty_factors.size();
  std::vector<std::vector<RunRecord>> per_rep(static_cast<std::size_t>(reps));
  struct Norms {
    double h_t0_l1, h_t0c_l1, h_l1, h_t0_l2, delta_l2, delta_l1;
  };
  std::vector<std::vector<Norms>> per_rep_norms(static_cast<std::size_t>(reps));

  parallel_reps(reps, [&](int rep) {
    auto design_rng = ctx.source.stream(stream_id(0, kPhaseRepDesign, rep));
    auto noise_rng = ctx.source.stream(stream_id(0, kPhaseRepNoise, rep));
    DesignMatrix X = cfg.design.kind == EnsembleKind::toeplitz
                         ? gen_design_toeplitz(cfg.design.n, chol, cfg.design.normalize,
                                               design_rng)
                         : gen_design(cfg.design, design_rng);
    const Vector Y = gen_observation(X, beta, NoiseSpec(sigma), noise_rng);

    std::vector<RunRecord> rows;
    std::vector<Norms> norms;
    for (const double fp_factor : cfg.penalty_factors) {
      RunRecord r = base_record(ctx, rep, "lasso", fp_factor, 0.0);
      try {
        const FitResult init = fit_lasso(X, Y, fp_factor * ls);
        const auto dec = error_decomposition(init.beta, beta, ls);
        const auto sel = threshold_select(init.beta, 0.0, SelectionSource::lasso);
        r.counts = confusion(sel, beta, Reference::top_T0, ls);
        r.rate = rates(r.counts);
        r.rho2 = rho_squared(init.beta, beta, sigma, X.n());
        r.l2_err = dec.delta_l2;
        r.l1_err_h = dec.h_l1;
        r.l1_err_delta = dec.delta_l1;
        norms.push_back({dec.h_t0_l1, dec.h_t0c_l1, dec.h_l1, dec.h_t0_l2, dec.delta_l2,
                         dec.delta_l1});
      } catch (const std::exception& e) {
        r.failed = true;
        r.error = e.what();
        norms.push_back({0, 0, 0, 0, 0, 0});
      }
      rows.push_back(std::move(r));
    }
    per_rep[static_cast<std::size_t>(rep)] = std::move(rows);
    per_rep_norms[static_cast<std::size_t>(rep)] = std::move(norms);
  });

  KindResult out;
  for (const auto& rows : per_rep) {
    out.records.insert(out.records.end(), rows.begin(), rows.end());
  }

  SummaryBuilder sb(
      "f_p,h_t0_l1_mean,h_t0c_l1_mean,h_l1_mean,h_t0_l2_mean,delta_l2_mean,"
      "delta_l1_mean,failures");
  for (std::size_t a = 0; a < n_fp; ++a) {
    std::vector<double> v0, v1, v2, v3, v4, v5;
    int failures = 0;
    for (int rep = 0; rep < reps; ++rep) {
      if (per_rep[static_cast<std::size_t>(rep)][a].failed) {
        ++failures;
        continue;
      }
      const auto& n = per_rep_norms[static_cast<std::size_t>(rep)][a];
      v0.push_back(n.h_t0_l1);
      v1.push_back(n.h_t0c_l1);
      v2.push_back(n.h_l1);
      v3.push_back(n.h_t0_l2);
      v4.push_back(n.delta_l2);
      v5.push_back(n.delta_l1);
    }
    sb.row(fmt(cfg.penalty_factors[a]), fmt(summarize(v0).mean), fmt(summarize(v1).mean),
           fmt(summarize(v2).mean), fmt(summarize(v3).mean), fmt(summarize(v4).mean),
           fmt(summarize(v5).mean), failures);
  }
  out.summary = sb.str();
  return out;
}

KindResult run_rho2_study(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  const double fp_factor = cfg.penalty_factors.front();
  const double ft_factor = cfg.threshold_factors.front();
  const int reps = cfg.reps;

  KindResult out;
  SummaryBuilder sb(
      "s,sigma,snr_mean,rho2_thresholded_mean,rho2_thresholded_std,"
      "rho2_lasso_mean,rho2_lasso_std,failures");

  for (std::size_t block = 0; block < cfg.s_list.size(); ++block) {
    const Index s = cfg.s_list[block];
    const double sigma = cfg.resolve_sigma(s);
    const double ls = ctx.lambda * sigma;

    auto design_rng = ctx.source.stream(stream_id(block, kPhaseFixedDesign, 0));
    const DesignMatrix X = gen_design(cfg.design, design_rng);

    std::vector<std::array<RunRecord, 2>> per_rep(static_cast<std::size_t>(reps));
    std::vector<double> snrs(static_cast<std::size_t>(reps), 0.0);

    parallel_reps(reps, [&](int rep) {
      auto beta_rng = ctx.source.stream(stream_id(block, kPhaseRepBeta, rep));
      auto noise_rng = ctx.source.stream(stream_id(block, kPhaseRepNoise, rep));
      const Signal beta = make_beta(cfg, s, ls, beta_rng);
      const Vector Y = gen_observation(X, beta, NoiseSpec(sigma), noise_rng);
      snrs[static_cast<std::size_t>(rep)] =
          beta.coef.squaredNorm() / (sigma * sigma);

      RunRecord thresh = base_record(ctx, rep, "thresholded_lasso", fp_factor, ft_factor);
      RunRecord lasso = base_record(ctx, rep, "lasso_best_l2", 0.0, 0.0);
      try {
        const auto est = thresholded_lasso(X, Y, fp_factor * ls, ft_factor * ls);
        fill_metrics(thresh, est.selection, est.beta_hat, est.beta_init, beta, sigma,
                     X.n(), ls, Reference::support_S);
      } catch (const std::exception& e) {
        thresh.failed = true;
        thresh.error = e.what();
      }
      try {
        const auto grid = default_lambda_grid(X, Y);
        const auto path = lasso_path(X, Y, grid);
        const FitResult& best = lasso_best_l2(path, beta);
        const auto sel = threshold_select(best.beta, 0.0, SelectionSource::lasso);
        fill_metrics(lasso, sel, best.beta, best.beta, beta, sigma, X.n(), ls,
                     Reference::support_S);
        lasso.lambda_factor = best.lambda_n / ls;
      } catch (const std::exception& e) {
        lasso.failed = true;
        lasso.error = e.what();
      }
      per_rep[static_cast<std::size_t>(rep)] = {std::move(thresh), std::move(lasso)};
    });

    std::vector<double> rt, rl;
    int failures = 0;
    for (int rep = 0; rep < reps; ++rep) {
      const auto& pair = per_rep[static_cast<std::size_t>(rep)];
      for (const auto& r : pair) out.records.push_back(r);
      if (pair[0].failed || pair[1].failed) {
        ++failures;
        continue;
      }
      rt.push_back(pair[0].rho2);
      rl.push_back(pair[1].rho2);
    }
    const auto mt = summarize(rt), ml = summarize(rl), snr = summarize(snrs);
    sb.row(s, fmt(sigma), fmt(snr.mean), fmt(mt.mean), fmt(mt.std), fmt(ml.mean),
           fmt(ml.std), failures);
  }
  out.summary = sb.str();
  return out;
}

KindResult run_success_prob(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  const double fp_factor = cfg.penalty_factors.front();
  const double ft_factor = cfg.threshold_factors.front();
  const int reps = cfg.reps;

  KindResult out;
  SummaryBuilder sb("s,n,success_thresholded,success_lasso_best,failures");

  std::size_t block = 0;
  for (const Index s : cfg.s_list) {
    for (const Index n : cfg.n_list) {
      ++block;
      const double sigma = cfg.resolve_sigma(s);
      EnsembleSpec design = cfg.design;
      design.n = n;
      const double lambda = lambda_base(design.p, n, cfg.log_base);
      const double ls = lambda * sigma;

      auto design_rng = ctx.source.stream(stream_id(block, kPhaseFixedDesign, 0));
      const DesignMatrix X = gen_design(design, design_rng);

      std::vector<std::array<RunRecord, 2>> per_rep(static_cast<std::size_t>(reps));
      std::vector<std::array<int, 2>> success(static_cast<std::size_t>(reps), {0, 0});

      parallel_reps(reps, [&](int rep) {
        auto beta_rng = ctx.source.stream(stream_id(block, kPhaseRepBeta, rep));
        auto noise_rng = ctx.source.stream(stream_id(block, kPhaseRepNoise, rep));
        const Signal beta = make_beta(cfg, s, ls, beta_rng);
        const Vector Y = gen_observation(X, beta, NoiseSpec(sigma), noise_rng);

        RunRecord thresh = base_record(ctx, rep, "thresholded_lasso", fp_factor, ft_factor);
        RunRecord lasso = base_record(ctx, rep, "lasso_best_support", 0.0, 0.0);
        try {
          const auto est = thresholded_lasso(X, Y, fp_factor * ls, ft_factor * ls);
          fill_metrics(thresh, est.selection, est.beta_hat, est.beta_init, beta, sigma,
                       X.n(), ls, Reference::support_S);
          success[static_cast<std::size_t>(rep)][0] =
              exact_sign_recovery(est.beta_hat, beta) ? 1 : 0;
        } catch (const std::exception& e) {
          thresh.failed = true;
          thresh.error = e.what();
        }
        try {
          const auto grid = default_lambda_grid(X, Y);
          const auto path = lasso_path(X, Y, grid);
          const FitResult& best = lasso_best_support(path, beta);
          const auto sel = threshold_select(best.beta, 0.0, SelectionSource::lasso);
          fill_metrics(lasso, sel, best.beta, best.beta, beta, sigma, X.n(), ls,
                       Reference::support_S);
          success[static_cast<std::size_t>(rep)][1] =
              exact_sign_recovery(best.beta, beta) ? 1 : 0;
        } catch (const std::exception& e) {
          lasso.failed = true;
          lasso.error = e.what();
        }
        per_rep[static_cast<std::size_t>(rep)] = {std::move(thresh), std::move(lasso)};
      });

      int ok_t = 0, ok_l = 0, failures = 0;
      int n_t = 0, n_l = 0;
      for (int rep = 0; rep < reps; ++rep) {
        const auto& pair = per_rep[static_cast<std::size_t>(rep)];
        for (const auto& r : pair) out.records.push_back(r);
        if (pair[0].failed || pair[1].failed) ++failures;
        if (!pair[0].failed) {
          ok_t += success[static_cast<std::size_t>(rep)][0];
          ++n_t;
        }
        if (!pair[1].failed) {
          ok_l += success[static_cast<std::size_t>(rep)][1];
          ++n_l;
        }
      }
      sb.row(s, n, fmt(n_t ? double(ok_t) / n_t : 0.0), fmt(n_l ? double(ok_l) / n_l : 0.0),
             failures);
    }
  }
  out.summary = sb.str();
  return out;
}

KindResult run_roc(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  // Desk-scale ROC runs at half size; --full restores the 512/330/64 setting.
  EnsembleSpec design = cfg.design;
  Index s = cfg.beta.s;
  double lambda = ctx.lambda;
  if (cfg.full_scale) {
    design.n *= 2;
    design.p *= 2;
    s *= 2;
    lambda = lambda_base(design.p, design.n, cfg.log_base);
  }
  const double sigma = cfg.resolve_sigma(s);
  const double ls = lambda * sigma;
  const double fp_factor = cfg.penalty_factors.front();
  const int reps = cfg.reps;
  const int path_points = 50;

  auto design_rng = ctx.source.stream(stream_id(0, kPhaseFixedDesign, 0));
  const DesignMatrix X = gen_design(design, design_rng);

  const std::size_t sweep = cfg.threshold_factors.size();
  struct RepOut {
    std::vector<RunRecord> rows;
    std::vector<std::pair<double, double>> lasso_points;     // (fpr, tpr) per path index
    std::vector<std::pair<double, double>> adaptive_points;  // per second-stage index
    bool path_ok = true;
  };
  std::vector<RepOut> per_rep(static_cast<std::size_t>(reps));

  parallel_reps(reps, [&](int rep) {
    auto beta_rng = ctx.source.stream(stream_id(0, kPhaseRepBeta, rep));
    auto noise_rng = ctx.source.stream(stream_id(0, kPhaseRepNoise, rep));
    const Signal beta = make_beta(cfg, s, ls, beta_rng);
    const Vector Y = gen_observation(X, beta, NoiseSpec(sigma), noise_rng);
    RepOut rout;

    // Thresholded Lasso arm.
    FitResult init;
    bool init_ok = true;
    std::string init_err;
    try {
      init = fit_lasso(X, Y, fp_factor * ls);
    } catch (const std::exception& e) {
      init_ok = false;
      init_err = e.what();
    }
    for (const double ft : cfg.threshold_factors) {
      RunRecord r = base_record(ctx, rep, "thresholded_lasso", fp_factor, ft);
      if (!init_ok) {
        r.failed = true;
        r.error = init_err;
      } else {
        try {
          const auto sel = threshold_select(init.beta, ft * ls, SelectionSource::lasso);
          const Signal refit = ols_refit(X, Y, sel);
          fill_metrics(r, sel, refit, init.beta, beta, sigma, X.n(), ls,
                       Reference::support_S);
        } catch (const std::exception& e) {
          r.failed = true;
          r.error = e.what();
        }
      }
      rout.rows.push_back(std::move(r));
    }

    // Ordinary Lasso arm: rates along the path.
    try {
      const auto grid = default_lambda_grid(X, Y, path_points);
      const auto path = lasso_path(X, Y, grid);
      for (std::size_t i = 0; i < path.size(); ++i) {
        const auto sel = threshold_select(path[i].beta, 0.0, SelectionSource::lasso);
        const auto c = confusion(sel, beta, Reference::support_S);
        const auto rr = rates(c);
        rout.lasso_points.emplace_back(rr.fpr, rr.tpr);
      }
      // Adaptive Lasso arm, seeded with the same initial fit the thresholded
      // estimator consumes, on a grid matched to the weighted problem.
      if (init_ok && !init.beta.support().empty()) {
        Vector w = Vector::Zero(X.p());
        for (const Index j : init.beta.support()) {
          w[j] = 1.0 / std::abs(init.beta.coef[j]);
        }
        const double top = lambda_max(X, Y, w);
        std::vector<double> grid2(static_cast<std::size_t>(path_points));
        for (int i = 0; i < path_points; ++i) {
          grid2[static_cast<std::size_t>(i)] =
              top * std::pow(0.01, double(i) / double(path_points - 1));
        }
        const auto second = fit_adaptive_lasso(X, Y, init.beta, grid2);
        for (const auto& fit : second) {
          const auto sel = threshold_select(fit.beta, 0.0, SelectionSource::lasso);
          const auto c = confusion(sel, beta, Reference::support_S);
          const auto rr = rates(c);
          rout.adaptive_points.emplace_back(rr.fpr, rr.tpr);
        }
      }
    } catch (const std::exception&) {
      rout.path_ok = false;
    }
    per_rep[static_cast<std::size_t>(rep)] = std::move(rout);
  });

  KindResult out;
  for (const auto& rout : per_rep) {
    out.records.insert(out.records.end(), rout.rows.begin(), rout.rows.end());
  }

  SummaryBuilder sb("estimator,sweep_param,fpr_mean,tpr_mean,reps_used");
  for (std::size_t i = 0; i < sweep; ++i) {
    std::vector<double> fprs, tprs;
    for (const auto& rout : per_rep) {
      const auto& r = rout.rows[i];
      if (r.failed) continue;
      fprs.push_back(r.rate.fpr);
      tprs.push_back(r.rate.tpr);
    }
    sb.row("thresholded_lasso", fmt(cfg.threshold_factors[i]), fmt(summarize(fprs).mean),
           fmt(summarize(tprs).mean), fprs.size());
  }
  auto emit_curve = [&](const char* name, auto member) {
    std::size_t max_len = 0;
    for (const auto& rout : per_rep) {
      if (rout.path_ok) max_len = std::max(max_len, (rout.*member).size());
    }
    for (std::size_t i = 0; i < max_len; ++i) {
      std::vector<double> fprs, tprs;
      for (const auto& rout : per_rep) {
        if (!rout.path_ok || i >= (rout.*member).size()) continue;
        fprs.push_back((rout.*member)[i].first);
        tprs.push_back((rout.*member)[i].second);
      }
      sb.row(name, static_cast<double>(i), fmt(summarize(fprs).mean),
             fmt(summarize(tprs).mean), fprs.size());
    }
  };
  emit_curve("lasso", &RepOut::lasso_points);
  emit_curve("adaptive_lasso", &RepOut::adaptive_points);
  out.summary = sb.str();
  return out;
}

KindResult run_diagnose_kind(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto design_rng = ctx.source.stream(stream_id(0, kPhaseFixedDesign, 0));
  const DesignMatrix X = gen_design(cfg.design, design_rng);

  DiagnoseRequest req;
  req.eig_orders = cfg.s_list.empty() ? std::vector<Index>{1, 2, 3} : cfg.s_list;
  if (!req.eig_orders.empty()) {
    const Index s0 = req.eig_orders.front();
    if (2 * s0 <= cfg.design.p) req.theta_pairs.push_back({s0, 2 * s0});
    req.re_params.push_back({s0, 3.0});
  }
  req.seed = cfg.master_seed;
  const auto report = diagnose(X, req);

  KindResult out;
  SummaryBuilder sb("m,lambda_min,lambda_max,delta,exact");
  for (const auto& [m, e] : report.eigs) {
    sb.row(m, fmt(e.lambda_min), fmt(e.lambda_max), fmt(report.delta.at(m)),
           e.exact ? 1 : 0);
  }
  out.summary = sb.str();

  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream js(std::filesystem::path(cfg.out_dir) / "incoherence.json");
  js << report.to_json() << "\n";
  return out;
}

}  // namespace

std::string emit_plot_script(const std::string& summary_csv_path, ExperimentKind kind) {
  std::ostringstream os;
  os << "# gnuplot script generated by thlx " << kVersion << "\n";
  os << "set datafile separator ','\n";
  os << "set key outside\n";
  os << "set grid\n";
  switch (kind) {
    case ExperimentKind::type12_curves:
      os << "set xlabel 'threshold t0 (units of lambda*sigma)'\n";
      os << "set ylabel 'mean error count'\n";
      os << "plot '" << summary_csv_path
         << "' using 1:2:3 skip 1 with yerrorlines title 'FP', \\\n"
         << "     '" << summary_csv_path
         << "' using 1:4:5 skip 1 with yerrorlines title 'FN'\n";
      break;
    case ExperimentKind::model_size_vs_threshold:
      os << "set xlabel 'threshold t0 (units of lambda*sigma)'\n";
      os << "set ylabel 'count'\n";
      os << "plot '" << summary_csv_path
         << "' using 2:3 skip 1 with linespoints title 'model size |I|', \\\n"
         << "     '" << summary_csv_path
         << "' using 2:5 skip 1 with linespoints title 'TP', \\\n"
         << "     '" << summary_csv_path
         << "' using 2:7 skip 1 with linespoints title 'FP'\n";
      break;
    case ExperimentKind::refit_l2_vs_threshold:
      os << "set xlabel 'threshold t0 (units of lambda*sigma)'\n";
      os << "set ylabel 'l2 error of the refit'\n";
      os << "plot '" << summary_csv_path
         << "' using 2:3 skip 1 with linespoints title 'refit', \\\n"
         << "     '" << summary_csv_path
         << "' using 2:5 skip 1 with lines title 'lasso init'\n";
      break;
    case ExperimentKind::rho2_study:
      os << "set xlabel 'sparsity s'\n";
      os << "set ylabel 'mean rho^2'\n";
      os << "set logscale y\n";
      os << "plot '" << summary_csv_path
         << "' using 1:4 skip 1 with linespoints title 'thresholded lasso', \\\n"
         << "     '" << summary_csv_path
         << "' using 1:6 skip 1 with linespoints title 'lasso (best l2)'\n";
      break;
    case ExperimentKind::success_prob:
      os << "set xlabel 'samples n'\n";
      os << "set ylabel 'probability of exact sign recovery'\n";
      os << "plot '" << summary_csv_path
         << "' using 2:3 skip 1 with linespoints title 'thresholded lasso', \\\n"
         << "     '" << summary_csv_path
         << "' using 2:4 skip 1 with linespoints title 'lasso (best support)'\n";
      break;
    case ExperimentKind::roc_compare:
      os << "set xlabel 'FPR'\n";
      os << "set ylabel 'TPR'\n";
      os << "plot '" << summary_csv_path
         << "' using 3:4 skip 1 with points title 'sweep points'\n";
      break;
    case ExperimentKind::error_curves:
      os << "set xlabel 'penalty factor f_p'\n";
      os << "set ylabel 'norm'\n";
      os << "set logscale y\n";
      os << "plot '" << summary_csv_path
         << "' using 1:2 skip 1 with linespoints title '|h_T0|_1', \\\n"
         << "     '" << summary_csv_path
         << "' using 1:3 skip 1 with linespoints title '|h_T0c|_1', \\\n"
         << "     '" << summary_csv_path
         << "' using 1:4 skip 1 with linespoints title '|h|_1', \\\n"
         << "     '" << summary_csv_path
         << "' using 1:6 skip 1 with linespoints title '|delta|_2'\n";
      break;
    case ExperimentKind::diagnose:
      throw std::invalid_argument("emit_plot_script: no plot for diagnose runs");
  }
  return os.str();
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  config.validate();
  RunContext ctx(config);
  ctx.lambda = lambda_base(config.design.p, config.design.n, config.log_base);

  KindResult res;
  switch (config.kind) {
    case ExperimentKind::type12_curves: res = run_type12(ctx); break;
    case ExperimentKind::model_size_vs_threshold: res = run_model_size(ctx); break;
    case ExperimentKind::refit_l2_vs_threshold: res = run_refit_l2(ctx); break;
    case ExperimentKind::error_curves: res = run_error_curves(ctx); break;
    case ExperimentKind::rho2_study: res = run_rho2_study(ctx); break;
    case ExperimentKind::success_prob: res = run_success_prob(ctx); break;
    case ExperimentKind::roc_compare: res = run_roc(ctx); break;
    case ExperimentKind::diagnose: res = run_diagnose_kind(ctx); break;
  }

  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  const fs::path dir(config.out_dir);

  ExperimentOutput out;
  out.records = std::move(res.records);
  out.summary_csv = res.summary;
  for (const auto& r : out.records) {
    if (r.failed) ++out.failures;
  }

  {
    std::ofstream os(dir / "config.json");
    os << config.to_json() << "\n";
  }
  {
    nlohmann::json meta;
    meta["version"] = kVersion;
    meta["rng_algorithm"] = kRngAlgorithm;
    meta["config_hash"] = ctx.config_hash;
    std::ofstream os(dir / "metadata.json");
    os << meta.dump(2) << "\n";
  }
  {
    out.runs_csv_path = (dir / "runs.csv").string();
    std::ofstream os(out.runs_csv_path);
    os << run_record_csv_header() << "\n";
    for (const auto& r : out.records) {
      if (!r.failed) os << to_csv_row(r) << "\n";
    }
  }
  {
    std::ofstream os(dir / "failures.csv");
    os << "rep,estimator,error\n";
    for (const auto& r : out.records) {
      if (r.failed) os << r.rep << "," << r.estimator << ",\"" << r.error << "\"\n";
    }
  }
  {
    out.summary_csv_path = (dir / "summary.csv").string();
    std::ofstream os(out.summary_csv_path);
    os << out.summary_csv;
  }
  if (config.kind != ExperimentKind::diagnose) {
    out.plot_script_path = (dir / "plot.gp").string();
    std::ofstream os(out.plot_script_path);
    os << emit_plot_script(out.summary_csv_path, config.kind);
  }
  return out;
}

}  // namespace thlx
