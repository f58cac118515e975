#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "thlx/core_model.hpp"
#include "thlx/diagnostics.hpp"
#include "thlx/ensembles.hpp"
#include "thlx/estimators.hpp"
#include "thlx/harness.hpp"
#include "thlx/io.hpp"
#include "thlx/version.hpp"

namespace {

using namespace thlx;

Matrix load_matrix(const std::string& path) {
  if (path.size() > 4 && path.substr(path.size() - 4) == ".bin") {
    return read_matrix_binary(path);
  }
  return read_matrix_csv(path);
}

Signal load_signal(const std::string& path) {
  if (path.size() > 4 && path.substr(path.size() - 4) == ".bin") {
    return read_signal_binary(path);
  }
  return read_signal_csv(path);
}

int cmd_gen(const std::string& kind, Index n, Index p, double gamma, bool no_normalize,
            std::uint64_t seed, const std::string& out_matrix,
            const std::string& beta_kind, Index s, double magnitude,
            const std::string& out_beta, double sigma, const std::string& out_obs) {
  RandomSource source(seed);
  EnsembleSpec spec;
  spec.kind = ensemble_kind_from_string(kind);
  spec.n = n;
  spec.p = p;
  spec.gamma = gamma;
  spec.normalize = !no_normalize;

  auto design_rng = source.stream(1);
  const DesignMatrix X = gen_design(spec, design_rng);
  if (!out_matrix.empty()) {
    write_matrix_csv(X.data, out_matrix);
    std::printf("wrote %s (%lld x %lld)\n", out_matrix.c_str(),
                static_cast<long long>(X.n()), static_cast<long long>(X.p()));
  }

  Signal beta;
  if (!beta_kind.empty()) {
    auto beta_rng = source.stream(2);
    if (beta_kind == "spiked") {
      beta = gen_beta_spiked(p, s, beta_rng);
    } else if (beta_kind == "const") {
      beta = gen_beta_const(p, s, magnitude, beta_rng);
    } else {
      throw CLI::ValidationError("--beta must be spiked or const");
    }
    if (!out_beta.empty()) {
      write_signal_csv(beta, out_beta);
      std::printf("wrote %s\n", out_beta.c_str());
    }
  }

  if (!out_obs.empty()) {
    if (beta.size() == 0) throw CLI::ValidationError("--obs needs --beta");
    auto noise_rng = source.stream(3);
    const Vector y = gen_observation(X, beta, NoiseSpec(sigma), noise_rng);
    write_signal_csv(Signal{y}, out_obs);
    std::printf("wrote %s\n", out_obs.c_str());
  }
  return 0;
}

int cmd_fit(const std::string& matrix_path, const std::string& y_path,
            const std::string& estimator, double lambda_n, double t0, double sigma,
            const std::string& out_prefix, bool want_coef) {
  DesignMatrix X(load_matrix(matrix_path), true);
  const Signal yv = load_signal(y_path);
  const Vector Y = yv.coef;

  FitResult fit;
  Signal final_beta;
  std::string est_json;
  if (estimator == "lasso") {
    fit = fit_lasso(X, Y, lambda_n);
    final_beta = fit.beta;
  } else if (estimator == "dantzig") {
    fit = fit_dantzig(X, Y, lambda_n);
    final_beta = fit.beta;
  } else if (estimator == "thresholded") {
    const auto est = thresholded_lasso(X, Y, lambda_n, t0);
    fit.beta = est.beta_init;
    fit.lambda_n = lambda_n;
    fit.objective = lasso_objective(X, Y, est.beta_init, lambda_n);
    fit.kkt_residual = lasso_kkt_residual(X, Y, est.beta_init, lambda_n);
    final_beta = est.beta_hat;
    est_json = est.to_json();
  } else if (estimator == "gauss-dantzig") {
    GaussDantzigOptions opts;
    opts.c1 = 0.0;  // leave range policing to the caller on the CLI path
    const auto est = gauss_dantzig(X, Y, sigma, opts);
    fit.beta = est.beta_init;
    fit.lambda_n = est.lambda_n;
    fit.objective = est.beta_init.l1();
    final_beta = est.beta_hat;
    est_json = est.to_json();
  } else {
    throw CLI::ValidationError("unknown estimator: " + estimator);
  }

  const std::string summary_path = out_prefix + "_fit.csv";
  std::ofstream os(summary_path);
  os << "lambda,nnz,objective,kkt_residual,method,cert_gap\n";
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%.10g,%lld,%.10g,%.3e,%s,%.3e\n", fit.lambda_n,
                static_cast<long long>(final_beta.support().size()), fit.objective,
                fit.kkt_residual, fit.method.c_str(), fit.cert_gap);
  os << buf;
  std::printf("wrote %s\n", summary_path.c_str());
  if (want_coef) {
    const std::string coef_path = out_prefix + "_coef.csv";
    write_signal_csv(final_beta, coef_path);
    std::printf("wrote %s\n", coef_path.c_str());
  }
  if (!est_json.empty()) {
    const std::string json_path = out_prefix + "_est.json";
    std::ofstream js(json_path);
    js << est_json << "\n";
    std::printf("wrote %s\n", json_path.c_str());
  }
  return 0;
}

int cmd_diagnose(const std::string& matrix_path, const std::vector<Index>& orders,
                 const std::string& mode, const std::string& theta_spec,
                 const std::string& re_spec, const std::string& json_out,
                 std::uint64_t seed) {
  DesignMatrix X(load_matrix(matrix_path), true);
  DiagnoseRequest req;
  req.eig_orders = orders.empty() ? std::vector<Index>{1, 2, 3} : orders;
  req.mode = mode == "sampled" ? ScanMode::greedy_sampled : ScanMode::exhaustive;
  req.seed = seed;
  if (!theta_spec.empty()) {
    std::stringstream ss(theta_spec);
    std::string a, b;
    if (std::getline(ss, a, ',') && std::getline(ss, b, ',')) {
      req.theta_pairs.push_back({std::stoll(a), std::stoll(b)});
    }
  }
  if (!re_spec.empty()) {
    std::stringstream ss(re_spec);
    std::string a, b;
    if (std::getline(ss, a, ',') && std::getline(ss, b, ',')) {
      req.re_params.push_back({std::stoll(a), std::stod(b)});
    }
  }
  const auto report = diagnose(X, req);
  std::cout << report.to_table();
  if (!json_out.empty()) {
    std::ofstream os(json_out);
    os << report.to_json() << "\n";
    std::printf("wrote %s\n", json_out.c_str());
  }
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir,
                   bool full) {
  std::ifstream is(config_path);
  if (!is) throw std::runtime_error("cannot open config: " + config_path);
  std::stringstream buf;
  buf << is.rdbuf();
  ExperimentConfig cfg = ExperimentConfig::from_json(buf.str());
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (full) cfg.full_scale = true;
  const auto out = run_experiment(cfg);
  std::printf("experiment %s: %zu records, %d failures\n",
              to_string(cfg.kind).c_str(), out.records.size(), out.failures);
  std::printf("summary: %s\n", out.summary_csv_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thresholded Lasso / Gauss-Dantzig estimators and experiment harness"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate designs, coefficient vectors, observations");
  std::string gen_kind = "iid_gaussian", gen_beta, gen_matrix, gen_beta_out, gen_obs;
  Index gen_n = 100, gen_p = 256, gen_s = 8;
  double gen_gamma = 0.5, gen_mag = 0.9, gen_sigma = 1.0;
  bool gen_no_norm = false;
  std::uint64_t gen_seed = 0;
  gen->add_option("--kind", gen_kind, "iid_gaussian | toeplitz | bernoulli_pm1");
  gen->add_option("--n", gen_n, "rows")->required();
  gen->add_option("--p", gen_p, "columns")->required();
  gen->add_option("--gamma", gen_gamma, "Toeplitz correlation");
  gen->add_flag("--no-normalize", gen_no_norm, "skip column normalization");
  gen->add_option("--seed", gen_seed, "master seed");
  gen->add_option("--out", gen_matrix, "design CSV path");
  gen->add_option("--beta", gen_beta, "spiked | const");
  gen->add_option("--s", gen_s, "sparsity for --beta");
  gen->add_option("--magnitude", gen_mag, "magnitude for const beta");
  gen->add_option("--beta-out", gen_beta_out, "beta CSV path");
  gen->add_option("--sigma", gen_sigma, "noise level for --obs");
  gen->add_option("--obs", gen_obs, "observation CSV path");

  // fit
  auto* fit = app.add_subcommand("fit", "run one estimator on (X, Y)");
  std::string fit_matrix, fit_y, fit_estimator = "lasso", fit_out = "thlx";
  double fit_lambda = 0.1, fit_t0 = 0.0, fit_sigma = 1.0;
  bool fit_coef = false;
  fit->add_option("--matrix", fit_matrix, "design CSV/binary")->required();
  fit->add_option("--y", fit_y, "observation CSV/binary")->required();
  fit->add_option("--estimator", fit_estimator,
                  "lasso | dantzig | thresholded | gauss-dantzig");
  fit->add_option("--lambda", fit_lambda, "penalty lambda_n");
  fit->add_option("--t0", fit_t0, "threshold for the thresholded estimator");
  fit->add_option("--sigma", fit_sigma, "noise level for gauss-dantzig");
  fit->add_option("--out", fit_out, "output prefix");
  fit->add_flag("--coef", fit_coef, "also write the coefficient CSV");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "incoherence diagnostics for a design");
  std::string diag_matrix, diag_mode = "exhaustive", diag_theta, diag_re, diag_json;
  std::vector<Index> diag_m;
  std::uint64_t diag_seed = 0;
  diag->add_option("--matrix", diag_matrix, "design CSV/binary")->required();
  diag->add_option("--m", diag_m, "sparse eigenvalue orders (repeatable)");
  diag->add_option("--mode", diag_mode, "exhaustive | sampled");
  diag->add_option("--theta", diag_theta, "s,s' pair for restricted orthogonality");
  diag->add_option("--re", diag_re, "s0,k0 pair for the RE lower bound");
  diag->add_option("--json", diag_json, "write report JSON here");
  diag->add_option("--seed", diag_seed, "seed for sampled mode");

  // experiment
  auto* exp = app.add_subcommand("experiment", "run a declarative experiment config");
  std::string exp_config, exp_out;
  bool exp_full = false;
  exp->add_option("--config", exp_config, "config JSON")->required();
  exp->add_option("--out", exp_out, "override output directory");
  exp->add_flag("--full", exp_full, "use the full-scale (paper-sized) settings");

  // version
  auto* ver = app.add_subcommand("version", "print version and RNG identifier");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      return cmd_gen(gen_kind, gen_n, gen_p, gen_gamma, gen_no_norm, gen_seed, gen_matrix,
                     gen_beta, gen_s, gen_mag, gen_beta_out, gen_sigma, gen_obs);
    }
    if (fit->parsed()) {
      return cmd_fit(fit_matrix, fit_y, fit_estimator, fit_lambda, fit_t0, fit_sigma,
                     fit_out, fit_coef);
    }
    if (diag->parsed()) {
      return cmd_diagnose(diag_matrix, diag_m, diag_mode, diag_theta, diag_re, diag_json,
                          diag_seed);
    }
    if (exp->parsed()) {
      return cmd_experiment(exp_config, exp_out, exp_full);
    }
    if (ver->parsed()) {
      std::printf("thlx %s (rng: %s)\n", thlx::kVersion, thlx::kRngAlgorithm);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
