// Experiment runner and file-fitting CLI for the measurement-error lasso.
//
// Subcommands:
//   experiment  linear simulation study (tables of TP/FP/estimation error)
//   roc         logistic ROC and l1-error sweep over the constraint grid
//   simulate    export one synthetic dataset as CSV + JSON sidecar
//   fit         fit a user-supplied W/y with a known Sigma_uu
//
// Exit codes: 0 success, 2 config error, 3 data validation error,
// 4 numeric failure.

#include "melasso/dataset_io.hpp"
#include "melasso/experiment.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <iostream>

namespace {

using namespace melasso;

int run(int argc, char** argv) {
  CLI::App app{"measurement-error lasso experiments"};
  app.require_subcommand(1);

  // --- experiment ---
  auto* exp_cmd = app.add_subcommand("experiment", "linear simulation study");
  ExperimentConfig exp_cfg;
  std::string exp_scenario = "table1";
  exp_cmd->add_option("--scenario", exp_scenario,
                      "table1 | table2 | table3 | custom");
  exp_cmd->add_option("--n", exp_cfg.n, "observations per replicate");
  exp_cmd->add_option("--p", exp_cfg.p, "covariates");
  exp_cmd->add_option("--s0", exp_cfg.s0, "relevant covariates");
  exp_cmd->add_option("--sigma-u-sq", exp_cfg.sigma_u_sq, "measurement error variance");
  exp_cmd->add_option("--sigma-eps", exp_cfg.sigma_eps, "model error sd");
  exp_cmd->add_option("--coef-sd", exp_cfg.coef_sd, "sd of nonzero coefficients");
  exp_cmd->add_option("--replicates", exp_cfg.replicates, "Monte Carlo replicates");
  exp_cmd->add_option("--seed", exp_cfg.seed, "root seed");
  exp_cmd->add_option("--threads", exp_cfg.threads, "worker threads (0 = cores)");
  exp_cmd->add_option("--cv-folds", exp_cfg.cv_folds, "cross-validation folds");
  bool exp_fixed_support = false;
  exp_cmd->add_flag("--fixed-support", exp_fixed_support,
                    "keep S0 = {1..s0} instead of randomizing per replicate");
  exp_cmd->add_option("--out", exp_cfg.output_dir, "output directory")->required();

  // --- roc ---
  auto* roc_cmd = app.add_subcommand("roc", "logistic ROC sweep");
  ExperimentConfig roc_cfg;
  roc_cfg.scenario = Scenario::roc_logistic;
  roc_cfg.coef_sd = 5.0;
  roc_cfg.randomize_support = false;
  roc_cfg.glm.max_iter = 400;
  roc_cfg.glm.tol = 1e-5;
  roc_cmd->add_option("--n", roc_cfg.n);
  roc_cmd->add_option("--p", roc_cfg.p);
  roc_cmd->add_option("--s0", roc_cfg.s0);
  roc_cmd->add_option("--sigma-u-sq", roc_cfg.sigma_u_sq);
  roc_cmd->add_option("--coef-sd", roc_cfg.coef_sd);
  roc_cmd->add_option("--replicates", roc_cfg.replicates);
  roc_cmd->add_option("--seed", roc_cfg.seed);
  roc_cmd->add_option("--threads", roc_cfg.threads);
  roc_cmd->add_option("--kappa-grid", roc_cfg.roc_kappa_grid,
                      "explicit kappa values (ascending)");
  roc_cmd->add_option("--alpha", roc_cfg.glm.alpha, "ascent step size");
  roc_cmd->add_option("--max-iter", roc_cfg.glm.max_iter);
  roc_cmd->add_option("--out", roc_cfg.output_dir)->required();

  // --- simulate ---
  auto* sim_cmd = app.add_subcommand("simulate", "export one synthetic dataset");
  ExperimentConfig sim_cfg;
  std::string sim_scenario = "table1";
  std::string sim_family = "linear";
  std::string sim_out;
  bool sim_truth = true;
  bool sim_no_center = false;
  sim_cmd->add_option("--scenario", sim_scenario, "table1 | table2 | table3 | custom");
  sim_cmd->add_option("--family", sim_family, "linear | logistic | poisson");
  sim_cmd->add_option("--n", sim_cfg.n);
  sim_cmd->add_option("--p", sim_cfg.p);
  sim_cmd->add_option("--s0", sim_cfg.s0);
  sim_cmd->add_option("--sigma-u-sq", sim_cfg.sigma_u_sq);
  sim_cmd->add_option("--sigma-eps", sim_cfg.sigma_eps);
  sim_cmd->add_option("--coef-sd", sim_cfg.coef_sd);
  double sim_mu0 = 0.0;
  sim_cmd->add_option("--mu0", sim_mu0, "GLM intercept");
  sim_cmd->add_option("--seed", sim_cfg.seed);
  sim_cmd->add_flag("--no-center", sim_no_center, "skip centering (linear only)");
  sim_cmd->add_flag("--truth,!--no-truth", sim_truth, "also write X, U, beta0");
  sim_cmd->add_option("--out", sim_out)->required();

  // --- fit ---
  auto* fit_cmd = app.add_subcommand("fit", "fit W/y CSV data");
  FitFileConfig fit_cfg;
  std::string fit_method = "naive";
  std::string fit_family = "linear";
  std::string sigma_scalar_str;
  std::string sigma_diag_path, sigma_dense_path;
  double fit_kappa = -1.0, fit_lambda = -1.0;
  bool fit_cv = false, fit_elbow = false;
  fit_cmd->add_option("--w", fit_cfg.w_csv, "design matrix CSV (header row)")->required();
  fit_cmd->add_option("--y", fit_cfg.y_csv, "response CSV (single column)")->required();
  fit_cmd->add_option("--sigma-u-sq", sigma_scalar_str,
                      "scalar measurement error variance");
  fit_cmd->add_option("--sigma-uu-diag", sigma_diag_path,
                      "CSV with per-covariate error variances");
  fit_cmd->add_option("--sigma-uu-dense", sigma_dense_path, "CSV with dense Sigma_uu");
  fit_cmd->add_option("--method", fit_method, "naive | corrected | cs-glm");
  fit_cmd->add_option("--family", fit_family, "linear | logistic | poisson");
  fit_cmd->add_flag("--filter-noise", fit_cfg.filter_noise,
                    "drop covariates with error variance >= half the total");
  fit_cmd->add_flag("--cv", fit_cv, "tune by cross-validation (linear methods)");
  fit_cmd->add_flag("--elbow", fit_elbow, "tune by the elbow rule (GLM methods)");
  fit_cmd->add_option("--kappa", fit_kappa, "fixed constraint level");
  fit_cmd->add_option("--lambda", fit_lambda, "fixed penalty level");
  fit_cmd->add_option("--cv-folds", fit_cfg.cv_folds);
  fit_cmd->add_option("--seed", fit_cfg.seed);
  fit_cmd->add_option("--out", fit_cfg.output_dir)->required();

  CLI11_PARSE(app, argc, argv);

  if (exp_cmd->parsed()) {
    exp_cfg.scenario = scenario_from_name(exp_scenario);
    if (exp_cfg.scenario == Scenario::roc_logistic)
      throw config_error("use the 'roc' subcommand for the roc-logistic scenario");
    exp_cfg.randomize_support = !exp_fixed_support;
    const ExperimentResult result = run_experiment(exp_cfg);
    std::cout << result.table_csv();
    return 0;
  }

  if (roc_cmd->parsed()) {
    const RocResult result = run_roc(roc_cfg);
    std::cout << result.table_csv();
    return 0;
  }

  if (sim_cmd->parsed()) {
    sim_cfg.scenario = scenario_from_name(sim_scenario);
    TrueModel model = draw_model(sim_cfg.p, sim_cfg.s0, sim_cfg.coef_sd,
                                 sim_cfg.randomize_support, sim_cfg.seed, 0);
    model.sigma_xx = scenario_sigma_xx(sim_cfg);
    model.sigma_uu = scenario_sigma_uu(sim_cfg);
    model.sigma_eps = sim_cfg.sigma_eps;
    model.mu0 = sim_mu0;
    SimulatedDataset data;
    if (sim_family == "linear") {
      data = simulate_linear(model, sim_cfg.n, !sim_no_center, sim_cfg.seed, 0);
    } else if (sim_family == "logistic") {
      data = simulate_glm(model, sim_cfg.n, GlmFamily::logistic, sim_cfg.seed, 0);
    } else if (sim_family == "poisson") {
      data = simulate_glm(model, sim_cfg.n, GlmFamily::poisson, sim_cfg.seed, 0);
    } else {
      throw config_error("unknown family '" + sim_family + "'");
    }
    write_dataset(data, sim_out, sim_truth);
    std::cout << "wrote dataset to " << sim_out << "\n";
    return 0;
  }

  if (fit_cmd->parsed()) {
    if (fit_method == "naive") fit_cfg.method = FitMethod::naive;
    else if (fit_method == "corrected") fit_cfg.method = FitMethod::corrected;
    else if (fit_method == "cs-glm") fit_cfg.method = FitMethod::cs_glm;
    else throw config_error("unknown method '" + fit_method + "'");
    if (fit_family == "linear") fit_cfg.family = FitFamily::linear;
    else if (fit_family == "logistic") fit_cfg.family = FitFamily::logistic;
    else if (fit_family == "poisson") fit_cfg.family = FitFamily::poisson;
    else throw config_error("unknown family '" + fit_family + "'");

    int sources = 0;
    if (!sigma_scalar_str.empty()) {
      fit_cfg.sigma_source = SigmaSource::scalar;
      fit_cfg.sigma_scalar = std::stod(sigma_scalar_str);
      ++sources;
    }
    if (!sigma_diag_path.empty()) {
      fit_cfg.sigma_source = SigmaSource::diag_csv;
      fit_cfg.sigma_path = sigma_diag_path;
      ++sources;
    }
    if (!sigma_dense_path.empty()) {
      fit_cfg.sigma_source = SigmaSource::dense_csv;
      fit_cfg.sigma_path = sigma_dense_path;
      ++sources;
    }
    if (sources != 1)
      throw config_error(
          "exactly one of --sigma-u-sq / --sigma-uu-diag / --sigma-uu-dense is required");

    fit_cfg.use_cv = fit_cv;
    fit_cfg.use_elbow = fit_elbow;
    if (fit_kappa >= 0.0) fit_cfg.kappa = fit_kappa;
    if (fit_lambda >= 0.0) fit_cfg.lambda = fit_lambda;
    const int tuning_modes = (fit_cv ? 1 : 0) + (fit_elbow ? 1 : 0) +
                             (fit_cfg.kappa ? 1 : 0) + (fit_cfg.lambda ? 1 : 0);
    if (tuning_modes != 1)
      throw config_error("choose exactly one of --cv, --elbow, --kappa, --lambda");

    const FitFileResult result = fit_file(fit_cfg);
    std::cout << result.to_json().dump(2) << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const melasso::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const melasso::validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 3;
  } catch (const melasso::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
