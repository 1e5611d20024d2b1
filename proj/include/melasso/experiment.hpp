#pragma once

#include "melasso/corrected.hpp"
#include "melasso/diagnostics.hpp"
#include "melasso/glm.hpp"
#include "melasso/lasso.hpp"
#include "melasso/metrics.hpp"
#include "melasso/simulate.hpp"
#include "melasso/tuning.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace melasso {

enum class Scenario { table1, table2, table3, roc_logistic, custom };

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

struct ExperimentConfig {
  Scenario scenario = Scenario::custom;
  Index n = 100;
  Index p = 500;
  Index s0 = 5;
  double sigma_u_sq = 0.2;
  double sigma_eps = 0.1;
  double coef_sd = 2.0;
  bool randomize_support = true;  // fresh random S0 per replicate
  long replicates = 50;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = logical cores

  // Linear tuning protocol: 10-fold CV, 100-point grids.
  int cv_folds = 10;
  int lambda_grid_size = 100;
  double lambda_min_ratio = 0.01;
  int kappa_grid_size = 100;
  double kappa_lo_frac = 1e-3;

  // ROC scenario: kappa sweep and GLM solver settings.
  std::vector<double> roc_kappa_grid;
  GlmConfig glm;

  // Solver settings: `corrected_cv` is the budgeted config used inside the
  // cross-validation folds, `corrected` the strict one for the final refit.
  LassoConfig lasso;
  CorrectedConfig corrected;
  CorrectedConfig corrected_cv{.max_iter = 600, .tol_change = 1e-6, .tol_pg = 1e-5};

  std::string output_dir;  // empty = no files written
};

/// Structural covariance of each scenario: table1 pairs Sigma_xx = I with
/// Sigma_uu = s_u^2 I, table2 uses the 50-wide rho=0.8 block-Toeplitz
/// Sigma_xx, table3 the Toeplitz-decay Sigma_uu with rho_u = s_u^2.
CovarianceSpec scenario_sigma_xx(const ExperimentConfig& config);
CovarianceSpec scenario_sigma_uu(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);  // FNV-1a 64 over canonical JSON

struct ExperimentResult {
  ExperimentConfig config;
  std::string hash;
  std::vector<ReplicateRecord> records;
  std::map<std::string, MethodAggregate> summary;
  long naive_nonconverged = 0;
  long corrected_nonconverged = 0;

  std::string table_csv() const;       // aggregate rows: method x metrics
  std::string replicates_csv() const;  // per-replicate records
  nlohmann::json table_json() const;
};

/// Full linear pipeline per replicate (draw model, simulate, CV-tuned naive
/// fit, CV-tuned corrected fit, selection metrics), replicates dispatched to
/// a worker pool and reduced in replicate order. Deterministic given
/// (config, seed) for any thread count. Writes results.csv / results.json /
/// replicates.csv when output_dir is set.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct RocPoint {
  double kappa = 0.0;
  std::string method;
  MetricSummary tpr, fpr, l1;
};

struct RocResult {
  ExperimentConfig config;
  std::string hash;
  std::vector<RocPoint> points;  // kappa-major, naive before corrected

  std::string table_csv() const;
  nlohmann::json table_json() const;
};

/// Logistic ROC sweep: for each replicate simulate a GLM dataset, fit the
/// naive and conditional-scores lasso over the kappa grid (warm-started),
/// and average TPR = TP/s0, FPR = FP/(p - s0) and the l1 error per kappa.
RocResult run_roc(const ExperimentConfig& config);

enum class SigmaSource { scalar, diag_csv, dense_csv };
enum class FitMethod { naive, corrected, cs_glm };
enum class FitFamily { linear, logistic, poisson };

struct FitFileConfig {
  std::filesystem::path w_csv;
  std::filesystem::path y_csv;
  SigmaSource sigma_source = SigmaSource::scalar;
  double sigma_scalar = 0.0;
  std::filesystem::path sigma_path;
  FitMethod method = FitMethod::naive;
  FitFamily family = FitFamily::linear;
  bool filter_noise = false;
  // Tuning: exactly one of use_cv / use_elbow / fixed kappa / fixed lambda.
  bool use_cv = false;
  bool use_elbow = false;
  std::optional<double> kappa;
  std::optional<double> lambda;
  int cv_folds = 10;
  std::uint64_t seed = 1;
  LassoConfig lasso;
  CorrectedConfig corrected;
  GlmConfig glm;
  std::string output_dir;
};

struct FitFileResult {
  FitResult fit;
  DiagnosticsReport diagnostics;  // evaluated at the estimated active set
  std::vector<std::string> covariate_names;  // post-filter
  std::vector<int> kept_columns;             // indices into the input file
  double tuning_value = 0.0;

  nlohmann::json to_json() const;
  std::string coefficients_csv() const;
};

/// Fit user-supplied data: standardize W to mean 0 / sd 1 (1/n variance
/// convention), rescale the diagonal (or dense) Sigma_uu onto the
/// standardized scale, optionally drop covariates whose measurement-error
/// variance reaches half their total variance, then fit and diagnose.
FitFileResult fit_file(const FitFileConfig& config);

}  // namespace melasso
