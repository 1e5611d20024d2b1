#include "melasso/experiment.hpp"

#include "melasso/csv.hpp"
#include "melasso/rng.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <sstream>

namespace melasso {

namespace {

bool parses_as_double(const std::string& cell) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto res = std::from_chars(begin, end, v);
  return res.ec == std::errc{} && res.ptr == end && !cell.empty();
}

// Columns of numbers with an optional header line.
Matrix read_numeric(const std::filesystem::path& path, bool header_mandatory,
                    std::vector<std::string>* names) {
  CsvTable raw = read_csv(path, /*expect_header=*/false);
  if (raw.rows.empty()) throw validation_error(path.string() + ": empty file");
  const bool has_header = !parses_as_double(raw.rows.front().front());
  if (header_mandatory && !has_header)
    throw validation_error(path.string() + ": a header row of covariate names is required");
  if (has_header) {
    if (names) *names = raw.rows.front();
    raw.rows.erase(raw.rows.begin());
    if (raw.rows.empty()) throw validation_error(path.string() + ": no data rows");
  } else if (names) {
    names->clear();
    for (std::size_t j = 0; j < raw.rows.front().size(); ++j)
      names->push_back("w" + std::to_string(j + 1));
  }
  return to_matrix(raw);
}

Vector column_sds(const Matrix& W) {
  // 1/n variance convention throughout, matching the sample covariances.
  const double n = static_cast<double>(W.rows());
  const Vector means = W.colwise().mean();
  Vector sds(W.cols());
  for (Index j = 0; j < W.cols(); ++j)
    sds[j] = std::sqrt((W.col(j).array() - means[j]).square().sum() / n);
  return sds;
}

}  // namespace

nlohmann::json FitFileResult::to_json() const {
  nlohmann::json j;
  j["intercept"] = fit.intercept;
  j["tuning_kind"] = fit.tuning_kind == TuningKind::lambda ? "lambda" : "kappa";
  j["tuning_value"] = tuning_value;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["objective"] = fit.objective;
  j["interior"] = fit.interior;
  nlohmann::json coefs = nlohmann::json::array();
  for (Index k = 0; k < fit.beta.size(); ++k) {
    if (fit.beta[k] == 0.0) continue;
    coefs.push_back({{"name", covariate_names[static_cast<std::size_t>(k)]},
                     {"column", kept_columns[static_cast<std::size_t>(k)] + 1},
                     {"beta", fit.beta[k]}});
  }
  j["active_coefficients"] = coefs;
  j["active_count"] = fit.active_set.size();
  nlohmann::json d;
  d["theta_ic_me"] = diagnostics.theta_ic_me;
  d["theta_ic_cl"] = diagnostics.theta_ic_cl;
  d["mec_residual"] = diagnostics.mec_residual;
  d["beta_min_ok"] = diagnostics.beta_min_ok;
  d["kkt_residual"] = diagnostics.kkt_residual;
  j["diagnostics"] = d;
  return j;
}

std::string FitFileResult::coefficients_csv() const {
  std::ostringstream out;
  out << "name,column,beta\n";
  for (Index k = 0; k < fit.beta.size(); ++k)
    out << covariate_names[static_cast<std::size_t>(k)] << ','
        << kept_columns[static_cast<std::size_t>(k)] + 1 << ','
        << format_double(fit.beta[k]) << '\n';
  return out.str();
}

FitFileResult fit_file(const FitFileConfig& config) {
  std::vector<std::string> names;
  Matrix W = read_numeric(config.w_csv, /*header_mandatory=*/true, &names);
  Matrix y_mat = read_numeric(config.y_csv, /*header_mandatory=*/false, nullptr);
  if (y_mat.cols() != 1)
    throw validation_error(config.y_csv.string() + ": expected a single column");
  Vector y = y_mat.col(0);
  if (y.size() != W.rows())
    throw validation_error("y has " + std::to_string(y.size()) + " rows but W has " +
                           std::to_string(W.rows()));
  require_finite(W, "W");
  require_finite(y, "y");

  const Index n = W.rows();
  const Index p = W.cols();

  // Measurement-error variances on the original scale of W.
  Vector sigma_u_diag;
  Matrix sigma_u_dense;
  const bool dense_sigma = config.sigma_source == SigmaSource::dense_csv;
  switch (config.sigma_source) {
    case SigmaSource::scalar:
      if (!(config.sigma_scalar >= 0.0))
        throw validation_error("sigma_uu scalar must be >= 0");
      sigma_u_diag = Vector::Constant(p, config.sigma_scalar);
      break;
    case SigmaSource::diag_csv: {
      Matrix d = read_numeric(config.sigma_path, false, nullptr);
      if (d.cols() != 1 || d.rows() != p)
        throw validation_error(config.sigma_path.string() +
                               ": diagonal Sigma_uu must be a single column of length p");
      sigma_u_diag = d.col(0);
      for (Index j = 0; j < p; ++j)
        if (sigma_u_diag[j] < 0.0)
          throw validation_error("negative measurement-error variance at column " +
                                 std::to_string(j + 1));
      break;
    }
    case SigmaSource::dense_csv: {
      sigma_u_dense = read_numeric(config.sigma_path, false, nullptr);
      if (sigma_u_dense.rows() != p || sigma_u_dense.cols() != p)
        throw validation_error(config.sigma_path.string() + ": dense Sigma_uu must be p x p");
      sigma_u_diag = sigma_u_dense.diagonal();
      break;
    }
  }

  // Standardize W to mean 0 / sd 1 and carry Sigma_uu onto that scale.
  const Vector means = W.colwise().mean();
  const Vector sds = column_sds(W);
  for (Index j = 0; j < p; ++j) {
    if (!(sds[j] > 0.0))
      throw validation_error("column " + std::to_string(j + 1) + " (" +
                             names[static_cast<std::size_t>(j)] + ") has zero variance");
  }

  // Optional noise filter: keep covariates with sigma_u_j^2 < sigma_j^2 / 2.
  std::vector<int> kept;
  for (Index j = 0; j < p; ++j) {
    if (!config.filter_noise || sigma_u_diag[j] < 0.5 * sds[j] * sds[j])
      kept.push_back(static_cast<int>(j));
  }
  if (kept.empty())
    throw validation_error("noise filter removed every covariate; no model to fit");

  const Index pk = static_cast<Index>(kept.size());
  Matrix Ws(n, pk);
  std::vector<std::string> kept_names(static_cast<std::size_t>(pk));
  for (Index k = 0; k < pk; ++k) {
    const Index j = kept[static_cast<std::size_t>(k)];
    Ws.col(k) = (W.col(j).array() - means[j]) / sds[j];
    kept_names[static_cast<std::size_t>(k)] = names[static_cast<std::size_t>(j)];
  }

  MeasurementModel sigma_uu;
  if (dense_sigma) {
    Matrix scaled(pk, pk);
    for (Index a = 0; a < pk; ++a)
      for (Index b = 0; b < pk; ++b) {
        const Index ja = kept[static_cast<std::size_t>(a)];
        const Index jb = kept[static_cast<std::size_t>(b)];
        scaled(a, b) = sigma_u_dense(ja, jb) / (sds[ja] * sds[jb]);
      }
    sigma_uu = MeasurementModel::dense_matrix(scaled);
  } else {
    Vector scaled(pk);
    for (Index k = 0; k < pk; ++k) {
      const Index j = kept[static_cast<std::size_t>(k)];
      scaled[k] = sigma_u_diag[j] / (sds[j] * sds[j]);
    }
    sigma_uu = MeasurementModel::diagonal(scaled);
  }

  FitFileResult result;
  result.covariate_names = kept_names;
  result.kept_columns = kept;

  const bool linear = config.family == FitFamily::linear;
  const GlmFamily glm_family =
      config.family == FitFamily::poisson ? GlmFamily::poisson : GlmFamily::logistic;

  if (linear) {
    if (config.method == FitMethod::cs_glm)
      throw config_error("cs-glm applies to the logistic/poisson families");
    const double y_mean = y.mean();
    Vector yc = y.array() - y_mean;

    // Naive reference fit (also used for the corrected protocol's radius).
    double lambda_naive;
    if (config.lambda) {
      lambda_naive = *config.lambda;
    } else {
      const double lmax = lambda_max(Ws, yc);
      const auto grid = lambda_grid(lmax, 100, 0.01);
      const CvPlan plan = make_cv_plan(n, config.cv_folds, grid,
                                       RngStream(config.seed, 0, rng_purpose::cv_folds_naive)
                                           .next_u64());
      lambda_naive =
          cv_select(CvSolver::naive_lasso, Ws, yc, nullptr, plan, config.lasso).best;
    }
    const FitResult naive_fit = naive_lasso(Ws, yc, lambda_naive, config.lasso);

    if (config.method == FitMethod::naive) {
      result.fit = naive_fit;
      result.tuning_value = lambda_naive;
    } else {
      double kappa_value;
      if (config.kappa) {
        kappa_value = *config.kappa;
      } else {
        double radius = 2.0 * naive_fit.beta.lpNorm<1>();
        if (!(radius > 0.0)) radius = 1e-3;
        const auto grid = kappa_grid(radius, 100, 1e-3);
        const CvPlan plan =
            make_cv_plan(n, config.cv_folds, grid,
                         RngStream(config.seed, 0, rng_purpose::cv_folds_corrected)
                             .next_u64());
        kappa_value = cv_select(CvSolver::corrected_ccl, Ws, yc, &sigma_uu, plan,
                                config.lasso, config.corrected)
                          .best;
      }
      result.fit =
          corrected_lasso_constrained(Ws, yc, sigma_uu, kappa_value, config.corrected);
      result.tuning_value = kappa_value;
    }
    result.fit.intercept = y_mean;  // W columns are centered
  } else {
    const MeasurementModel& sigma_fit =
        config.method == FitMethod::naive ? MeasurementModel::zero(pk) : sigma_uu;
    double kappa_value = 0.0;
    if (config.kappa) {
      kappa_value = *config.kappa;
    } else if (config.use_elbow) {
      // Constraint grid spanned from a cross-validated linear screen of the
      // standardized data, 3.0 r down to 0.1 r in steps of 0.1 r.
      Vector yc = y.array() - y.mean();
      const double lmax = lambda_max(Ws, yc);
      const auto lgrid = lambda_grid(lmax, 100, 0.01);
      const CvPlan plan = make_cv_plan(n, config.cv_folds, lgrid,
                                       RngStream(config.seed, 0, rng_purpose::cv_folds_naive)
                                           .next_u64());
      const double lam =
          cv_select(CvSolver::naive_lasso, Ws, yc, nullptr, plan, config.lasso).best;
      const double ref_norm = naive_lasso(Ws, yc, lam, config.lasso).beta.lpNorm<1>();
      if (!(ref_norm > 0.0))
        throw numeric_error("elbow rule: the reference fit selected nothing");
      std::vector<double> grid;
      std::vector<long> nnz;
      std::optional<Vector> warm;
      for (int step = 30; step >= 1; --step)
        grid.push_back(0.1 * static_cast<double>(step) * ref_norm);
      for (const double kappa : grid) {
        const FitResult f = conditional_score_lasso(glm_family, Ws, y, sigma_fit, kappa,
                                                    config.glm, warm);
        warm = f.beta;
        nnz.push_back(static_cast<long>(f.active_set.size()));
      }
      kappa_value = elbow_select(grid, nnz).kappa;
    } else {
      throw config_error("GLM fits need --kappa or --elbow (no CV loss exists)");
    }
    result.fit =
        conditional_score_lasso(glm_family, Ws, y, sigma_fit, kappa_value, config.glm);
    result.tuning_value = kappa_value;
  }

  // Diagnostics at the estimated active set (plug-in; the truth is unknown).
  const std::vector<int> S_hat(result.fit.active_set.begin(), result.fit.active_set.end());
  if (!S_hat.empty() && static_cast<Index>(S_hat.size()) < pk) {
    const Matrix C_ww = Ws.transpose() * Ws / static_cast<double>(n);
    Vector signs(static_cast<Index>(S_hat.size()));
    for (std::size_t k = 0; k < S_hat.size(); ++k)
      signs[static_cast<Index>(k)] = result.fit.beta[S_hat[k]] > 0.0 ? 1.0 : -1.0;
    const Matrix sigma_dense = sigma_uu.dense();
    try {
      result.diagnostics.theta_ic_me = ic_me(C_ww, S_hat, signs);
      result.diagnostics.theta_ic_cl = ic_cl(C_ww, sigma_dense, S_hat, signs);
      result.diagnostics.mec_residual = mec_residual(C_ww, sigma_dense, S_hat);
      result.diagnostics.beta_min_ok =
          beta_min_condition(C_ww, sigma_dense, S_hat, result.fit.beta);
    } catch (const numeric_error&) {
      result.diagnostics.theta_ic_me = std::numeric_limits<double>::quiet_NaN();
      result.diagnostics.theta_ic_cl = std::numeric_limits<double>::quiet_NaN();
      result.diagnostics.mec_residual = std::numeric_limits<double>::quiet_NaN();
    }
  }
  if (linear) {
    Vector yc = y.array() - y.mean();
    if (config.method == FitMethod::naive) {
      result.diagnostics.kkt_residual = kkt_residual_naive(Ws, yc, result.fit);
    } else if (result.fit.interior) {
      result.diagnostics.kkt_residual = kkt_residual_corrected(Ws, yc, sigma_uu, result.fit);
    } else {
      result.diagnostics.kkt_residual = std::numeric_limits<double>::quiet_NaN();
    }
  } else {
    result.diagnostics.kkt_residual = result.fit.exit_residual;
  }

  if (!config.output_dir.empty()) {
    const std::filesystem::path dir(config.output_dir);
    write_file_atomic(dir / "fit.json", result.to_json().dump(2) + "\n");
    write_file_atomic(dir / "coefficients.csv", result.coefficients_csv());
  }
  return result;
}

}  // namespace melasso
