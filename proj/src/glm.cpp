#include "melasso/glm.hpp"

#include "melasso/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace melasso {

namespace {

inline double logistic_cdf(double x) {
  double h;
  if (x >= 0.0) {
    h = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    h = e / (1.0 + e);
  }
  // Keep the value strictly inside (0,1) even where exp saturates.
  h = std::min(h, 1.0 - std::numeric_limits<double>::epsilon() / 2.0);
  return std::max(h, std::numeric_limits<double>::min());
}

// Truncated Poisson series ratio in log space. Terms are
// t_z = (z!)^-1 exp(z eta - z^2 quad / 2); the mean is sum z t_z / sum t_z.
double poisson_series_ratio(double eta_star, double quad, long z_max,
                            bool check_tail) {
  double log_max = -std::numeric_limits<double>::infinity();
  for (long z = 0; z <= z_max; ++z) {
    const double zd = static_cast<double>(z);
    const double lt = zd * eta_star - 0.5 * zd * zd * quad - std::lgamma(zd + 1.0);
    log_max = std::max(log_max, lt);
  }
  double s0 = 0.0, s1 = 0.0;
  for (long z = 0; z <= z_max; ++z) {
    const double zd = static_cast<double>(z);
    const double lt = zd * eta_star - 0.5 * zd * zd * quad - std::lgamma(zd + 1.0);
    const double t = std::exp(lt - log_max);
    s0 += t;
    s1 += zd * t;
  }
  if (check_tail) {
    // Consecutive term ratio r = exp(eta - quad (z + 1/2)) / (z + 1) at
    // z = z_max; the remaining mass is geometric-dominated when r < 1.
    const double zd = static_cast<double>(z_max);
    const double log_r = eta_star - quad * (zd + 0.5) - std::log(zd + 1.0);
    const double log_t_next =
        (zd + 1.0) * eta_star - 0.5 * (zd + 1.0) * (zd + 1.0) * quad -
        std::lgamma(zd + 2.0);
    bool ok = false;
    if (log_r < 0.0) {
      const double r = std::exp(log_r);
      const double t_next = std::exp(log_t_next - log_max);
      const double tail0 = t_next / (1.0 - r);
      const double tail1 = (zd + 1.0) * tail0 + t_next * r / ((1.0 - r) * (1.0 - r));
      ok = tail0 <= 1e-14 * s0 && tail1 <= 1e-14 * std::max(s1, 1.0);
    }
    if (!ok)
      throw numeric_error("poisson dstar_mean: truncation horizon " +
                          std::to_string(z_max) + " insufficient at eta* = " +
                          std::to_string(eta_star) + ", quad = " + std::to_string(quad));
  }
  return s1 / s0;
}

long poisson_truncation(double eta_star) {
  const double guess = 10.0 * std::exp(std::min(eta_star, 6.0));
  const long z = static_cast<long>(std::ceil(guess));
  return std::min<long>(500, std::max<long>(50, z));
}

void validate_response(GlmFamily family, const Vector& y) {
  switch (family) {
    case GlmFamily::logistic:
      for (Index i = 0; i < y.size(); ++i) {
        if (y[i] != 0.0 && y[i] != 1.0)
          throw validation_error("logistic response must be exactly 0 or 1, got " +
                                 std::to_string(y[i]) + " at observation " +
                                 std::to_string(i));
      }
      break;
    case GlmFamily::poisson:
      for (Index i = 0; i < y.size(); ++i) {
        if (!(y[i] >= 0.0) || y[i] != std::floor(y[i]))
          throw validation_error("poisson response must be a nonnegative integer, got " +
                                 std::to_string(y[i]) + " at observation " +
                                 std::to_string(i));
      }
      break;
  }
}

}  // namespace

double dstar_mean(GlmFamily family, double eta_star, double quad) {
  if (!std::isfinite(eta_star) || !std::isfinite(quad) || quad < 0.0)
    throw validation_error("dstar_mean: eta* must be finite and quad >= 0");
  switch (family) {
    case GlmFamily::logistic:
      return logistic_cdf(eta_star - 0.5 * quad);
    case GlmFamily::poisson: {
      double mean;
      if (quad == 0.0) {
        mean = std::exp(eta_star);  // the series telescopes
      } else {
        mean = poisson_series_ratio(eta_star, quad, poisson_truncation(eta_star), true);
      }
      return std::max(mean, std::numeric_limits<double>::min());
    }
  }
  throw validation_error("dstar_mean: unknown family");
}

double dstar_mean_poisson_truncated(double eta_star, double quad, long z_max) {
  if (z_max < 1) throw config_error("dstar_mean_poisson_truncated: z_max must be >= 1");
  return poisson_series_ratio(eta_star, quad, z_max, false);
}

std::pair<double, Vector> conditional_score(GlmFamily family, double mu,
                                            const Vector& beta, const Matrix& W,
                                            const Vector& y,
                                            const MeasurementModel& sigma_uu) {
  if (W.rows() != y.size() || W.cols() != beta.size() || sigma_uu.dim() != beta.size())
    throw validation_error("conditional_score: dimension mismatch");
  const double quad = sigma_uu.quad(beta);
  const Vector sb = sigma_uu.apply(beta);
  Vector eta_star = W * beta;
  eta_star.array() += mu;
  eta_star.noalias() += quad * y;

  Vector resid(y.size());
  for (Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(eta_star[i]))
      throw numeric_error("conditional_score: non-finite eta* at observation " +
                          std::to_string(i));
    resid[i] = y[i] - dstar_mean(family, eta_star[i], quad);
  }
  // sum_i r_i delta_i with delta_i = w_i + y_i Sigma_uu beta.
  Vector slope = W.transpose() * resid;
  slope.noalias() += sb * y.dot(resid);
  return {resid.sum(), std::move(slope)};
}

FitResult conditional_score_lasso(GlmFamily family, const Matrix& W, const Vector& y,
                                  const MeasurementModel& sigma_uu, double kappa,
                                  const GlmConfig& config,
                                  const std::optional<Vector>& init, double mu_init) {
  if (W.rows() != y.size()) throw validation_error("conditional_score_lasso: W/y mismatch");
  if (sigma_uu.dim() != W.cols())
    throw validation_error("conditional_score_lasso: Sigma_uu dimension mismatch");
  if (!(kappa >= 0.0)) throw config_error("conditional_score_lasso: kappa must be >= 0");
  require_finite(W, "W");
  require_finite(y, "y");
  validate_response(family, y);

  const Index p = W.cols();
  Vector beta = init ? project_l1(*init, kappa) : Vector::Zero(p);
  double mu = mu_init;
  double alpha = config.alpha;

  const bool fixed_budget = config.exact_iterations > 0;
  const long budget = fixed_budget ? config.exact_iterations : config.max_iter;

  FitResult fit;
  fit.tuning_kind = TuningKind::kappa;
  fit.tuning_value = kappa;

  std::vector<double> score_history;
  double min_score_norm = std::numeric_limits<double>::infinity();
  double prev_score_norm = std::numeric_limits<double>::infinity();
  double score_norm = 0.0;
  bool diverged = false;
  bool converged = false;
  long iter = 0;

  for (; iter < budget; ++iter) {
    const double quad = sigma_uu.quad(beta);
    const Vector sb = sigma_uu.apply(beta);
    Vector eta_star = W * beta;
    eta_star.array() += mu;
    eta_star.noalias() += quad * y;

    Vector resid(y.size());
    for (Index i = 0; i < y.size(); ++i) {
      if (!std::isfinite(eta_star[i]))
        throw numeric_error("conditional_score_lasso: non-finite eta* at observation " +
                            std::to_string(i));
      resid[i] = y[i] - dstar_mean(family, eta_star[i], quad);
    }
    const double g0 = resid.sum();
    Vector gb = W.transpose() * resid;
    gb.noalias() += sb * y.dot(resid);

    score_norm = std::sqrt(g0 * g0 + gb.squaredNorm());
    score_history.push_back(score_norm);
    // Divergence gate: 10x above the running minimum and back above the
    // starting score. The second clause keeps near-convergence jitter at
    // tiny score norms from tripping the detector.
    if (score_norm > 10.0 * min_score_norm && score_norm > score_history.front() &&
        min_score_norm > 0.0) {
      diverged = true;
      fit.note = "score norm grew to " + std::to_string(score_norm) +
                 " from its minimum " + std::to_string(min_score_norm);
      break;
    }
    min_score_norm = std::min(min_score_norm, score_norm);
    if (config.halve_on_increase && score_norm > prev_score_norm) alpha *= 0.5;
    prev_score_norm = score_norm;

    const double mu_next = mu + alpha * g0;
    const Vector beta_next = project_l1(beta + alpha * gb, kappa);
    const double change =
        std::max(std::abs(mu_next - mu), (beta_next - beta).lpNorm<Eigen::Infinity>());
    mu = mu_next;
    beta = beta_next;

    if (!fixed_budget && change < config.tol) {
      converged = true;
      ++iter;
      break;
    }
  }
  if (fixed_budget) converged = !diverged;  // replication mode: budget is the contract

  fit.intercept = mu;
  fit.beta = beta;
  fit.active_set = nonzero_indices(beta);
  fit.iterations = iter;
  fit.converged = converged && !diverged;
  fit.objective = score_norm;  // no likelihood-scale loss exists for this model
  fit.exit_residual = score_norm;
  fit.interior = beta.lpNorm<1>() < kappa * (1.0 - 1e-8);
  if (config.record_score_norm || diverged) fit.trace = std::move(score_history);
  return fit;
}

FitResult naive_glm_lasso(GlmFamily family, const Matrix& W, const Vector& y,
                          double kappa, const GlmConfig& config,
                          const std::optional<Vector>& init, double mu_init) {
  return conditional_score_lasso(family, W, y, MeasurementModel::zero(W.cols()), kappa,
                                 config, init, mu_init);
}

}  // namespace melasso
