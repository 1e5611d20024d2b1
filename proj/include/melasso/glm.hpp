#pragma once

#include "melasso/measurement.hpp"
#include "melasso/simulate.hpp"
#include "melasso/types.hpp"

#include <optional>
#include <utility>

namespace melasso {

struct GlmConfig {
  double alpha = 0.01;  // ascent step on the summed score
  long max_iter = 5000;
  double tol = 1e-6;          // stop when max(|d mu|, ||d beta||_inf) < tol
  long exact_iterations = 0;  // > 0: run exactly this many iterations
  bool halve_on_increase = false;  // halve alpha when the score norm grows
  bool record_score_norm = false;
};

/// dD*/deta* of the conditional density. Logistic: H(eta* - quad/2) with H
/// the logit inverse. Poisson: ratio of the truncated series
/// sum_z z (z!)^-1 exp(z eta* - z^2 quad / 2) over the same sum without the
/// leading z, evaluated in log space; quad = 0 reduces to exp(eta*).
double dstar_mean(GlmFamily family, double eta_star, double quad);

/// Poisson series with an explicit truncation horizon (test hook for the
/// truncation-invariance checks).
double dstar_mean_poisson_truncated(double eta_star, double quad, long z_max);

/// Conditional score at (mu, beta): pair of the intercept component
/// sum_i (y_i - dD*/deta*_i) and the slope component
/// sum_i (y_i - dD*/deta*_i) delta_i, with delta_i = w_i + y_i Sigma_uu beta.
std::pair<double, Vector> conditional_score(GlmFamily family, double mu,
                                            const Vector& beta, const Matrix& W,
                                            const Vector& y,
                                            const MeasurementModel& sigma_uu);

/// Conditional-scores lasso: ascent iteration with unpenalized intercept
/// update and l1-ball-projected slope update, run until the iterate change
/// falls below tol (or for an exact iteration budget in replication mode).
FitResult conditional_score_lasso(GlmFamily family, const Matrix& W, const Vector& y,
                                  const MeasurementModel& sigma_uu, double kappa,
                                  const GlmConfig& config = {},
                                  const std::optional<Vector>& init = std::nullopt,
                                  double mu_init = 0.0);

/// Naive GLM lasso: the same projected iteration with Sigma_uu forced to 0.
FitResult naive_glm_lasso(GlmFamily family, const Matrix& W, const Vector& y,
                          double kappa, const GlmConfig& config = {},
                          const std::optional<Vector>& init = std::nullopt,
                          double mu_init = 0.0);

}  // namespace melasso
