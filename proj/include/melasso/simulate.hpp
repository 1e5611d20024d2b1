#pragma once

#include "melasso/covariance.hpp"
#include "melasso/types.hpp"

#include <cstdint>
#include <vector>

namespace melasso {

enum class GlmFamily { logistic, poisson };

/// Ground truth of a simulated regression problem.
struct TrueModel {
  Vector beta0;
  std::vector<int> support;  // S0 = {j : beta0[j] != 0}, ascending
  double sigma_eps = 0.1;    // model-error sd (linear family)
  double mu0 = 0.0;          // intercept (GLM families)
  double coef_sd = 2.0;      // sd of the nonzero-coefficient draws
  CovarianceSpec sigma_xx;
  CovarianceSpec sigma_uu;
};

struct SimulatedDataset {
  Vector y;
  Matrix W;  // observed design, W = X + U exactly
  Matrix X;  // true design (simulation-only)
  Matrix U;  // measurement errors (simulation-only)
  TrueModel truth;
  bool centered = false;
};

/// Draw a sparse coefficient vector: support is a uniform random s0-subset
/// of {0..p-1} when randomize_support, else {0..s0-1}; nonzero entries are
/// i.i.d. N(0, coef_sd^2). Covariances default to Sigma_xx = I and
/// Sigma_uu = 0; callers override the spec fields as needed.
TrueModel draw_model(Index p, Index s0, double coef_sd, bool randomize_support,
                     std::uint64_t seed, std::uint64_t stream = 0);

/// Linear model: rows of X ~ N(0, Sigma_xx), eps ~ N(0, sigma_eps^2 I),
/// rows of U ~ N(0, Sigma_uu), y = X beta0 + eps, W = X + U. With `center`,
/// the columns of W (and X) and the vector y are mean-subtracted; U is then
/// recomputed as W - X so the additive identity stays exact.
SimulatedDataset simulate_linear(const TrueModel& model, Index n, bool center,
                                 std::uint64_t seed, std::uint64_t stream = 0);

/// GLM families: logistic y_i ~ Bernoulli(H(mu0 + x_i' beta0)); Poisson
/// y_i ~ Pois(exp(mu0 + x_i' beta0)) with the linear predictor guarded at
/// |eta| <= 30 (beyond that a simulation_error reports the offending eta).
/// No centering is applied.
SimulatedDataset simulate_glm(const TrueModel& model, Index n, GlmFamily family,
                              std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace melasso
