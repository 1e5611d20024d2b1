#pragma once

#include "melasso/types.hpp"

#include <vector>

namespace melasso {

struct LassoConfig {
  double tol = 1e-7;          // KKT residual tolerance
  long max_sweeps = 100000;   // coordinate-descent sweeps
  bool record_objective = false;
};

/// Naive lasso: minimize (1/n)||y - W b||_2^2 + lambda ||b||_1 by cyclic
/// coordinate descent with cached covariance updates. A coefficient is zero
/// iff soft-thresholding produced exactly 0.0. Non-convergence at max_sweeps
/// flags converged=false rather than throwing.
FitResult naive_lasso(const Matrix& W, const Vector& y, double lambda,
                      const LassoConfig& config = {});

/// Warm-started solutions along a strictly decreasing lambda grid.
std::vector<FitResult> lasso_path(const Matrix& W, const Vector& y,
                                  const std::vector<double>& lambdas,
                                  const LassoConfig& config = {});

/// Max KKT violation of `fit` for the naive objective: with
/// g = -(2/n) W'(y - W b), returns max over j of |g_j + lambda sign(b_j)|
/// (active) and max(|g_j| - lambda, 0) (inactive).
double kkt_residual_naive(const Matrix& W, const Vector& y, const FitResult& fit);

/// Smallest lambda with an all-zero solution: (2/n)||W'y||_inf.
double lambda_max(const Matrix& W, const Vector& y);

/// Log-spaced descending grid from lmax down to min_ratio * lmax.
std::vector<double> lambda_grid(double lmax, int count, double min_ratio);

}  // namespace melasso
