#pragma once

#include "melasso/corrected.hpp"
#include "melasso/lasso.hpp"
#include "melasso/measurement.hpp"
#include "melasso/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace melasso {

// K-fold plan with a seeded assignment: a deterministic function of
// (n, folds, seed); fold sizes differ by at most one. The held-out loss is
// squared error.
struct CvPlan {
  int folds = 10;
  std::vector<double> grid;    // lambda grids descend, kappa grids ascend
  std::vector<int> assignment; // fold id per observation
};

CvPlan make_cv_plan(Index n, int folds, std::vector<double> grid, std::uint64_t seed);

enum class CvSolver { naive_lasso, corrected_ccl };

// Held-out loss: plain squared error, or the corrected lasso's own loss
// ||y_test - W_test b||^2 / n_test - b' Sigma_uu b (the measurement-error
// debiased prediction loss; only meaningful for the corrected solver).
enum class CvLoss { squared_error, corrected_loss };

struct CvResult {
  double best = 0.0;
  std::vector<double> curve;  // mean held-out loss per grid value
  std::vector<std::string> warnings;
};

/// Cross-validated tuning over the plan's grid; every fold sweeps the grid
/// with warm starts. Ties resolve to the sparser model (larger lambda /
/// smaller kappa). Folds whose training response has zero variance are
/// skipped with a warning.
CvResult cv_select(CvSolver solver, const Matrix& W, const Vector& y,
                   const MeasurementModel* sigma_uu, const CvPlan& plan,
                   const LassoConfig& lasso_cfg = {},
                   const CorrectedConfig& corrected_cfg = {},
                   CvLoss loss = CvLoss::squared_error);

/// The kappa grid of the corrected-lasso protocol: `count` values equally
/// spaced in [lo_frac * radius, radius], ascending.
std::vector<double> kappa_grid(double radius, int count = 100, double lo_frac = 1e-3);

struct ElbowResult {
  double kappa = 0.0;
  bool low_confidence = false;
};

/// Elbow rule on a descending kappa grid with nonzero counts per kappa:
/// returns the largest kappa at which |nnz_i - nnz_{i+1}| <= flat_tol for at
/// least min_run consecutive steps. Without a plateau, falls back to the
/// kappa minimizing the discrete second difference and flags low confidence.
ElbowResult elbow_select(const std::vector<double>& kappa_grid_desc,
                         const std::vector<long>& nnz, long flat_tol = 1,
                         int min_run = 3);

}  // namespace melasso
