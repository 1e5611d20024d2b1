#include "melasso/tuning.hpp"

#include "melasso/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace melasso {

CvPlan make_cv_plan(Index n, int folds, std::vector<double> grid, std::uint64_t seed) {
  if (folds < 2) throw config_error("cv: need at least 2 folds");
  if (n < folds) throw config_error("cv: fewer observations than folds");
  if (grid.empty()) throw config_error("cv: empty tuning grid");

  CvPlan plan;
  plan.folds = folds;
  plan.grid = std::move(grid);

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  RngStream rng(seed);
  rng.shuffle(perm.begin(), perm.end());

  plan.assignment.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t i = 0; i < perm.size(); ++i)
    plan.assignment[static_cast<std::size_t>(perm[i])] = static_cast<int>(i % folds);
  return plan;
}

namespace {

struct FoldData {
  Matrix W_train, W_test;
  Vector y_train, y_test;
};

FoldData split_fold(const Matrix& W, const Vector& y, const std::vector<int>& assignment,
                    int fold) {
  const Index n = W.rows();
  Index n_test = 0;
  for (Index i = 0; i < n; ++i)
    if (assignment[static_cast<std::size_t>(i)] == fold) ++n_test;
  FoldData d;
  d.W_train.resize(n - n_test, W.cols());
  d.W_test.resize(n_test, W.cols());
  d.y_train.resize(n - n_test);
  d.y_test.resize(n_test);
  Index tr = 0, te = 0;
  for (Index i = 0; i < n; ++i) {
    if (assignment[static_cast<std::size_t>(i)] == fold) {
      d.W_test.row(te) = W.row(i);
      d.y_test[te++] = y[i];
    } else {
      d.W_train.row(tr) = W.row(i);
      d.y_train[tr++] = y[i];
    }
  }
  return d;
}

double fold_mse(const Matrix& W_test, const Vector& y_test, const Vector& beta) {
  return (y_test - W_test * beta).squaredNorm() / static_cast<double>(y_test.size());
}

}  // namespace

CvResult cv_select(CvSolver solver, const Matrix& W, const Vector& y,
                   const MeasurementModel* sigma_uu, const CvPlan& plan,
                   const LassoConfig& lasso_cfg, const CorrectedConfig& corrected_cfg,
                   CvLoss loss) {
  if (plan.grid.empty()) throw config_error("cv_select: empty grid");
  if (static_cast<Index>(plan.assignment.size()) != W.rows())
    throw config_error("cv_select: plan does not match the data");
  if (solver == CvSolver::corrected_ccl && sigma_uu == nullptr)
    throw config_error("cv_select: corrected solver needs Sigma_uu");
  if (loss == CvLoss::corrected_loss && solver != CvSolver::corrected_ccl)
    throw config_error("cv_select: the corrected held-out loss needs the corrected solver");

  const std::size_t g = plan.grid.size();
  std::vector<double> sums(g, 0.0);
  int used_folds = 0;
  CvResult result;

  for (int fold = 0; fold < plan.folds; ++fold) {
    const FoldData d = split_fold(W, y, plan.assignment, fold);
    const double mean = d.y_train.mean();
    if ((d.y_train.array() - mean).abs().maxCoeff() == 0.0) {
      result.warnings.push_back("fold " + std::to_string(fold) +
                                " skipped: zero variance in training response");
      continue;
    }
    std::vector<FitResult> fits;
    if (solver == CvSolver::naive_lasso) {
      fits = lasso_path(d.W_train, d.y_train, plan.grid, lasso_cfg);
    } else {
      fits = ccl_path(d.W_train, d.y_train, *sigma_uu, plan.grid, corrected_cfg);
    }
    for (std::size_t i = 0; i < g; ++i) {
      double value = fold_mse(d.W_test, d.y_test, fits[i].beta);
      if (loss == CvLoss::corrected_loss) value -= sigma_uu->quad(fits[i].beta);
      sums[i] += value;
    }
    ++used_folds;
  }

  if (used_folds == 0)
    throw numeric_error("cv_select: every fold was skipped, cannot form a curve");

  result.curve.resize(g);
  for (std::size_t i = 0; i < g; ++i) result.curve[i] = sums[i] / used_folds;

  // The grid is ordered sparsest-first (descending lambda / ascending
  // kappa), so a strict comparison resolves ties toward the sparser model.
  std::size_t best = 0;
  for (std::size_t i = 1; i < g; ++i)
    if (result.curve[i] < result.curve[best]) best = i;
  result.best = plan.grid[best];
  return result;
}

std::vector<double> kappa_grid(double radius, int count, double lo_frac) {
  if (!(radius > 0.0)) throw config_error("kappa_grid: radius must be > 0");
  if (count < 1) throw config_error("kappa_grid: count must be >= 1");
  if (!(lo_frac > 0.0 && lo_frac <= 1.0))
    throw config_error("kappa_grid: lo_frac must lie in (0, 1]");
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = radius;
    return grid;
  }
  const double lo = lo_frac * radius;
  const double step = (radius - lo) / static_cast<double>(count - 1);
  for (int i = 0; i < count; ++i)
    grid[static_cast<std::size_t>(i)] = lo + step * static_cast<double>(i);
  return grid;
}

ElbowResult elbow_select(const std::vector<double>& kappa_grid_desc,
                         const std::vector<long>& nnz, long flat_tol, int min_run) {
  const std::size_t g = kappa_grid_desc.size();
  if (nnz.size() != g) throw config_error("elbow_select: grids are not aligned");
  if (min_run < 1) throw config_error("elbow_select: min_run must be >= 1");
  if (g < static_cast<std::size_t>(min_run) + 1)
    throw config_error("elbow_select: grid shorter than min_run + 1");
  for (std::size_t i = 1; i < g; ++i) {
    if (!(kappa_grid_desc[i] < kappa_grid_desc[i - 1]))
      throw config_error("elbow_select: kappa grid must be strictly decreasing");
  }
  for (long c : nnz)
    if (c < 0) throw config_error("elbow_select: negative nonzero count");

  // Largest kappa opening a run of min_run consecutive flat forward steps.
  for (std::size_t i = 0; i + static_cast<std::size_t>(min_run) < g; ++i) {
    bool flat = true;
    for (int r = 0; r < min_run; ++r) {
      const std::size_t j = i + static_cast<std::size_t>(r);
      if (std::labs(nnz[j] - nnz[j + 1]) > flat_tol) {
        flat = false;
        break;
      }
    }
    if (flat) return {kappa_grid_desc[i], false};
  }

  // No plateau: settle for the smallest curvature point.
  std::size_t best = 1;
  long best_d2 = std::numeric_limits<long>::max();
  for (std::size_t i = 1; i + 1 < g; ++i) {
    const long d2 = std::labs(nnz[i - 1] - 2 * nnz[i] + nnz[i + 1]);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return {kappa_grid_desc[best], true};
}

}  // namespace melasso
