#pragma once

#include "melasso/measurement.hpp"
#include "melasso/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace melasso {

struct CorrectedConfig {
  // 0 selects backtracking from alpha0 = 1/L with
  // L = 2 (smax(W)^2 / n + smax(Sigma_uu)); a positive value runs the
  // fixed-step variant used for paper-style replication.
  double fixed_alpha = 0.0;
  long max_iter = 5000;
  double tol_change = 1e-7;  // relative parameter change
  double tol_pg = 1e-6;      // projected-gradient residual
  bool record_objective = false;
  long divergence_window = 50;  // consecutive objective increases tolerated (fixed step)
};

/// Constrained corrected lasso (CCL): stationary point of
///   (1/n)||y - W b||_2^2 - b' Sigma_uu b   over ||b||_1 <= kappa
/// by projected gradient descent. The certificate at exit is
/// ||b - P(b - a grad, kappa)||_2 <= tol_pg * max(1, ||b||_2) with `a` the
/// last accepted step.
FitResult corrected_lasso_constrained(const Matrix& W, const Vector& y,
                                      const MeasurementModel& sigma_uu, double kappa,
                                      const CorrectedConfig& config = {},
                                      const std::optional<Vector>& init = std::nullopt);

/// Regularized corrected lasso (RCL): stationary point of
///   (1/n)||y - W b||_2^2 - b' Sigma_uu b + lambda ||b||_1
/// over ||b||_1 <= radius_R, by projected composite gradient (gradient step
/// on the smooth loss, soft-threshold at alpha*lambda, projection onto the
/// R-ball). The result reports whether the solution is interior,
/// ||b||_1 < R (1 - 1e-8).
FitResult corrected_lasso_regularized(const Matrix& W, const Vector& y,
                                      const MeasurementModel& sigma_uu, double lambda,
                                      double radius_R, const CorrectedConfig& config = {},
                                      const std::optional<Vector>& init = std::nullopt);

/// Warm-started constrained solutions along a strictly increasing kappa
/// grid; the loss precomputations are shared across the sweep.
std::vector<FitResult> ccl_path(const Matrix& W, const Vector& y,
                                const MeasurementModel& sigma_uu,
                                const std::vector<double>& kappas,
                                const CorrectedConfig& config = {});

/// Max KKT violation for the corrected objective at an interior point:
/// with g = -(2/n) W'(y - W b) - 2 Sigma_uu b, returns
/// max(|g_j + lambda sign(b_j)| active, max(|g_j| - lambda, 0) inactive).
/// For constrained fits lambda = 0 applies. Boundary fits are rejected with
/// contract_error: the KKT conditions do not characterize critical points
/// on the boundary of the feasible set.
double kkt_residual_corrected(const Matrix& W, const Vector& y,
                              const MeasurementModel& sigma_uu, const FitResult& fit);

/// Deterministically seeded multi-start for the constrained solver; starts
/// are drawn uniformly from B(kappa). Returns one FitResult per start.
std::vector<FitResult> corrected_multi_start(const Matrix& W, const Vector& y,
                                             const MeasurementModel& sigma_uu,
                                             double kappa, const CorrectedConfig& config,
                                             int starts, std::uint64_t seed);

}  // namespace melasso
