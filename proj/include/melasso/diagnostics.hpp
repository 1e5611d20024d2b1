#pragma once

#include "melasso/types.hpp"

#include <vector>

namespace melasso {

struct SelectionMetrics {
  long tp = 0;
  long fp = 0;
  bool sign_correct = false;
  double l1_err = 0.0;
  double l2_err = 0.0;
};

struct DiagnosticsReport {
  double theta_ic_me = 0.0;
  double theta_ic_cl = 0.0;
  double mec_residual = 0.0;
  std::vector<int> detectable_set;
  bool beta_min_ok = false;
  double kkt_residual = 0.0;
};

/// Irrepresentable condition under measurement error:
/// ||C_ww(S0c,S0) C_ww(S0,S0)^-1 sign(beta0_S0)||_inf. The condition holds
/// when the value is < 1. Vacuously 0 when S0 covers all covariates.
double ic_me(const Matrix& C_ww, const std::vector<int>& S0, const Vector& sign_beta);

/// Measurement error condition residual:
/// max-abs entry of S_ww(S0c,S0) S_ww(S0,S0)^-1 S_uu(S0,S0) - S_uu(S0c,S0).
double mec_residual(const Matrix& sigma_ww, const Matrix& sigma_uu,
                    const std::vector<int>& S0);

/// Irrepresentable condition for the corrected lasso: the IC-ME with both
/// covariance blocks debiased by Sigma_uu.
double ic_cl(const Matrix& C_ww, const Matrix& sigma_uu, const std::vector<int>& S0,
             const Vector& sign_beta);

/// The detectable subset of S0 in the noiseless diagnostic: coefficients
/// exceeding (lambda/2) * ||C_ww(S0,S0)^-1||_inf-op + |v_j| with
/// v = C_ww(S0,S0)^-1 C_wu(S0,S0) beta0_S0. Requires U, so simulation-only.
std::vector<int> detectable_set(const Matrix& C_ww, const Matrix& C_wu,
                                const std::vector<int>& S0, const Vector& beta0,
                                double lambda);

/// Elementwise check of |beta0_S0| > |S_ww(S0,S0)^-1 S_uu(S0,S0) beta0_S0|.
bool beta_min_condition(const Matrix& sigma_ww, const Matrix& sigma_uu,
                        const std::vector<int>& S0, const Vector& beta0);

SelectionMetrics selection_metrics(const Vector& beta_hat, const Vector& beta0);

}  // namespace melasso
