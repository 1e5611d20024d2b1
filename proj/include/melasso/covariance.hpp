#pragma once

#include "melasso/types.hpp"

#include <nlohmann/json_fwd.hpp>

namespace melasso {

enum class CovKind {
  identity_scaled,
  block_toeplitz,
  toeplitz_decay,
  diagonal_vector,
  dense,
};

// Generator description for the population covariances used by the
// simulator (Sigma_xx and Sigma_uu). Realized matrices are built entry by
// entry from the closed-form definitions, so they are symmetric to bit
// equality by construction.
struct CovarianceSpec {
  CovKind kind = CovKind::identity_scaled;
  Index p = 0;
  double scale = 1.0;      // per-unit variance (identity-scaled, block-toeplitz)
  double rho = 0.0;        // decay base, in (0,1), for the toeplitz kinds
  Index block_size = 0;    // covariates per block (block-toeplitz)
  Vector diag;             // diagonal-vector kind
  Matrix dense;            // dense kind

  static CovarianceSpec identity_scaled(Index p, double scale);
  static CovarianceSpec block_toeplitz(Index p, Index block_size, double rho,
                                       double scale = 1.0);
  static CovarianceSpec toeplitz_decay(Index p, double rho);
  static CovarianceSpec diagonal(Vector diag);
  static CovarianceSpec dense_matrix(Matrix m);
};

/// Materialize the p-by-p covariance described by `spec`.
/// Throws config_error for inconsistent parameters and validation_error for
/// non-PSD dense input (the message names the offending eigenvalue).
Matrix realize(const CovarianceSpec& spec);

/// Lower-triangular L with L L' = m. PSD-singular input yields a factor with
/// zero columns and the same reconstruction guarantee; indefinite input
/// throws numeric_error naming the pivot index.
Matrix cholesky_factor(const Matrix& m);

void to_json(nlohmann::json& j, const CovarianceSpec& spec);
void from_json(const nlohmann::json& j, CovarianceSpec& spec);

}  // namespace melasso
