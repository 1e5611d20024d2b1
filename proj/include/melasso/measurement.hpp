#pragma once

#include "melasso/covariance.hpp"
#include "melasso/types.hpp"

#include <vector>

namespace melasso {

// Measurement-error covariance Sigma_uu in the structured forms the solvers
// meet in practice. Keeping the structure explicit makes Sigma_uu * beta an
// O(p) operation for the diagonal families, which dominates the corrected
// solvers' per-iteration cost.
class MeasurementModel {
 public:
  enum class Kind { zero, scaled_identity, diagonal, toeplitz_decay, dense };

  MeasurementModel() = default;

  static MeasurementModel zero(Index p);
  static MeasurementModel scaled_identity(Index p, double variance);
  static MeasurementModel diagonal(Vector variances);
  // Entries rho^(1 + |j-k|); apply() runs in O(p) through the AR(1)
  // forward/backward recursion instead of a dense matvec.
  static MeasurementModel toeplitz_decay(Index p, double rho);
  static MeasurementModel dense_matrix(Matrix m);  // validates symmetric PSD
  static MeasurementModel from_spec(const CovarianceSpec& spec);

  Kind kind() const { return kind_; }
  Index dim() const { return p_; }
  bool is_zero() const;

  /// Sigma_uu * beta.
  Vector apply(const Vector& beta) const;

  /// beta' Sigma_uu beta (clamped at 0 to absorb roundoff on PSD input).
  double quad(const Vector& beta) const;

  /// Largest eigenvalue; used for step-size bounds.
  double spectral_norm() const;

  /// Largest absolute entry.
  double max_abs_entry() const;

  Matrix dense() const;
  Matrix submatrix(const std::vector<int>& rows, const std::vector<int>& cols) const;

 private:
  Kind kind_ = Kind::zero;
  Index p_ = 0;
  double variance_ = 0.0;  // scaled_identity
  double rho_ = 0.0;       // toeplitz_decay
  Vector diag_;            // diagonal
  Matrix full_;            // dense
  double spectral_ = 0.0;  // cached for dense / toeplitz_decay
};

}  // namespace melasso
