#include "melasso/measurement.hpp"

#include <algorithm>
#include <cmath>

namespace melasso {

MeasurementModel MeasurementModel::zero(Index p) {
  MeasurementModel m;
  m.kind_ = Kind::zero;
  m.p_ = p;
  return m;
}

MeasurementModel MeasurementModel::scaled_identity(Index p, double variance) {
  if (!(variance >= 0.0))
    throw validation_error("measurement model: variance must be >= 0");
  if (variance == 0.0) return zero(p);
  MeasurementModel m;
  m.kind_ = Kind::scaled_identity;
  m.p_ = p;
  m.variance_ = variance;
  return m;
}

MeasurementModel MeasurementModel::diagonal(Vector variances) {
  for (Index j = 0; j < variances.size(); ++j) {
    if (!(variances[j] >= 0.0))
      throw validation_error("measurement model: diagonal entries must be >= 0");
  }
  if (variances.size() > 0 && variances.maxCoeff() == 0.0)
    return zero(variances.size());
  MeasurementModel m;
  m.kind_ = Kind::diagonal;
  m.p_ = variances.size();
  m.diag_ = std::move(variances);
  return m;
}

MeasurementModel MeasurementModel::toeplitz_decay(Index p, double rho) {
  if (!(rho > 0.0 && rho < 1.0))
    throw validation_error("measurement model: toeplitz decay needs rho in (0,1)");
  MeasurementModel m;
  m.kind_ = Kind::toeplitz_decay;
  m.p_ = p;
  m.rho_ = rho;
  // Largest eigenvalue by power iteration on the O(p) apply.
  Vector v = Vector::Constant(p, 1.0 / std::sqrt(static_cast<double>(p)));
  double lam = rho;
  for (int it = 0; it < 100; ++it) {
    Vector next = m.apply(v);
    const double norm = next.norm();
    if (norm == 0.0) break;
    next /= norm;
    const double estimate = next.dot(m.apply(next));
    if (it > 4 && std::abs(estimate - lam) <= 1e-12 * estimate) {
      lam = estimate;
      break;
    }
    lam = estimate;
    v = next;
  }
  m.spectral_ = lam;
  return m;
}

MeasurementModel MeasurementModel::dense_matrix(Matrix mat) {
  const Index p = mat.rows();
  if (mat.cols() != p) throw validation_error("measurement model: matrix must be square");
  require_finite(mat, "measurement covariance");
  for (Index j = 0; j < p; ++j)
    for (Index k = j + 1; k < p; ++k)
      if (mat(j, k) != mat(k, j))
        throw validation_error("measurement model: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(mat, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo < -1e-10 * std::max(hi, 0.0))
    throw validation_error("measurement model: matrix is not PSD (eigenvalue " +
                           std::to_string(lo) + ")");
  MeasurementModel m;
  m.kind_ = Kind::dense;
  m.p_ = p;
  m.full_ = std::move(mat);
  m.spectral_ = std::max(hi, 0.0);
  return m;
}

MeasurementModel MeasurementModel::from_spec(const CovarianceSpec& spec) {
  switch (spec.kind) {
    case CovKind::identity_scaled:
      return scaled_identity(spec.p, spec.scale);
    case CovKind::diagonal_vector:
      return diagonal(spec.diag);
    case CovKind::toeplitz_decay:
      return toeplitz_decay(spec.p, spec.rho);
    default:
      return dense_matrix(realize(spec));
  }
}

bool MeasurementModel::is_zero() const { return kind_ == Kind::zero; }

Vector MeasurementModel::apply(const Vector& beta) const {
  if (beta.size() != p_)
    throw validation_error("measurement model: dimension mismatch in apply");
  switch (kind_) {
    case Kind::zero: return Vector::Zero(p_);
    case Kind::scaled_identity: return variance_ * beta;
    case Kind::diagonal: return diag_.cwiseProduct(beta);
    case Kind::toeplitz_decay: {
      // (T beta)_j with T_jk = rho^|j-k| via two geometric recursions, then
      // scale by rho for the rho^(1+|j-k|) kernel.
      Vector fwd(p_), bwd(p_);
      fwd[0] = beta[0];
      for (Index j = 1; j < p_; ++j) fwd[j] = rho_ * fwd[j - 1] + beta[j];
      bwd[p_ - 1] = beta[p_ - 1];
      for (Index j = p_ - 2; j >= 0; --j) bwd[j] = rho_ * bwd[j + 1] + beta[j];
      Vector out(p_);
      for (Index j = 0; j < p_; ++j) out[j] = rho_ * (fwd[j] + bwd[j] - beta[j]);
      return out;
    }
    case Kind::dense: return full_ * beta;
  }
  return Vector::Zero(p_);
}

double MeasurementModel::quad(const Vector& beta) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::scaled_identity: return std::max(0.0, variance_ * beta.squaredNorm());
    case Kind::diagonal: return std::max(0.0, diag_.cwiseProduct(beta).dot(beta));
    case Kind::toeplitz_decay: return std::max(0.0, beta.dot(apply(beta)));
    case Kind::dense: return std::max(0.0, beta.dot(full_ * beta));
  }
  return 0.0;
}

double MeasurementModel::spectral_norm() const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::scaled_identity: return variance_;
    case Kind::diagonal: return diag_.size() ? diag_.maxCoeff() : 0.0;
    case Kind::toeplitz_decay: return spectral_;
    case Kind::dense: return spectral_;
  }
  return 0.0;
}

double MeasurementModel::max_abs_entry() const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::scaled_identity: return variance_;
    case Kind::diagonal: return diag_.size() ? diag_.cwiseAbs().maxCoeff() : 0.0;
    case Kind::toeplitz_decay: return rho_;  // the diagonal value
    case Kind::dense: return full_.cwiseAbs().maxCoeff();
  }
  return 0.0;
}

namespace {

double toeplitz_entry(double rho, Index i, Index j) {
  return std::pow(rho, 1.0 + std::abs(static_cast<double>(i - j)));
}

}  // namespace

Matrix MeasurementModel::dense() const {
  switch (kind_) {
    case Kind::zero: return Matrix::Zero(p_, p_);
    case Kind::scaled_identity: {
      Matrix m = Matrix::Zero(p_, p_);
      m.diagonal().setConstant(variance_);
      return m;
    }
    case Kind::diagonal: {
      Matrix m = Matrix::Zero(p_, p_);
      m.diagonal() = diag_;
      return m;
    }
    case Kind::toeplitz_decay: {
      Matrix m(p_, p_);
      for (Index i = 0; i < p_; ++i)
        for (Index j = i; j < p_; ++j) {
          const double v = toeplitz_entry(rho_, i, j);
          m(i, j) = v;
          m(j, i) = v;
        }
      return m;
    }
    case Kind::dense: return full_;
  }
  return Matrix::Zero(p_, p_);
}

Matrix MeasurementModel::submatrix(const std::vector<int>& rows,
                                   const std::vector<int>& cols) const {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const Index i = rows[r], j = cols[c];
      double v = 0.0;
      switch (kind_) {
        case Kind::zero: v = 0.0; break;
        case Kind::scaled_identity: v = (i == j) ? variance_ : 0.0; break;
        case Kind::diagonal: v = (i == j) ? diag_[i] : 0.0; break;
        case Kind::toeplitz_decay: v = toeplitz_entry(rho_, i, j); break;
        case Kind::dense: v = full_(i, j); break;
      }
      out(static_cast<Index>(r), static_cast<Index>(c)) = v;
    }
  }
  return out;
}

}  // namespace melasso
