#include "melasso/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace melasso {

namespace {

Matrix block(const Matrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      out(static_cast<Index>(r), static_cast<Index>(c)) = m(rows[r], cols[c]);
  return out;
}

std::vector<int> complement(const std::vector<int>& S0, Index p) {
  std::vector<char> in(static_cast<std::size_t>(p), 0);
  for (int j : S0) {
    if (j < 0 || j >= p) throw validation_error("diagnostics: S0 index out of range");
    in[static_cast<std::size_t>(j)] = 1;
  }
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(p) - S0.size());
  for (Index j = 0; j < p; ++j)
    if (!in[static_cast<std::size_t>(j)]) out.push_back(static_cast<int>(j));
  return out;
}

// Inverse of a symmetric block with a hard condition-number guard: the
// diagnostics must fail loudly rather than silently regularize.
Matrix guarded_inverse(const Matrix& m, const std::string& what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  const Vector evs = es.eigenvalues().cwiseAbs();
  const double hi = evs.maxCoeff();
  const double lo = evs.minCoeff();
  if (lo == 0.0 || hi / lo > 1e12)
    throw numeric_error(what + " is numerically singular (condition number " +
                        (lo == 0.0 ? std::string("inf") : std::to_string(hi / lo)) + ")");
  return es.eigenvectors() *
         es.eigenvalues().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

void check_square(const Matrix& m, const std::string& name) {
  if (m.rows() != m.cols()) throw validation_error(name + " must be square");
}

}  // namespace

double ic_me(const Matrix& C_ww, const std::vector<int>& S0, const Vector& sign_beta) {
  check_square(C_ww, "C_ww");
  if (static_cast<std::size_t>(sign_beta.size()) != S0.size())
    throw validation_error("ic_me: sign vector length does not match S0");
  const auto S0c = complement(S0, C_ww.rows());
  if (S0c.empty()) return 0.0;  // no irrelevant covariates: vacuous condition
  const Matrix inv = guarded_inverse(block(C_ww, S0, S0), "C_ww(S0,S0)");
  const Vector v = block(C_ww, S0c, S0) * (inv * sign_beta);
  return v.lpNorm<Eigen::Infinity>();
}

double mec_residual(const Matrix& sigma_ww, const Matrix& sigma_uu,
                    const std::vector<int>& S0) {
  check_square(sigma_ww, "Sigma_ww");
  check_square(sigma_uu, "Sigma_uu");
  if (sigma_ww.rows() != sigma_uu.rows())
    throw validation_error("mec_residual: covariance dimensions differ");
  const auto S0c = complement(S0, sigma_ww.rows());
  if (S0c.empty()) return 0.0;
  const Matrix inv = guarded_inverse(block(sigma_ww, S0, S0), "Sigma_ww(S0,S0)");
  const Matrix lhs = block(sigma_ww, S0c, S0) * inv * block(sigma_uu, S0, S0) -
                     block(sigma_uu, S0c, S0);
  return lhs.cwiseAbs().maxCoeff();
}

double ic_cl(const Matrix& C_ww, const Matrix& sigma_uu, const std::vector<int>& S0,
             const Vector& sign_beta) {
  check_square(C_ww, "C_ww");
  check_square(sigma_uu, "Sigma_uu");
  if (C_ww.rows() != sigma_uu.rows())
    throw validation_error("ic_cl: covariance dimensions differ");
  if (static_cast<std::size_t>(sign_beta.size()) != S0.size())
    throw validation_error("ic_cl: sign vector length does not match S0");
  const auto S0c = complement(S0, C_ww.rows());
  if (S0c.empty()) return 0.0;
  const Matrix corrected_block = block(C_ww, S0, S0) - block(sigma_uu, S0, S0);
  const Matrix inv = guarded_inverse(corrected_block, "C_ww(S0,S0) - Sigma_uu(S0,S0)");
  const Matrix cross = block(C_ww, S0c, S0) - block(sigma_uu, S0c, S0);
  const Vector v = cross * (inv * sign_beta);
  return v.lpNorm<Eigen::Infinity>();
}

std::vector<int> detectable_set(const Matrix& C_ww, const Matrix& C_wu,
                                const std::vector<int>& S0, const Vector& beta0,
                                double lambda) {
  check_square(C_ww, "C_ww");
  if (C_wu.rows() != C_ww.rows() || C_wu.cols() != C_ww.cols())
    throw validation_error("detectable_set: C_wu shape must match C_ww");
  if (!(lambda >= 0.0)) throw validation_error("detectable_set: lambda must be >= 0");
  if (S0.empty()) return {};

  const Matrix inv = guarded_inverse(block(C_ww, S0, S0), "C_ww(S0,S0)");
  // sup over ||tau||_inf <= 1 of ||inv tau||_inf is the max absolute row sum.
  const double opnorm = inv.cwiseAbs().rowwise().sum().maxCoeff();

  Vector beta_s0(static_cast<Index>(S0.size()));
  for (std::size_t k = 0; k < S0.size(); ++k)
    beta_s0[static_cast<Index>(k)] = beta0[S0[k]];
  const Vector v = inv * (block(C_wu, S0, S0) * beta_s0);

  std::vector<int> detectable;
  for (std::size_t k = 0; k < S0.size(); ++k) {
    const double threshold = 0.5 * lambda * opnorm + std::abs(v[static_cast<Index>(k)]);
    if (std::abs(beta0[S0[k]]) > threshold) detectable.push_back(S0[k]);
  }
  std::sort(detectable.begin(), detectable.end());
  return detectable;
}

bool beta_min_condition(const Matrix& sigma_ww, const Matrix& sigma_uu,
                        const std::vector<int>& S0, const Vector& beta0) {
  if (S0.empty()) return true;
  const Matrix inv = guarded_inverse(block(sigma_ww, S0, S0), "Sigma_ww(S0,S0)");
  Vector beta_s0(static_cast<Index>(S0.size()));
  for (std::size_t k = 0; k < S0.size(); ++k)
    beta_s0[static_cast<Index>(k)] = beta0[S0[k]];
  const Vector bias = inv * (block(sigma_uu, S0, S0) * beta_s0);
  for (Index k = 0; k < beta_s0.size(); ++k)
    if (!(std::abs(beta_s0[k]) > std::abs(bias[k]))) return false;
  return true;
}

SelectionMetrics selection_metrics(const Vector& beta_hat, const Vector& beta0) {
  if (beta_hat.size() != beta0.size())
    throw validation_error("selection_metrics: coefficient lengths differ");
  SelectionMetrics m;
  bool signs_ok = true;
  for (Index j = 0; j < beta0.size(); ++j) {
    const bool est = beta_hat[j] != 0.0;
    const bool truth = beta0[j] != 0.0;
    if (est && truth) ++m.tp;
    if (est && !truth) ++m.fp;
    const double sh = beta_hat[j] > 0.0 ? 1.0 : (beta_hat[j] < 0.0 ? -1.0 : 0.0);
    const double st = beta0[j] > 0.0 ? 1.0 : (beta0[j] < 0.0 ? -1.0 : 0.0);
    if (sh != st) signs_ok = false;
  }
  m.sign_correct = signs_ok;
  m.l1_err = (beta_hat - beta0).lpNorm<1>();
  m.l2_err = (beta_hat - beta0).norm();
  return m;
}

}  // namespace melasso
