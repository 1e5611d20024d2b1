#include "melasso/corrected.hpp"

#include "melasso/projection.hpp"
#include "melasso/rng.hpp"

#include <cmath>
#include <string>

namespace melasso {

namespace {

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double spectral_norm_sq(const Matrix& W) {
  // Power iteration on W'W; enough accuracy for a step-size bound.
  const Index p = W.cols();
  Vector v = Vector::Constant(p, 1.0 / std::sqrt(static_cast<double>(p)));
  double lam = 0.0;
  for (int it = 0; it < 60; ++it) {
    Vector next = W.transpose() * (W * v);
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    next /= norm;
    const double estimate = next.dot(W.transpose() * (W * next));
    if (it > 4 && std::abs(estimate - lam) <= 1e-10 * std::max(1.0, estimate)) {
      lam = estimate;
      break;
    }
    lam = estimate;
    v = next;
  }
  return lam;
}

// Smooth corrected loss (1/n)||y - W b||^2 - b' Sigma_uu b and its gradient.
// Dense Sigma_uu folds into a precomputed Gram form so the per-iteration
// cost stays one p x p product; the structured kinds keep the cheaper
// W-based form.
struct CorrectedLoss {
  const Matrix& W;
  const Vector& y;
  const MeasurementModel& sigma_uu;
  double n;
  bool gram_form = false;
  Matrix M;       // (2/n) W'W - 2 Sigma_uu
  Vector c2;      // (2/n) W'y
  double yty_n = 0.0;

  double lip = 0.0;

  CorrectedLoss(const Matrix& W_, const Vector& y_, const MeasurementModel& s)
      : W(W_), y(y_), sigma_uu(s), n(static_cast<double>(W_.rows())) {
    yty_n = y.squaredNorm() / n;
    if (sigma_uu.kind() == MeasurementModel::Kind::dense) {
      gram_form = true;
      M.noalias() = (2.0 / n) * (W.transpose() * W);
      M.noalias() -= 2.0 * sigma_uu.dense();
      c2.noalias() = (2.0 / n) * (W.transpose() * y);
    }
    lip = 2.0 * (spectral_norm_sq(W) / n + sigma_uu.spectral_norm());
  }

  double value(const Vector& beta) const {
    if (gram_form) return yty_n - c2.dot(beta) + 0.5 * beta.dot(M * beta);
    const Vector r = y - W * beta;
    return r.squaredNorm() / n - sigma_uu.quad(beta);
  }

  Vector gradient(const Vector& beta) const {
    if (gram_form) return M * beta - c2;
    Vector g = -(2.0 / n) * (W.transpose() * (y - W * beta));
    if (!sigma_uu.is_zero()) g.noalias() -= 2.0 * sigma_uu.apply(beta);
    return g;
  }

};

void validate_corrected(const Matrix& W, const Vector& y, const MeasurementModel& s) {
  if (W.rows() != y.size()) throw validation_error("corrected lasso: W/y dimension mismatch");
  if (s.dim() != W.cols())
    throw validation_error("corrected lasso: Sigma_uu dimension does not match W");
  require_finite(W, "W");
  require_finite(y, "y");
}

// Shared projected (composite) gradient loop. lambda = 0 with ball radius
// kappa is the CCL; lambda >= 0 with radius R is the RCL.
FitResult projected_gradient(const CorrectedLoss& loss, double lambda, double radius,
                             TuningKind kind, double tuning_value,
                             const CorrectedConfig& config,
                             const std::optional<Vector>& init) {
  const Index p = loss.W.cols();
  Vector beta = init ? *init : Vector::Zero(p);
  if (beta.size() != p) throw validation_error("corrected lasso: bad warm start size");
  if (beta.lpNorm<1>() > radius) beta = project_l1(beta, radius);

  const double lip = std::max(loss.lip, 1e-12);
  const double alpha0 = config.fixed_alpha > 0.0 ? config.fixed_alpha : 1.0 / lip;
  const bool backtracking = config.fixed_alpha <= 0.0;

  auto step = [&](const Vector& b, const Vector& grad, double alpha) {
    Vector w = b - alpha * grad;
    if (lambda > 0.0) {
      for (Index j = 0; j < p; ++j) w[j] = soft_threshold(w[j], alpha * lambda);
    }
    return project_l1(w, radius);
  };

  FitResult fit;
  fit.tuning_kind = kind;
  fit.tuning_value = tuning_value;

  double f = loss.value(beta);
  double full_objective = f + lambda * beta.lpNorm<1>();
  long increases = 0;
  bool converged = false;
  long iter = 0;

  for (; iter < config.max_iter; ++iter) {
    const Vector grad = loss.gradient(beta);

    // Reference-step residual: the fixed-point gap of the projected step.
    const Vector reference = step(beta, grad, alpha0);
    const double pg_residual = (beta - reference).norm();

    Vector next;
    double f_next;
    if (backtracking) {
      double alpha = alpha0;
      while (true) {
        next = step(beta, grad, alpha);
        const Vector diff = next - beta;
        f_next = loss.value(next);
        const double bound = f + grad.dot(diff) + diff.squaredNorm() / (2.0 * alpha);
        if (f_next <= bound + 1e-14 * std::max(1.0, std::abs(f))) break;
        alpha *= 0.5;
        if (alpha < alpha0 * 1e-14) {
          fit.note = "line search stalled";
          next = beta;
          f_next = f;
          break;
        }
      }
    } else {
      next = reference;  // fixed step equals the reference step
      f_next = loss.value(next);
    }

    const double change = (next - beta).norm();
    const double next_objective = f_next + lambda * next.lpNorm<1>();
    if (!backtracking) {
      if (next_objective > full_objective) {
        if (++increases >= config.divergence_window) {
          beta = next;
          fit.note = "objective increased for " + std::to_string(increases) +
                     " consecutive steps at fixed alpha";
          if (config.record_objective) fit.trace.push_back(next_objective);
          ++iter;
          break;
        }
      } else {
        increases = 0;
      }
    }

    beta = next;
    f = f_next;
    full_objective = next_objective;
    if (config.record_objective) fit.trace.push_back(full_objective);

    if (change <= config.tol_change * std::max(1.0, beta.norm()) &&
        pg_residual <= config.tol_pg * std::max(1.0, beta.norm())) {
      converged = true;
      ++iter;
      break;
    }
    if (!fit.note.empty()) {  // stalled line search
      ++iter;
      break;
    }
  }

  fit.beta = beta;
  fit.active_set = nonzero_indices(beta);
  fit.iterations = iter;
  fit.converged = converged;
  fit.objective = full_objective;
  {
    const Vector grad = loss.gradient(beta);
    fit.exit_residual = (beta - step(beta, grad, alpha0)).norm();
  }
  fit.interior = beta.lpNorm<1>() < radius * (1.0 - 1e-8);
  return fit;
}

}  // namespace

FitResult corrected_lasso_constrained(const Matrix& W, const Vector& y,
                                      const MeasurementModel& sigma_uu, double kappa,
                                      const CorrectedConfig& config,
                                      const std::optional<Vector>& init) {
  validate_corrected(W, y, sigma_uu);
  if (!(kappa > 0.0)) throw config_error("corrected lasso (CCL): kappa must be > 0");
  CorrectedLoss loss(W, y, sigma_uu);
  return projected_gradient(loss, 0.0, kappa, TuningKind::kappa, kappa, config, init);
}

std::vector<FitResult> ccl_path(const Matrix& W, const Vector& y,
                                const MeasurementModel& sigma_uu,
                                const std::vector<double>& kappas,
                                const CorrectedConfig& config) {
  validate_corrected(W, y, sigma_uu);
  if (kappas.empty()) throw config_error("ccl_path: empty grid");
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    if (!(kappas[i] > 0.0)) throw config_error("ccl_path: kappa values must be > 0");
    if (i > 0 && !(kappas[i] > kappas[i - 1]))
      throw config_error("ccl_path: grid must be strictly increasing");
  }
  CorrectedLoss loss(W, y, sigma_uu);
  std::vector<FitResult> fits;
  fits.reserve(kappas.size());
  std::optional<Vector> warm;
  for (const double kappa : kappas) {
    fits.push_back(projected_gradient(loss, 0.0, kappa, TuningKind::kappa, kappa, config,
                                      warm));
    warm = fits.back().beta;
  }
  return fits;
}

FitResult corrected_lasso_regularized(const Matrix& W, const Vector& y,
                                      const MeasurementModel& sigma_uu, double lambda,
                                      double radius_R, const CorrectedConfig& config,
                                      const std::optional<Vector>& init) {
  validate_corrected(W, y, sigma_uu);
  if (!(lambda >= 0.0)) throw config_error("corrected lasso (RCL): lambda must be >= 0");
  if (!(radius_R > 0.0)) throw config_error("corrected lasso (RCL): radius must be > 0");
  CorrectedLoss loss(W, y, sigma_uu);
  return projected_gradient(loss, lambda, radius_R, TuningKind::lambda, lambda, config,
                            init);
}

double kkt_residual_corrected(const Matrix& W, const Vector& y,
                              const MeasurementModel& sigma_uu, const FitResult& fit) {
  if (W.cols() != fit.beta.size() || W.rows() != y.size())
    throw validation_error("kkt_residual_corrected: dimension mismatch");
  if (!fit.interior)
    throw contract_error(
        "kkt_residual_corrected: solution lies on the boundary of its feasible "
        "set, where the KKT conditions do not characterize critical points");
  const double n = static_cast<double>(W.rows());
  const double lambda = fit.tuning_kind == TuningKind::lambda ? fit.tuning_value : 0.0;
  Vector g = -(2.0 / n) * (W.transpose() * (y - W * fit.beta));
  g.noalias() -= 2.0 * sigma_uu.apply(fit.beta);
  double worst = 0.0;
  for (Index j = 0; j < fit.beta.size(); ++j) {
    double viol;
    if (fit.beta[j] != 0.0) {
      viol = std::abs(g[j] + (fit.beta[j] > 0.0 ? lambda : -lambda));
    } else {
      viol = std::max(std::abs(g[j]) - lambda, 0.0);
    }
    worst = std::max(worst, viol);
  }
  return worst;
}

std::vector<FitResult> corrected_multi_start(const Matrix& W, const Vector& y,
                                             const MeasurementModel& sigma_uu,
                                             double kappa, const CorrectedConfig& config,
                                             int starts, std::uint64_t seed) {
  if (starts < 1) throw config_error("corrected_multi_start: starts must be >= 1");
  std::vector<FitResult> fits;
  fits.reserve(static_cast<std::size_t>(starts));
  const Index p = W.cols();
  for (int s = 0; s < starts; ++s) {
    RngStream rng(seed, static_cast<std::uint64_t>(s), rng_purpose::multi_start);
    Vector z(p);
    for (Index j = 0; j < p; ++j) z[j] = rng.next_normal();
    const double frac = rng.next_uniform();
    const double norm1 = z.lpNorm<1>();
    Vector start = norm1 > 0.0 ? Vector((kappa * frac / norm1) * z) : Vector::Zero(p);
    fits.push_back(corrected_lasso_constrained(W, y, sigma_uu, kappa, config, start));
  }
  return fits;
}

}  // namespace melasso
