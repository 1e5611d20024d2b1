#include "melasso/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace melasso {

namespace {

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// Coordinate descent state on the Gram form of the (1/n)-scaled objective:
// G = W'W/n, c = W'y/n, g = G beta kept incrementally up to date.
struct CdWorkspace {
  Index p = 0;
  Matrix G;
  Vector c;
  double yty_n = 0.0;
  Vector beta;
  Vector g;

  CdWorkspace(const Matrix& W, const Vector& y) {
    const double n = static_cast<double>(W.rows());
    p = W.cols();
    G.noalias() = W.transpose() * W / n;
    c.noalias() = W.transpose() * y / n;
    yty_n = y.squaredNorm() / n;
    beta = Vector::Zero(p);
    g = Vector::Zero(p);
  }

  // Exact minimization over coordinate j; returns |change|.
  double update_coordinate(Index j, double lambda) {
    const double gjj = G(j, j);
    const double old = beta[j];
    double next = 0.0;
    if (gjj > 0.0) {
      const double z = c[j] - g[j] + gjj * old;
      next = soft_threshold(z, 0.5 * lambda) / gjj;
    }
    if (next != old) {
      g.noalias() += G.col(j) * (next - old);
      beta[j] = next;
    }
    return std::abs(next - old);
  }

  double sweep_all(double lambda) {
    double max_delta = 0.0;
    for (Index j = 0; j < p; ++j)
      max_delta = std::max(max_delta, update_coordinate(j, lambda));
    return max_delta;
  }

  double sweep_active(double lambda) {
    double max_delta = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (beta[j] == 0.0) continue;
      max_delta = std::max(max_delta, update_coordinate(j, lambda));
    }
    return max_delta;
  }

  double kkt_residual(double lambda) const {
    double worst = 0.0;
    for (Index j = 0; j < p; ++j) {
      const double grad = 2.0 * (g[j] - c[j]);
      double viol;
      if (beta[j] != 0.0) {
        viol = std::abs(grad + (beta[j] > 0.0 ? lambda : -lambda));
      } else {
        viol = std::max(std::abs(grad) - lambda, 0.0);
      }
      worst = std::max(worst, viol);
    }
    return worst;
  }

  double objective(double lambda) const {
    return yty_n - 2.0 * c.dot(beta) + beta.dot(g) + lambda * beta.lpNorm<1>();
  }

  FitResult solve(double lambda, const LassoConfig& config) {
    FitResult fit;
    fit.tuning_kind = TuningKind::lambda;
    fit.tuning_value = lambda;

    long sweeps = 0;
    bool converged = false;
    const double inner_tol = 0.1 * config.tol;
    while (sweeps < config.max_sweeps) {
      sweep_all(lambda);
      ++sweeps;
      if (config.record_objective) fit.trace.push_back(objective(lambda));
      if (kkt_residual(lambda) <= config.tol) {
        converged = true;
        break;
      }
      while (sweeps < config.max_sweeps) {
        const double delta = sweep_active(lambda);
        ++sweeps;
        if (config.record_objective) fit.trace.push_back(objective(lambda));
        if (delta <= inner_tol) break;
      }
    }

    fit.beta = beta;
    fit.active_set = nonzero_indices(beta);
    fit.iterations = sweeps;
    fit.converged = converged;
    fit.objective = objective(lambda);
    fit.exit_residual = kkt_residual(lambda);
    fit.interior = true;
    return fit;
  }
};

void validate_inputs(const Matrix& W, const Vector& y, double lambda) {
  if (W.rows() != y.size())
    throw validation_error("lasso: W has " + std::to_string(W.rows()) +
                           " rows but y has " + std::to_string(y.size()) + " entries");
  if (W.rows() < 1 || W.cols() < 1) throw validation_error("lasso: empty design");
  require_finite(W, "W");
  require_finite(y, "y");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw validation_error("lasso: lambda must be finite and >= 0");
}

}  // namespace

FitResult naive_lasso(const Matrix& W, const Vector& y, double lambda,
                      const LassoConfig& config) {
  validate_inputs(W, y, lambda);
  CdWorkspace ws(W, y);
  return ws.solve(lambda, config);
}

std::vector<FitResult> lasso_path(const Matrix& W, const Vector& y,
                                  const std::vector<double>& lambdas,
                                  const LassoConfig& config) {
  if (lambdas.empty()) throw config_error("lasso_path: empty grid");
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    if (!(lambdas[i] < lambdas[i - 1]))
      throw config_error("lasso_path: grid must be strictly decreasing");
  }
  validate_inputs(W, y, lambdas.front());

  CdWorkspace ws(W, y);
  std::vector<FitResult> fits;
  fits.reserve(lambdas.size());
  for (const double lambda : lambdas) fits.push_back(ws.solve(lambda, config));
  return fits;
}

double kkt_residual_naive(const Matrix& W, const Vector& y, const FitResult& fit) {
  if (W.cols() != fit.beta.size() || W.rows() != y.size())
    throw validation_error("kkt_residual_naive: dimension mismatch");
  const double n = static_cast<double>(W.rows());
  const Vector grad = -(2.0 / n) * (W.transpose() * (y - W * fit.beta));
  const double lambda = fit.tuning_value;
  double worst = 0.0;
  for (Index j = 0; j < fit.beta.size(); ++j) {
    double viol;
    if (fit.beta[j] != 0.0) {
      viol = std::abs(grad[j] + (fit.beta[j] > 0.0 ? lambda : -lambda));
    } else {
      viol = std::max(std::abs(grad[j]) - lambda, 0.0);
    }
    worst = std::max(worst, viol);
  }
  return worst;
}

double lambda_max(const Matrix& W, const Vector& y) {
  const double n = static_cast<double>(W.rows());
  return (2.0 / n) * (W.transpose() * y).cwiseAbs().maxCoeff();
}

std::vector<double> lambda_grid(double lmax, int count, double min_ratio) {
  if (count < 1) throw config_error("lambda_grid: count must be >= 1");
  if (!(lmax > 0.0)) throw config_error("lambda_grid: lambda_max must be > 0");
  if (!(min_ratio > 0.0 && min_ratio < 1.0))
    throw config_error("lambda_grid: min_ratio must lie in (0, 1)");
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = lmax;
    return grid;
  }
  const double log_step = std::log(min_ratio) / static_cast<double>(count - 1);
  for (int i = 0; i < count; ++i)
    grid[static_cast<std::size_t>(i)] = lmax * std::exp(log_step * i);
  return grid;
}

}  // namespace melasso
