#include "melasso/corrected.hpp"

#include "melasso/lasso.hpp"
#include "melasso/rng.hpp"
#include "melasso/simulate.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace melasso;

namespace {

Matrix random_matrix(RngStream& rng, Index n, Index p) {
  Matrix m(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) m(i, j) = rng.next_normal();
  return m;
}

}  // namespace

TEST_CASE("zero correction with slack constraint reduces to least squares") {
  RngStream rng(201);
  const Index n = 80, p = 10;
  const Matrix W = random_matrix(rng, n, p);
  Vector y(n);
  for (Index i = 0; i < n; ++i) y[i] = rng.next_normal();
  const Vector ls = oracle::least_squares(W, y);

  CorrectedConfig config;
  config.tol_change = 1e-10;
  config.tol_pg = 1e-9;
  config.max_iter = 50000;
  const FitResult fit = corrected_lasso_constrained(
      W, y, MeasurementModel::zero(p), 2.0 * ls.lpNorm<1>() + 1.0, config);
  CHECK(fit.converged);
  CHECK(fit.interior);
  CHECK((fit.beta - ls).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("scalar problem matches the clamp closed form") {
  RngStream rng(203);
  const Index n = 200;
  Matrix w(n, 1);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    w(i, 0) = rng.next_normal();
    y[i] = 0.8 * w(i, 0) + 0.1 * rng.next_normal();
  }
  const double su2 = 0.2;
  const MeasurementModel sigma = MeasurementModel::scaled_identity(1, su2);
  REQUIRE(w.squaredNorm() / n - su2 > 0.0);

  SUBCASE("interior solution") {
    const double kappa = 10.0;
    const double expected = oracle::corrected_scalar(w.col(0), y, su2, kappa);
    const FitResult fit = corrected_lasso_constrained(w, y, sigma, kappa);
    CHECK(fit.converged);
    CHECK(fit.beta[0] == doctest::Approx(expected).epsilon(1e-6));
    CHECK(kkt_residual_corrected(w, y, sigma, fit) <= 1e-5);

    // The residual at the exact closed-form stationary point itself.
    FitResult exact = fit;
    exact.beta[0] = expected;
    exact.interior = true;
    CHECK(kkt_residual_corrected(w, y, sigma, exact) <= 1e-8);
  }
  SUBCASE("clamped solution") {
    const double kappa = 0.3;
    const double expected = oracle::corrected_scalar(w.col(0), y, su2, kappa);
    const FitResult fit = corrected_lasso_constrained(w, y, sigma, kappa);
    CHECK(std::abs(expected) == doctest::Approx(kappa));
    CHECK(fit.beta[0] == doctest::Approx(expected).epsilon(1e-6));
    CHECK_FALSE(fit.interior);
    CHECK_THROWS_AS(kkt_residual_corrected(w, y, sigma, fit), contract_error);
  }
}

TEST_CASE("RCL with a large penalty returns the exact zero vector") {
  RngStream rng(207);
  const Index n = 50, p = 20;
  const Matrix W = random_matrix(rng, n, p);
  Vector y(n);
  for (Index i = 0; i < n; ++i) y[i] = rng.next_normal();
  const MeasurementModel sigma = MeasurementModel::scaled_identity(p, 0.2);
  const double radius = 3.0;
  const double lambda = lambda_max(W, y) + 2.0 * sigma.max_abs_entry() * radius;
  const FitResult fit = corrected_lasso_regularized(W, y, sigma, lambda, radius);
  CHECK(fit.converged);
  CHECK(fit.beta.cwiseAbs().maxCoeff() == 0.0);
  CHECK(kkt_residual_corrected(W, y, sigma, fit) == 0.0);
}

TEST_CASE("RCL with zero correction coincides with the naive lasso") {
  RngStream rng(209);
  const Index n = 60, p = 15;
  const Matrix W = random_matrix(rng, n, p);
  TrueModel model = draw_model(p, 3, 1.0, true, 209, 0);
  Vector y = W * model.beta0;
  for (Index i = 0; i < n; ++i) y[i] += 0.2 * rng.next_normal();

  const double lambda = 0.5 * lambda_max(W, y);
  const FitResult naive = naive_lasso(W, y, lambda);
  const double radius = 10.0 * std::max(naive.beta.lpNorm<1>(), 1.0);
  CorrectedConfig config;
  config.tol_change = 1e-9;
  config.tol_pg = 1e-8;
  config.max_iter = 20000;
  const FitResult rcl = corrected_lasso_regularized(W, y, MeasurementModel::zero(p),
                                                    lambda, radius, config);
  CHECK(rcl.converged);
  CHECK(rcl.interior);
  CHECK((rcl.beta - naive.beta).lpNorm<Eigen::Infinity>() < 1e-5);
}

TEST_CASE("RCL objective agrees with a 2-d exhaustive grid search") {
  RngStream rng(211);
  const Index n = 60, p = 2;
  const Matrix W = random_matrix(rng, n, p);
  Vector y = 1.2 * W.col(0) - 0.7 * W.col(1);
  for (Index i = 0; i < n; ++i) y[i] += 0.3 * rng.next_normal();
  const MeasurementModel sigma = MeasurementModel::scaled_identity(p, 0.15);
  const double lambda = 0.2, radius = 3.0;

  const auto objective = [&](double b1, double b2) {
    Vector beta(2);
    beta << b1, b2;
    if (beta.lpNorm<1>() > radius) return std::numeric_limits<double>::infinity();
    const double nn = static_cast<double>(n);
    return (y - W * beta).squaredNorm() / nn - sigma.quad(beta) +
           lambda * beta.lpNorm<1>();
  };
  const auto [grid_arg, grid_val] = oracle::grid_search_2d(objective, -3.0, 3.0, 2001);
  const FitResult fit = corrected_lasso_regularized(W, y, sigma, lambda, radius);
  CHECK(fit.converged);
  CHECK(fit.objective == doctest::Approx(grid_val).epsilon(1e-3));
  CHECK((fit.beta - grid_arg).lpNorm<Eigen::Infinity>() < 5e-3);
}

TEST_CASE("backtracking keeps the objective monotone") {
  RngStream rng(213);
  const Index n = 40, p = 80;  // non-convex regime
  const Matrix W = random_matrix(rng, n, p);
  TrueModel model = draw_model(p, 4, 1.5, true, 213, 0);
  Vector y = W * model.beta0;
  for (Index i = 0; i < n; ++i) y[i] += 0.2 * rng.next_normal();
  const MeasurementModel sigma = MeasurementModel::scaled_identity(p, 0.3);

  CorrectedConfig config;
  config.record_objective = true;
  const FitResult fit =
      corrected_lasso_constrained(W, y, sigma, 0.8 * model.beta0.lpNorm<1>(), config);
  REQUIRE(fit.trace.size() >= 2);
  for (std::size_t i = 1; i < fit.trace.size(); ++i)
    CHECK(fit.trace[i] <= fit.trace[i - 1] + 1e-10);
}

TEST_CASE("constraint is honored to within the stated slack") {
  RngStream rng(217);
  const Index n = 50, p = 120;
  const Matrix W = random_matrix(rng, n, p);
  TrueModel model = draw_model(p, 5, 2.0, true, 217, 0);
  Vector y = W * model.beta0;
  for (Index i = 0; i < n; ++i) y[i] += 0.1 * rng.next_normal();
  const MeasurementModel sigma = MeasurementModel::scaled_identity(p, 0.2);
  for (const double kappa : {0.5, 2.0, 7.5}) {
    const FitResult fit = corrected_lasso_constrained(W, y, sigma, kappa);
    CHECK(fit.beta.lpNorm<1>() <= kappa * (1.0 + 1e-12));
  }
}

TEST_CASE("multi-start lands on one stationary point") {
  const Index n = 100, p = 200;
  TrueModel model = draw_model(p, 5, 2.0, true, 219, 0);
  model.sigma_uu = CovarianceSpec::identity_scaled(p, 0.2);
  model.sigma_eps = 0.1;
  const SimulatedDataset d = simulate_linear(model, n, true, 219, 0);
  const MeasurementModel sigma = MeasurementModel::scaled_identity(p, 0.2);

  CorrectedConfig config;
  config.max_iter = 20000;
  const auto fits = corrected_multi_start(d.W, d.y, sigma,
                                          0.5 * model.beta0.lpNorm<1>(), config, 10, 7);
  REQUIRE(fits.size() == 10);
  int converged = 0;
  for (const auto& f : fits) converged += f.converged ? 1 : 0;
  CHECK(converged == 10);
  for (std::size_t a = 0; a < fits.size(); ++a)
    for (std::size_t b = a + 1; b < fits.size(); ++b)
      CHECK((fits[a].beta - fits[b].beta).norm() < 1e-3);
}

TEST_CASE("with zero correction the RCL path tracks the naive path") {
  RngStream rng(223);
  const Index n = 70, p = 12;
  const Matrix W = random_matrix(rng, n, p);
  TrueModel model = draw_model(p, 3, 1.0, true, 223, 0);
  Vector y = W * model.beta0;
  for (Index i = 0; i < n; ++i) y[i] += 0.25 * rng.next_normal();

  const auto grid = lambda_grid(lambda_max(W, y), 8, 0.05);
  const auto naive_fits = lasso_path(W, y, grid);
  CorrectedConfig config;
  config.tol_change = 1e-9;
  config.tol_pg = 1e-8;
  config.max_iter = 30000;
  const double radius = 10.0 * std::max(naive_fits.back().beta.lpNorm<1>(), 1.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const FitResult rcl = corrected_lasso_regularized(W, y, MeasurementModel::zero(p),
                                                      grid[i], radius, config);
    CHECK((rcl.beta - naive_fits[i].beta).lpNorm<Eigen::Infinity>() < 1e-5);
  }
}

TEST_CASE("kkt residual flags random non-stationary points") {
  RngStream rng(227);
  const Index n = 60, p = 8;
  const Matrix W = random_matrix(rng, n, p);
  Vector y = W.col(0) * 1.5;
  for (Index i = 0; i < n; ++i) y[i] += 0.2 * rng.next_normal();
  const MeasurementModel sigma = MeasurementModel::scaled_identity(p, 0.1);

  FitResult fake;
  fake.tuning_kind = TuningKind::lambda;
  fake.tuning_value = 0.05;
  fake.beta = Vector::Zero(p);
  for (Index j = 0; j < p; ++j) fake.beta[j] = rng.next_normal();
  fake.interior = true;
  CHECK(kkt_residual_corrected(W, y, sigma, fake) > 0.01);
}

TEST_CASE("fixed-step divergence is reported, not thrown") {
  RngStream rng(229);
  const Index n = 30, p = 6;
  const Matrix W = random_matrix(rng, n, p);
  Vector y(n);
  for (Index i = 0; i < n; ++i) y[i] = rng.next_normal();
  // Mildly unstable fixed step: the iterate grows a few percent per step,
  // so the objective increases for well over 50 consecutive iterations
  // before the (huge) ball could interfere.
  const double smax_sq =
      Eigen::JacobiSVD<Matrix>(W).singularValues().maxCoeff() *
      Eigen::JacobiSVD<Matrix>(W).singularValues().maxCoeff();
  const double lip = 2.0 * smax_sq / static_cast<double>(n);
  CorrectedConfig config;
  config.fixed_alpha = 2.2 / lip;
  config.max_iter = 2000;
  const FitResult fit =
      corrected_lasso_constrained(W, y, MeasurementModel::zero(p), 1e12, config);
  CHECK_FALSE(fit.converged);
  CHECK(!fit.note.empty());
}
