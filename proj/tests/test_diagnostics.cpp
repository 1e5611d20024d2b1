#include "melasso/diagnostics.hpp"

#include "melasso/covariance.hpp"
#include "melasso/rng.hpp"
#include "melasso/simulate.hpp"

#include <doctest.h>

#include <cmath>

using namespace melasso;

namespace {

Matrix random_psd(RngStream& rng, Index p) {
  Matrix A(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j) A(i, j) = rng.next_normal();
  Matrix m = A * A.transpose() / static_cast<double>(p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < i; ++j) m(j, i) = m(i, j);
  return m;
}

}  // namespace

TEST_CASE("ic_me on identity and full-support inputs") {
  const Matrix I5 = Matrix::Identity(5, 5);
  const Vector sign2 = (Vector(2) << 1.0, -1.0).finished();
  CHECK(ic_me(I5, {0, 1}, sign2) == 0.0);

  const Vector sign5 = Vector::Ones(5);
  CHECK(ic_me(I5, {0, 1, 2, 3, 4}, sign5) == 0.0);  // vacuous, s0 = p
}

TEST_CASE("ic_me on a Toeplitz design has the hand value 0.8") {
  Matrix C(3, 3);
  for (Index j = 0; j < 3; ++j)
    for (Index k = 0; k < 3; ++k) C(j, k) = std::pow(0.8, std::abs(double(j - k)));
  const Vector sign1 = (Vector(1) << 1.0).finished();
  CHECK(ic_me(C, {0}, sign1) == doctest::Approx(0.8).epsilon(1e-12));
  const Vector neg = (Vector(1) << -1.0).finished();
  CHECK(ic_me(C, {0}, neg) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("mec residual vanishes for the two analytic constructions") {
  RngStream rng(401);

  SUBCASE("zero cross-blocks") {
    // Sigma_xx and Sigma_uu both block diagonal over {S0, S0c}.
    Matrix sxx = Matrix::Zero(6, 6);
    sxx.topLeftCorner(2, 2) = random_psd(rng, 2);
    sxx.bottomRightCorner(4, 4) = random_psd(rng, 4);
    Matrix suu = Matrix::Zero(6, 6);
    suu.topLeftCorner(2, 2) = random_psd(rng, 2);
    suu.bottomRightCorner(4, 4) = random_psd(rng, 4);
    const Matrix sww = sxx + suu;
    CHECK(mec_residual(sww, suu, {0, 1}) < 1e-14);
  }

  SUBCASE("proportional covariances") {
    const Matrix sxx = random_psd(rng, 6);
    const Matrix suu = 0.3 * sxx;
    const Matrix sww = sxx + suu;
    CHECK(mec_residual(sww, suu, {0, 1}) < 1e-10);
  }
}

TEST_CASE("mec residual is positive for generic correlated structure") {
  RngStream rng(403);
  const Matrix sxx = random_psd(rng, 6);
  Matrix suu = random_psd(rng, 6);
  suu += 0.5 * Matrix::Identity(6, 6);
  const Matrix sww = sxx + suu;
  CHECK(mec_residual(sww, suu, {0, 1}) > 0.01);
}

TEST_CASE("mec zero set is scaling invariant") {
  RngStream rng(405);
  const Matrix sxx = random_psd(rng, 5);
  const Matrix suu = 0.4 * sxx;
  const Matrix sww = sxx + suu;
  for (const double c : {0.5, 2.0, 13.0}) {
    CHECK(mec_residual(c * sww, c * suu, {0, 2}) < 1e-9);
  }
  Matrix generic = random_psd(rng, 5);
  const double base = mec_residual(sxx + generic, generic, {0, 2});
  CHECK(base > 1e-4);
  CHECK(mec_residual(3.0 * (sxx + generic), 3.0 * generic, {0, 2}) > 1e-4);
}

TEST_CASE("ic_cl reduces to ic_me when Sigma_uu is zero") {
  RngStream rng(407);
  const Matrix C = random_psd(rng, 7) + Matrix::Identity(7, 7);
  const Vector signs = (Vector(3) << 1.0, -1.0, 1.0).finished();
  const std::vector<int> S0 = {1, 3, 5};
  const Matrix zero = Matrix::Zero(7, 7);
  CHECK(ic_cl(C, zero, S0, signs) == ic_me(C, S0, signs));
  const Vector sfull = Vector::Ones(7);
  CHECK(ic_cl(C, zero, {0, 1, 2, 3, 4, 5, 6}, sfull) == 0.0);
}

TEST_CASE("ic_cl converges to the population zero under independence") {
  const Index p = 6, n = 100000;
  TrueModel model = draw_model(p, 2, 2.0, false, 409, 0);
  model.sigma_uu = CovarianceSpec::identity_scaled(p, 0.2);
  const SimulatedDataset d = simulate_linear(model, n, false, 409, 0);
  const Matrix C_ww = d.W.transpose() * d.W / static_cast<double>(n);
  const Vector signs = (Vector(2) << 1.0, 1.0).finished();
  const Matrix suu = 0.2 * Matrix::Identity(p, p);
  CHECK(ic_cl(C_ww, suu, {0, 1}, signs) < 0.05);
}

TEST_CASE("ic functions reject singular blocks") {
  Matrix C = Matrix::Zero(4, 4);
  C(2, 2) = 1.0;
  C(3, 3) = 1.0;  // S0 block singular
  const Vector signs = (Vector(2) << 1.0, 1.0).finished();
  CHECK_THROWS_AS(ic_me(C, {0, 1}, signs), numeric_error);
}

TEST_CASE("detectable set endpoints in lambda") {
  const Matrix C = Matrix::Identity(4, 4);
  const Matrix C_wu = Matrix::Zero(4, 4);
  Vector beta0 = Vector::Zero(4);
  beta0[0] = 0.7;
  beta0[2] = 2.0;
  const std::vector<int> S0 = {0, 2};

  CHECK(detectable_set(C, C_wu, S0, beta0, 0.0) == S0);
  CHECK(detectable_set(C, C_wu, S0, beta0, 1e6).empty());
}

TEST_CASE("detectable set hand example") {
  // C_ww(S0,S0) = I so the operator norm term is lambda/2 = 0.5;
  // v = (0.5, 0.1) is injected through C_wu.
  const Index p = 4;
  const Matrix C = Matrix::Identity(p, p);
  Matrix C_wu = Matrix::Zero(p, p);
  Vector beta0 = Vector::Zero(p);
  beta0[0] = 0.7;
  beta0[2] = 2.0;
  C_wu(0, 0) = 0.5 / 0.7;
  C_wu(2, 2) = 0.1 / 2.0;
  const std::vector<int> S0 = {0, 2};
  const auto det = detectable_set(C, C_wu, S0, beta0, 1.0);
  REQUIRE(det.size() == 1);
  CHECK(det[0] == 2);  // 0.7 < 0.5 + 0.5 while 2.0 > 0.5 + 0.1
}

TEST_CASE("detectable set shrinks monotonically in lambda") {
  RngStream rng(411);
  const Index p = 8;
  const Matrix C = random_psd(rng, p) + Matrix::Identity(p, p);
  Matrix C_wu(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j) C_wu(i, j) = 0.05 * rng.next_normal();
  Vector beta0 = Vector::Zero(p);
  const std::vector<int> S0 = {0, 2, 5};
  beta0[0] = 0.3;
  beta0[2] = -1.2;
  beta0[5] = 2.4;

  std::vector<int> previous;
  bool first = true;
  for (const double lambda : {0.0, 0.1, 0.4, 1.0, 2.5, 6.0}) {
    const auto det = detectable_set(C, C_wu, S0, beta0, lambda);
    if (!first) {
      for (int j : det)
        CHECK(std::find(previous.begin(), previous.end(), j) != previous.end());
    }
    previous = det;
    first = false;
  }
}

TEST_CASE("beta-min condition of the selection theorem") {
  const Matrix sww = 1.3 * Matrix::Identity(3, 3);
  const Matrix suu = 0.3 * Matrix::Identity(3, 3);
  Vector beta0 = (Vector(3) << 1.0, -2.0, 0.5).finished();
  // bias = (0.3/1.3) |beta|, always smaller in magnitude
  CHECK(beta_min_condition(sww, suu, {0, 1, 2}, beta0));
  // degenerate: Sigma_uu = Sigma_ww makes the bias equal beta itself
  CHECK_FALSE(beta_min_condition(sww, 1.3 * Matrix::Identity(3, 3), {0, 1, 2}, beta0));
}

TEST_CASE("selection metrics") {
  Vector beta0 = Vector::Zero(6);
  beta0[1] = 1.0;
  beta0[3] = -2.0;

  SUBCASE("perfect recovery") {
    const SelectionMetrics m = selection_metrics(beta0, beta0);
    CHECK(m.tp == 2);
    CHECK(m.fp == 0);
    CHECK(m.sign_correct);
    CHECK(m.l1_err == 0.0);
    CHECK(m.l2_err == 0.0);
  }
  SUBCASE("zero estimate") {
    const SelectionMetrics m = selection_metrics(Vector::Zero(6), beta0);
    CHECK(m.tp == 0);
    CHECK(m.fp == 0);
    CHECK_FALSE(m.sign_correct);
    CHECK(m.l1_err == doctest::Approx(3.0));
  }
  SUBCASE("one extra, one missed") {
    Vector est = Vector::Zero(6);
    est[1] = 1.0;
    est[5] = 0.4;  // false positive; index 3 missed
    const SelectionMetrics m = selection_metrics(est, beta0);
    CHECK(m.tp == 1);
    CHECK(m.fp == 1);
    CHECK_FALSE(m.sign_correct);
  }
}
