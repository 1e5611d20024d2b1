#include "melasso/projection.hpp"

#include "melasso/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace melasso;

namespace {

Vector random_vector(RngStream& rng, Index p, double scale) {
  Vector v(p);
  for (Index j = 0; j < p; ++j) v[j] = scale * rng.next_normal();
  return v;
}

}  // namespace

TEST_CASE("vectors inside the ball pass through unchanged") {
  const Vector v = (Vector(2) << 0.5, -0.3).finished();
  const Vector out = project_l1(v, 1.0);
  CHECK(out[0] == 0.5);
  CHECK(out[1] == -0.3);
}

TEST_CASE("single-coordinate clamp") {
  const Vector v = (Vector(2) << 3.0, 0.0).finished();
  const Vector out = project_l1(v, 1.0);
  CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(out[1] == 0.0);
}

TEST_CASE("two-coordinate projection with threshold one") {
  const Vector v = (Vector(2) << 2.0, 1.0).finished();
  const Vector out = project_l1(v, 1.0);
  CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(out[1] == 0.0);  // |v_1| equals the threshold: exact zero
}

TEST_CASE("kappa zero maps everything to the origin") {
  RngStream rng(3);
  const Vector v = random_vector(rng, 20, 2.0);
  CHECK(project_l1(v, 0.0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("validation of bad inputs") {
  const Vector v = (Vector(2) << 1.0, 2.0).finished();
  CHECK_THROWS_AS(project_l1(v, -0.1), validation_error);
  Vector bad = v;
  bad[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(project_l1(bad, 1.0), validation_error);
}

TEST_CASE("agreement with the bisection oracle on random pairs") {
  RngStream rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    const Index p = 1 + static_cast<Index>(rng.uniform_below(100));
    const Vector v = random_vector(rng, p, 3.0);
    const double kappa = 4.0 * rng.next_uniform();
    const Vector fast = project_l1(v, kappa);
    const Vector slow = oracle::project_l1_bisection(v, kappa);
    CHECK((fast - slow).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK(fast.lpNorm<1>() <= kappa * (1.0 + 1e-12));
    for (Index j = 0; j < p; ++j) {
      if (fast[j] != 0.0) CHECK(fast[j] * v[j] > 0.0);  // sign preserved
    }
  }
}

TEST_CASE("idempotence is exact") {
  RngStream rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector v = random_vector(rng, 40, 2.0);
    const double kappa = 3.0 * rng.next_uniform();
    const Vector once = project_l1(v, kappa);
    const Vector twice = project_l1(once, kappa);
    CHECK((once - twice).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("nonexpansiveness on random pairs") {
  RngStream rng(47);
  for (int trial = 0; trial < 500; ++trial) {
    const Index p = 1 + static_cast<Index>(rng.uniform_below(60));
    const Vector u = random_vector(rng, p, 2.0);
    const Vector v = random_vector(rng, p, 2.0);
    const double kappa = 2.5 * rng.next_uniform();
    const double lhs = (project_l1(u, kappa) - project_l1(v, kappa)).norm();
    CHECK(lhs <= (u - v).norm() * (1.0 + 1e-12));
  }
}

TEST_CASE("permutation equivariance") {
  RngStream rng(59);
  for (int trial = 0; trial < 200; ++trial) {
    const Index p = 2 + static_cast<Index>(rng.uniform_below(50));
    const Vector v = random_vector(rng, p, 2.0);
    const double kappa = 2.0 * rng.next_uniform();
    std::vector<Index> perm(static_cast<std::size_t>(p));
    std::iota(perm.begin(), perm.end(), Index{0});
    rng.shuffle(perm.begin(), perm.end());
    Vector permuted(p);
    for (Index j = 0; j < p; ++j) permuted[j] = v[perm[static_cast<std::size_t>(j)]];
    const Vector direct = project_l1(permuted, kappa);
    const Vector base = project_l1(v, kappa);
    for (Index j = 0; j < p; ++j)
      CHECK(direct[j] == base[perm[static_cast<std::size_t>(j)]]);
  }
}
