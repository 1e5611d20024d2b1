#include "melasso/simulate.hpp"

#include "melasso/rng.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace melasso {

TrueModel draw_model(Index p, Index s0, double coef_sd, bool randomize_support,
                     std::uint64_t seed, std::uint64_t stream) {
  if (p < 1) throw config_error("draw_model: p must be >= 1");
  if (s0 < 0 || s0 > p)
    throw config_error("draw_model: s0 = " + std::to_string(s0) +
                       " must lie in [0, p = " + std::to_string(p) + "]");
  if (!(coef_sd > 0.0)) throw config_error("draw_model: coef_sd must be > 0");

  RngStream rng(seed, stream, rng_purpose::model);

  TrueModel model;
  model.coef_sd = coef_sd;
  model.beta0 = Vector::Zero(p);
  model.sigma_xx = CovarianceSpec::identity_scaled(p, 1.0);
  model.sigma_uu = CovarianceSpec::diagonal(Vector::Zero(p));

  if (randomize_support) {
    std::vector<int> idx(static_cast<std::size_t>(p));
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx.begin(), idx.end());
    model.support.assign(idx.begin(), idx.begin() + s0);
    std::sort(model.support.begin(), model.support.end());
  } else {
    model.support.resize(static_cast<std::size_t>(s0));
    std::iota(model.support.begin(), model.support.end(), 0);
  }

  for (int j : model.support) {
    double draw = 0.0;
    do {
      draw = coef_sd * rng.next_normal();
    } while (draw == 0.0);  // keep the support exact
    model.beta0[j] = draw;
  }
  return model;
}

namespace {

// Rows i.i.d. N(0, L L'): one row of standard normals times L'. Row order
// and the per-row draw order are fixed, so datasets are reproducible.
Matrix sample_gaussian_rows(RngStream& rng, Index n, const Matrix& L) {
  const Index p = L.rows();
  Matrix out(n, p);
  Vector z(p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) z[j] = rng.next_normal();
    out.row(i) = (L * z).transpose();
  }
  return out;
}

void center_columns(Matrix& m) {
  const Vector means = m.colwise().mean();
  m.rowwise() -= means.transpose();
}

}  // namespace

SimulatedDataset simulate_linear(const TrueModel& model, Index n, bool center,
                                 std::uint64_t seed, std::uint64_t stream) {
  if (n < 2) throw config_error("simulate_linear: n must be >= 2");
  const Index p = model.beta0.size();

  const Matrix Lx = cholesky_factor(realize(model.sigma_xx));
  const Matrix Lu = cholesky_factor(realize(model.sigma_uu));

  RngStream rng(seed, stream, rng_purpose::linear_data);

  SimulatedDataset data;
  data.truth = model;
  data.X = sample_gaussian_rows(rng, n, Lx);
  data.U = sample_gaussian_rows(rng, n, Lu);

  Vector eps(n);
  for (Index i = 0; i < n; ++i) eps[i] = model.sigma_eps * rng.next_normal();

  data.y = data.X * model.beta0 + eps;
  data.W = data.X + data.U;

  if (center) {
    center_columns(data.W);
    center_columns(data.X);
    data.y.array() -= data.y.mean();
    data.centered = true;
  }
  // Store U as the representable difference so W - X == U holds exactly.
  data.U = data.W - data.X;
  return data;
}

SimulatedDataset simulate_glm(const TrueModel& model, Index n, GlmFamily family,
                              std::uint64_t seed, std::uint64_t stream) {
  if (n < 2) throw config_error("simulate_glm: n must be >= 2");

  const Matrix Lx = cholesky_factor(realize(model.sigma_xx));
  const Matrix Lu = cholesky_factor(realize(model.sigma_uu));

  RngStream rng(seed, stream, rng_purpose::glm_data);

  SimulatedDataset data;
  data.truth = model;
  data.X = sample_gaussian_rows(rng, n, Lx);
  data.U = sample_gaussian_rows(rng, n, Lu);

  const Vector eta = (data.X * model.beta0).array() + model.mu0;
  data.y.resize(n);
  switch (family) {
    case GlmFamily::logistic:
      for (Index i = 0; i < n; ++i) {
        const double prob = 1.0 / (1.0 + std::exp(-eta[i]));
        data.y[i] = rng.next_uniform() < prob ? 1.0 : 0.0;
      }
      break;
    case GlmFamily::poisson:
      for (Index i = 0; i < n; ++i) {
        if (std::abs(eta[i]) > 30.0)
          throw simulation_error("simulate_glm: Poisson rate overflow, eta = " +
                                 std::to_string(eta[i]) + " at observation " +
                                 std::to_string(i));
        data.y[i] = static_cast<double>(rng.next_poisson(std::exp(eta[i])));
      }
      break;
  }

  data.W = data.X + data.U;
  data.U = data.W - data.X;
  return data;
}

}  // namespace melasso
