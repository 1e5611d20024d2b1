#include "melasso/covariance.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <string>

namespace melasso {

CovarianceSpec CovarianceSpec::identity_scaled(Index p, double scale) {
  CovarianceSpec s;
  s.kind = CovKind::identity_scaled;
  s.p = p;
  s.scale = scale;
  return s;
}

CovarianceSpec CovarianceSpec::block_toeplitz(Index p, Index block_size, double rho,
                                              double scale) {
  CovarianceSpec s;
  s.kind = CovKind::block_toeplitz;
  s.p = p;
  s.block_size = block_size;
  s.rho = rho;
  s.scale = scale;
  return s;
}

CovarianceSpec CovarianceSpec::toeplitz_decay(Index p, double rho) {
  CovarianceSpec s;
  s.kind = CovKind::toeplitz_decay;
  s.p = p;
  s.rho = rho;
  return s;
}

CovarianceSpec CovarianceSpec::diagonal(Vector diag) {
  CovarianceSpec s;
  s.kind = CovKind::diagonal_vector;
  s.p = diag.size();
  s.diag = std::move(diag);
  return s;
}

CovarianceSpec CovarianceSpec::dense_matrix(Matrix m) {
  CovarianceSpec s;
  s.kind = CovKind::dense;
  s.p = m.rows();
  s.dense = std::move(m);
  return s;
}

namespace {

void check_common(const CovarianceSpec& spec) {
  if (spec.p < 1) throw config_error("covariance: dimension p must be >= 1");
}

void check_rho(double rho) {
  if (!(rho > 0.0 && rho < 1.0))
    throw config_error("covariance: rho must lie in (0, 1), got " + std::to_string(rho));
}

}  // namespace

Matrix realize(const CovarianceSpec& spec) {
  check_common(spec);
  const Index p = spec.p;
  switch (spec.kind) {
    case CovKind::identity_scaled: {
      if (!(spec.scale > 0.0))
        throw config_error("covariance: identity-scaled requires scale > 0");
      Matrix m = Matrix::Zero(p, p);
      m.diagonal().setConstant(spec.scale);
      return m;
    }
    case CovKind::block_toeplitz: {
      check_rho(spec.rho);
      if (!(spec.scale > 0.0))
        throw config_error("covariance: block-toeplitz requires scale > 0");
      if (spec.block_size < 1 || p % spec.block_size != 0)
        throw config_error("covariance: block_size " + std::to_string(spec.block_size) +
                           " does not divide p = " + std::to_string(p));
      Matrix m = Matrix::Zero(p, p);
      for (Index j = 0; j < p; ++j) {
        for (Index k = j; k < p; ++k) {
          if (j / spec.block_size != k / spec.block_size) continue;
          const double val = std::pow(spec.rho, static_cast<double>(k - j)) * spec.scale;
          m(j, k) = val;
          m(k, j) = val;
        }
      }
      return m;
    }
    case CovKind::toeplitz_decay: {
      check_rho(spec.rho);
      Matrix m(p, p);
      for (Index j = 0; j < p; ++j) {
        for (Index k = j; k < p; ++k) {
          const double val = std::pow(spec.rho, 1.0 + static_cast<double>(k - j));
          m(j, k) = val;
          m(k, j) = val;
        }
      }
      return m;
    }
    case CovKind::diagonal_vector: {
      if (spec.diag.size() != p)
        throw config_error("covariance: diag length does not match p");
      for (Index j = 0; j < p; ++j) {
        if (!(spec.diag[j] >= 0.0))
          throw config_error("covariance: diag entries must be >= 0");
      }
      Matrix m = Matrix::Zero(p, p);
      m.diagonal() = spec.diag;
      return m;
    }
    case CovKind::dense: {
      if (spec.dense.rows() != p || spec.dense.cols() != p)
        throw config_error("covariance: dense matrix shape does not match p");
      require_finite(spec.dense, "covariance matrix");
      for (Index j = 0; j < p; ++j) {
        for (Index k = j + 1; k < p; ++k) {
          if (spec.dense(j, k) != spec.dense(k, j))
            throw validation_error("covariance: dense input is not symmetric at (" +
                                   std::to_string(j) + "," + std::to_string(k) + ")");
        }
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(spec.dense, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues().minCoeff();
      const double hi = es.eigenvalues().maxCoeff();
      if (lo < -1e-10 * std::max(hi, 0.0))
        throw validation_error("covariance: dense input is not PSD, smallest eigenvalue " +
                               std::to_string(lo));
      return spec.dense;
    }
  }
  throw config_error("covariance: unknown kind");
}

Matrix cholesky_factor(const Matrix& m) {
  const Index p = m.rows();
  if (m.cols() != p) throw validation_error("cholesky: matrix must be square");
  require_finite(m, "cholesky input");
  for (Index j = 0; j < p; ++j) {
    for (Index k = j + 1; k < p; ++k) {
      if (m(j, k) != m(k, j))
        throw validation_error("cholesky: input is not symmetric");
    }
  }

  double max_diag = 0.0;
  for (Index j = 0; j < p; ++j) max_diag = std::max(max_diag, std::abs(m(j, j)));
  const double tol = 1e-10 * std::max(max_diag, 1e-300);

  // Unpivoted outer-product factorization. A vanishing pivot is legal for
  // PSD input; its whole column must then vanish too, otherwise the matrix
  // is indefinite.
  Matrix L = Matrix::Zero(p, p);
  for (Index k = 0; k < p; ++k) {
    double d = m(k, k);
    for (Index j = 0; j < k; ++j) d -= L(k, j) * L(k, j);
    if (d > tol) {
      const double lkk = std::sqrt(d);
      L(k, k) = lkk;
      for (Index i = k + 1; i < p; ++i) {
        double s = m(i, k);
        for (Index j = 0; j < k; ++j) s -= L(i, j) * L(k, j);
        L(i, k) = s / lkk;
      }
    } else if (d >= -tol) {
      L(k, k) = 0.0;
      for (Index i = k + 1; i < p; ++i) {
        double s = m(i, k);
        for (Index j = 0; j < k; ++j) s -= L(i, j) * L(k, j);
        if (std::abs(s) > tol)
          throw numeric_error("cholesky: matrix is indefinite at pivot " +
                              std::to_string(k));
        L(i, k) = 0.0;
      }
    } else {
      throw numeric_error("cholesky: matrix is indefinite at pivot " + std::to_string(k) +
                          " (Schur diagonal " + std::to_string(d) + ")");
    }
  }
  return L;
}

namespace {

std::string kind_name(CovKind kind) {
  switch (kind) {
    case CovKind::identity_scaled: return "identity-scaled";
    case CovKind::block_toeplitz: return "block-toeplitz";
    case CovKind::toeplitz_decay: return "toeplitz-decay";
    case CovKind::diagonal_vector: return "diagonal-vector";
    case CovKind::dense: return "dense";
  }
  return "unknown";
}

CovKind kind_from_name(const std::string& name) {
  if (name == "identity-scaled") return CovKind::identity_scaled;
  if (name == "block-toeplitz") return CovKind::block_toeplitz;
  if (name == "toeplitz-decay") return CovKind::toeplitz_decay;
  if (name == "diagonal-vector") return CovKind::diagonal_vector;
  if (name == "dense") return CovKind::dense;
  throw config_error("covariance: unknown kind '" + name + "'");
}

}  // namespace

void to_json(nlohmann::json& j, const CovarianceSpec& spec) {
  j = nlohmann::json{{"kind", kind_name(spec.kind)}, {"p", spec.p}};
  switch (spec.kind) {
    case CovKind::identity_scaled:
      j["scale"] = spec.scale;
      break;
    case CovKind::block_toeplitz:
      j["scale"] = spec.scale;
      j["rho"] = spec.rho;
      j["block_size"] = spec.block_size;
      break;
    case CovKind::toeplitz_decay:
      j["rho"] = spec.rho;
      break;
    case CovKind::diagonal_vector: {
      std::vector<double> d(spec.diag.data(), spec.diag.data() + spec.diag.size());
      j["diag"] = d;
      break;
    }
    case CovKind::dense: {
      std::vector<std::vector<double>> rows;
      rows.reserve(static_cast<std::size_t>(spec.dense.rows()));
      for (Index r = 0; r < spec.dense.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(spec.dense.cols()));
        for (Index c = 0; c < spec.dense.cols(); ++c) row[static_cast<std::size_t>(c)] = spec.dense(r, c);
        rows.push_back(std::move(row));
      }
      j["dense"] = rows;
      break;
    }
  }
}

void from_json(const nlohmann::json& j, CovarianceSpec& spec) {
  spec = CovarianceSpec{};
  spec.kind = kind_from_name(j.at("kind").get<std::string>());
  spec.p = j.at("p").get<Index>();
  switch (spec.kind) {
    case CovKind::identity_scaled:
      spec.scale = j.at("scale").get<double>();
      break;
    case CovKind::block_toeplitz:
      spec.scale = j.at("scale").get<double>();
      spec.rho = j.at("rho").get<double>();
      spec.block_size = j.at("block_size").get<Index>();
      break;
    case CovKind::toeplitz_decay:
      spec.rho = j.at("rho").get<double>();
      break;
    case CovKind::diagonal_vector: {
      const auto d = j.at("diag").get<std::vector<double>>();
      spec.diag = Eigen::Map<const Vector>(d.data(), static_cast<Index>(d.size()));
      break;
    }
    case CovKind::dense: {
      const auto rows = j.at("dense").get<std::vector<std::vector<double>>>();
      const Index p = static_cast<Index>(rows.size());
      spec.dense.resize(p, p);
      for (Index r = 0; r < p; ++r) {
        if (static_cast<Index>(rows[static_cast<std::size_t>(r)].size()) != p)
          throw config_error("covariance: dense JSON rows are ragged");
        for (Index c = 0; c < p; ++c)
          spec.dense(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      }
      break;
    }
  }
}

}  // namespace melasso
