#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace melasso {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error taxonomy mirrored by the CLI exit codes: config_error -> 2,
// validation_error -> 3, numeric_error (and subclasses) -> 4.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Data generation failed (e.g. a Poisson rate overflowed).
struct simulation_error : numeric_error {
  using numeric_error::numeric_error;
};

// A caller violated a documented precondition (e.g. asked for a KKT
// certificate of a boundary solution).
struct contract_error : std::logic_error {
  using std::logic_error::logic_error;
};

enum class TuningKind { lambda, kappa };

/// Result of any penalized fit in this library.
struct FitResult {
  double intercept = 0.0;
  Vector beta;
  TuningKind tuning_kind = TuningKind::lambda;
  double tuning_value = 0.0;
  std::vector<Index> active_set;  // {j : beta[j] != 0}, ascending
  long iterations = 0;
  bool converged = false;
  double objective = 0.0;
  // For ball-constrained solvers: whether the solution is strictly inside
  // its feasible set. Constrained fits frequently sit on the boundary.
  bool interior = true;
  // Solver-specific stationarity measure at exit (KKT residual, projected
  // gradient norm, or score norm).
  double exit_residual = 0.0;
  std::string note;
  // Objective (or score-norm) history, recorded when the config asks for it
  // or when the solver aborts on divergence.
  std::vector<double> trace;
};

inline std::vector<Index> nonzero_indices(const Vector& beta) {
  std::vector<Index> idx;
  for (Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) idx.push_back(j);
  }
  return idx;
}

inline void require_finite(const Matrix& m, const std::string& name) {
  if (!m.allFinite()) throw validation_error(name + " contains non-finite values");
}

inline void require_finite(const Vector& v, const std::string& name) {
  if (!v.allFinite()) throw validation_error(name + " contains non-finite values");
}

}  // namespace melasso
