#include "melasso/projection.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace melasso {

Vector project_l1(const Vector& v, double kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa))
    throw validation_error("project_l1: kappa must be finite and >= 0");
  require_finite(v, "project_l1 input");

  const Index p = v.size();
  if (kappa == 0.0) return Vector::Zero(p);
  // Pass-through matches the output certificate ||out||_1 <= kappa (1+1e-12),
  // which also makes re-projection an exact no-op.
  if (v.lpNorm<1>() <= kappa * (1.0 + 1e-12)) return v;

  // Threshold level: sort magnitudes descending, find the largest prefix
  // whose soft-threshold keeps every kept coordinate positive.
  std::vector<double> mags(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) mags[static_cast<std::size_t>(j)] = std::abs(v[j]);
  std::sort(mags.begin(), mags.end(), std::greater<double>());

  double prefix = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < mags.size(); ++j) {
    prefix += mags[j];
    const double candidate = (prefix - kappa) / static_cast<double>(j + 1);
    if (mags[j] - candidate > 0.0) {
      theta = candidate;
    } else {
      break;
    }
  }

  Vector out(p);
  for (Index j = 0; j < p; ++j) {
    const double mag = std::abs(v[j]) - theta;
    out[j] = mag > 0.0 ? (v[j] > 0.0 ? mag : -mag) : 0.0;
  }
  return out;
}

}  // namespace melasso
