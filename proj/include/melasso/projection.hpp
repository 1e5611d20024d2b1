#pragma once

#include "melasso/types.hpp"

namespace melasso {

/// Exact Euclidean projection onto the l1 ball {x : ||x||_1 <= kappa}.
///
/// Sort-based threshold computation, O(p log p). Vectors already inside the
/// ball are returned unchanged; coordinates whose magnitude equals the
/// threshold map to exactly 0.0 regardless of input order.
Vector project_l1(const Vector& v, double kappa);

}  // namespace melasso
