#pragma once

#include "melasso/diagnostics.hpp"

#include <map>
#include <string>
#include <vector>

namespace melasso {

struct ReplicateRecord {
  long replicate = 0;
  std::string method;
  double tuning_value = 0.0;
  SelectionMetrics metrics;
  bool converged = true;
  double wall_seconds = 0.0;  // profiling only; never serialized
};

struct MetricSummary {
  double mean = 0.0;
  double se = 0.0;  // sd / sqrt(m), 1/(m-1) variance convention; 0 for m == 1
};

struct MethodAggregate {
  long count = 0;
  long nonconverged = 0;
  MetricSummary tp, fp, l2, l1;
};

/// Mean and standard error per metric per method. Permutation-invariant in
/// the records; non-converged replicates are included in the averages and
/// counted separately. Throws validation_error on an empty record set.
std::map<std::string, MethodAggregate> aggregate(const std::vector<ReplicateRecord>& records);

/// 1 - corrected_FP / naive_FP, the per-experiment false-positive reduction.
double fp_reduction(const std::map<std::string, MethodAggregate>& summary,
                    const std::string& naive_method = "naive",
                    const std::string& corrected_method = "corrected");

}  // namespace melasso
