#include "melasso/metrics.hpp"

#include "melasso/types.hpp"

#include <cmath>

namespace melasso {

namespace {

MetricSummary summarize(const std::vector<double>& values) {
  const std::size_t m = values.size();
  MetricSummary s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(m);
  if (m < 2) return s;  // se = 0 convention for a single record
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  const double sd = std::sqrt(ss / static_cast<double>(m - 1));
  s.se = sd / std::sqrt(static_cast<double>(m));
  return s;
}

}  // namespace

std::map<std::string, MethodAggregate> aggregate(const std::vector<ReplicateRecord>& records) {
  if (records.empty()) throw validation_error("aggregate: no records");

  std::map<std::string, std::vector<const ReplicateRecord*>> groups;
  for (const auto& r : records) groups[r.method].push_back(&r);

  std::map<std::string, MethodAggregate> out;
  for (const auto& [method, group] : groups) {
    MethodAggregate agg;
    agg.count = static_cast<long>(group.size());
    std::vector<double> tp, fp, l2, l1;
    tp.reserve(group.size());
    fp.reserve(group.size());
    l2.reserve(group.size());
    l1.reserve(group.size());
    for (const auto* r : group) {
      if (!r->converged) ++agg.nonconverged;
      tp.push_back(static_cast<double>(r->metrics.tp));
      fp.push_back(static_cast<double>(r->metrics.fp));
      l2.push_back(r->metrics.l2_err);
      l1.push_back(r->metrics.l1_err);
    }
    agg.tp = summarize(tp);
    agg.fp = summarize(fp);
    agg.l2 = summarize(l2);
    agg.l1 = summarize(l1);
    out.emplace(method, std::move(agg));
  }
  return out;
}

double fp_reduction(const std::map<std::string, MethodAggregate>& summary,
                    const std::string& naive_method, const std::string& corrected_method) {
  const auto naive = summary.find(naive_method);
  const auto corrected = summary.find(corrected_method);
  if (naive == summary.end() || corrected == summary.end())
    throw validation_error("fp_reduction: missing method group");
  if (naive->second.fp.mean == 0.0)
    throw numeric_error("fp_reduction: naive FP mean is zero");
  return 1.0 - corrected->second.fp.mean / naive->second.fp.mean;
}

}  // namespace melasso
