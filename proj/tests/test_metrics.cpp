#include "melasso/metrics.hpp"

#include "melasso/rng.hpp"
#include "melasso/types.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace melasso;

namespace {

ReplicateRecord record(long rep, const std::string& method, long tp, long fp, double l2,
                       double l1, bool converged = true) {
  ReplicateRecord r;
  r.replicate = rep;
  r.method = method;
  r.metrics.tp = tp;
  r.metrics.fp = fp;
  r.metrics.l2_err = l2;
  r.metrics.l1_err = l1;
  r.converged = converged;
  return r;
}

}  // namespace

TEST_CASE("single record: mean is the value, se is zero") {
  const auto summary = aggregate({record(0, "naive", 4, 10, 1.5, 3.0)});
  const auto& a = summary.at("naive");
  CHECK(a.count == 1);
  CHECK(a.fp.mean == 10.0);
  CHECK(a.fp.se == 0.0);
  CHECK(a.l2.mean == 1.5);
  CHECK(a.l2.se == 0.0);
}

TEST_CASE("two records: hand arithmetic") {
  const auto summary = aggregate({
      record(0, "naive", 3, 2, 1.0, 2.0),
      record(1, "naive", 5, 4, 3.0, 6.0),
  });
  const auto& a = summary.at("naive");
  CHECK(a.fp.mean == 3.0);
  // sd = sqrt(2), se = sd / sqrt(2) = 1
  CHECK(a.fp.se == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.l2.mean == 2.0);
  CHECK(a.l2.se == doctest::Approx(std::sqrt(2.0) / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("aggregation is permutation invariant and tracks non-convergence") {
  std::vector<ReplicateRecord> records;
  RngStream rng(601);
  for (long i = 0; i < 40; ++i) {
    records.push_back(record(i, "naive", 3 + static_cast<long>(rng.uniform_below(3)),
                             static_cast<long>(rng.uniform_below(30)),
                             rng.next_uniform() * 3.0, rng.next_uniform() * 8.0,
                             i % 7 != 0));
    records.push_back(record(i, "corrected", 3, static_cast<long>(rng.uniform_below(20)),
                             rng.next_uniform() * 2.0, rng.next_uniform() * 5.0));
  }
  const auto base = aggregate(records);

  std::vector<ReplicateRecord> shuffled = records;
  RngStream shuffle_rng(602);
  shuffle_rng.shuffle(shuffled.begin(), shuffled.end());
  const auto again = aggregate(shuffled);

  for (const auto& method : {std::string("naive"), std::string("corrected")}) {
    CHECK(base.at(method).fp.mean == doctest::Approx(again.at(method).fp.mean).epsilon(1e-14));
    CHECK(base.at(method).fp.se == doctest::Approx(again.at(method).fp.se).epsilon(1e-14));
    CHECK(base.at(method).nonconverged == again.at(method).nonconverged);
  }
  CHECK(base.at("naive").nonconverged == 6);  // replicates 0, 7, 14, 21, 28, 35
  CHECK(base.at("corrected").nonconverged == 0);
}

TEST_CASE("empty input is an error") {
  CHECK_THROWS_AS(aggregate({}), validation_error);
}

TEST_CASE("CLT sanity at the published table scale") {
  // Synthetic FP draws centered on the published naive mean with a wide sd.
  RngStream rng(607);
  std::vector<ReplicateRecord> records;
  const double target_mean = 24.82, sd = 19.0;
  const int m = 200;
  for (int i = 0; i < m; ++i) {
    const double v = std::max(0.0, target_mean + sd * rng.next_normal());
    records.push_back(record(i, "naive", 4, static_cast<long>(std::lround(v)), 1.0, 2.0));
  }
  const auto summary = aggregate(records);
  CHECK(std::abs(summary.at("naive").fp.mean - target_mean) <
        3.0 * sd / std::sqrt(static_cast<double>(m)) + 0.5);
}

TEST_CASE("fp reduction statistic") {
  std::vector<ReplicateRecord> records = {
      record(0, "naive", 4, 20, 1.0, 2.0),
      record(1, "naive", 4, 30, 1.0, 2.0),
      record(0, "corrected", 4, 10, 1.0, 2.0),
      record(1, "corrected", 4, 15, 1.0, 2.0),
  };
  const auto summary = aggregate(records);
  CHECK(fp_reduction(summary) == doctest::Approx(0.5).epsilon(1e-12));
}
