#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <vector>

#include "gpa/cluster.hpp"
#include "gpa/grid.hpp"
#include "gpa/kernels.hpp"
#include "gpa/moments.hpp"
#include "gpa/synthdata.hpp"

using gpa::Cluster;
using gpa::Estimate;
using gpa::Grid;
using gpa::KernelSpec;
using gpa::PartitionPlan;
using gpa::PartitionStrategy;
using gpa::Sample;
using gpa::SimSetting;
using gpa::Strategy;

namespace {

Sample setting_sample(std::int64_t n, std::uint64_t seed) {
  return gpa::generate(SimSetting::numbered(1), n, seed).sample;
}

std::int64_t sum64(const std::vector<std::int64_t>& v) {
  return std::accumulate(v.begin(), v.end(), std::int64_t{0});
}

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(a));
}

}  // namespace

// =============================================================================
// Partition plans
// =============================================================================

TEST_CASE("random partitions are balanced and deterministic") {
  const Sample s = setting_sample(10, 1);
  const PartitionPlan p = gpa::partition_random(s, 2, 99);
  p.validate(10);
  CHECK(p.shards[0].size() == 5);
  CHECK(p.shards[1].size() == 5);

  const PartitionPlan q = gpa::partition_random(s, 2, 99);
  CHECK(p.assignment == q.assignment);
  const PartitionPlan r = gpa::partition_random(s, 2, 100);
  CHECK(p.assignment != r.assignment);

  const Sample big = setting_sample(10000, 2);
  const PartitionPlan bp = gpa::partition_random(big, 50, 7);
  bp.validate(10000);
  for (const auto& shard : bp.shards) CHECK(shard.size() == 200);

  CHECK_THROWS_AS(gpa::partition_random(s, 11, 1), std::invalid_argument);
  CHECK_THROWS_AS(gpa::partition_random(s, 0, 1), std::invalid_argument);
}

TEST_CASE("sorted partition blocks the covariate order statistics") {
  const Sample s({3.0, 1.0, 2.0}, {30.0, 10.0, 20.0});
  const PartitionPlan p = gpa::partition_sorted(s, 3);
  p.validate(3);
  // Machine m holds the m-th order statistic: rows 1, 2, 0.
  CHECK(p.shards[0] == std::vector<std::int64_t>{1});
  CHECK(p.shards[1] == std::vector<std::int64_t>{2});
  CHECK(p.shards[2] == std::vector<std::int64_t>{0});

  const Sample big = setting_sample(500, 3);
  const PartitionPlan bp = gpa::partition_sorted(big, 10);
  double prev_max = -1.0;
  for (const auto& shard : bp.shards) {
    double lo = 2.0, hi = -1.0;
    for (const std::int64_t i : shard) {
      lo = std::min(lo, big.x(i));
      hi = std::max(hi, big.x(i));
    }
    CHECK(lo >= prev_max);  // ranges disjoint up to ties
    prev_max = hi;
  }
}

TEST_CASE("sorted partition breaks ties by original row") {
  const Sample s({0.5, 0.5, 0.5, 0.5}, {0.0, 1.0, 2.0, 3.0});
  const PartitionPlan p = gpa::partition_sorted(s, 2);
  CHECK(p.shards[0] == std::vector<std::int64_t>{0, 1});
  CHECK(p.shards[1] == std::vector<std::int64_t>{2, 3});
}

// =============================================================================
// Pilot draws
// =============================================================================

TEST_CASE("a full-size pilot returns the whole sample as a set") {
  const Sample s = setting_sample(60, 5);
  const PartitionPlan p = gpa::partition_random(s, 6, 11);
  const Sample pilot = gpa::pilot_draw(p, s, 60, 123);
  REQUIRE(pilot.size() == 60);
  std::vector<double> a(pilot.xs().begin(), pilot.xs().end());
  std::vector<double> b(s.xs().begin(), s.xs().end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
}

TEST_CASE("pilot quotas split evenly across machines") {
  const Sample s = setting_sample(10000, 6);
  const PartitionPlan p = gpa::partition_random(s, 50, 13);
  const Sample pilot = gpa::pilot_draw(p, s, 1000, 29);
  REQUIRE(pilot.size() == 1000);
  // Rows arrive machine by machine: block m must lie inside shard m.
  for (int m = 0; m < 50; ++m) {
    std::vector<double> shard_x;
    for (const std::int64_t i : p.shards[static_cast<std::size_t>(m)]) {
      shard_x.push_back(s.x(i));
    }
    std::sort(shard_x.begin(), shard_x.end());
    for (int r = 0; r < 20; ++r) {
      const double x = pilot.x(20 * m + r);
      CHECK(std::binary_search(shard_x.begin(), shard_x.end(), x));
    }
  }

  const Sample again = gpa::pilot_draw(p, s, 1000, 29);
  for (std::int64_t i = 0; i < 1000; ++i) CHECK(pilot.x(i) == again.x(i));

  CHECK_THROWS_AS(gpa::pilot_draw(p, s, 49, 1), std::invalid_argument);
  CHECK_THROWS_AS(gpa::pilot_draw(p, s, 10001, 1), std::invalid_argument);
}

// =============================================================================
// Training
// =============================================================================

TEST_CASE("grid training is partition-invariant") {
  const Sample s = setting_sample(800, 21);
  const KernelSpec k = KernelSpec::epanechnikov();
  const double h = 0.07;
  const Grid grid(0.0, 1.0, 23);

  // Single-machine reference.
  const Cluster solo(s, gpa::partition_random(s, 1, 0));
  const gpa::TrainResult ref = gpa::run_train(Strategy::Gpa, solo, k, h, &grid);
  REQUIRE(ref.model.has_value());

  for (const int machines : {5, 50}) {
    for (const PartitionStrategy strat :
         {PartitionStrategy::Random, PartitionStrategy::SortedByCovariate}) {
      const Cluster cluster(s, gpa::make_partition(s, strat, machines, 77));
      const gpa::TrainResult got =
          gpa::run_train(Strategy::Gpa, cluster, k, h, &grid);
      REQUIRE(got.model.has_value());
      REQUIRE(got.model->values.size() == ref.model->values.size());
      CHECK(got.model->undefined == ref.model->undefined);
      for (std::size_t j = 0; j < ref.model->values.size(); ++j) {
        if (ref.model->undefined[j]) continue;
        CHECK(close(ref.model->values[j], got.model->values[j], 1e-12));
      }
      CHECK(got.model->meta.machines == machines);
      CHECK(got.model->meta.n_train == 800);
    }
  }
}

TEST_CASE("grid training ledger counts the protocol") {
  const Sample s = setting_sample(600, 23);
  const KernelSpec k = KernelSpec::epanechnikov();
  const Grid grid(0.0, 1.0, 19);
  const Cluster cluster(s, gpa::partition_random(s, 7, 3));
  const gpa::TrainResult out =
      gpa::run_train(Strategy::Gpa, cluster, k, 0.1, &grid);

  const std::int64_t per_worker = 2 * grid.point_count();
  CHECK(out.ledger.train.values_sent_to_coordinator == 7 * per_worker);
  CHECK(sum64(out.per_worker_sent) ==
        out.ledger.train.values_sent_to_coordinator);
  CHECK(out.ledger.train.values_broadcast_to_workers == 4 * 7);
  CHECK(out.ledger.train.round_trips == 1);
  CHECK(out.ledger.predict.values_sent_to_coordinator == 0);

  // The report lists every phase counter under stable keys.
  const auto rows = out.ledger.report();
  bool found = false;
  for (const auto& [key, value] : rows) {
    if (key == "train.values_sent_to_coordinator") {
      CHECK(value == std::to_string(7 * per_worker));
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("lazy strategies train with an empty ledger") {
  const Sample s = setting_sample(100, 25);
  const Cluster cluster(s, gpa::partition_random(s, 4, 5));
  for (const Strategy strat : {Strategy::GlobalAssembled, Strategy::OneShot}) {
    const gpa::TrainResult out =
        gpa::run_train(strat, cluster, KernelSpec::epanechnikov(), 0.1);
    CHECK_FALSE(out.model.has_value());
    CHECK(out.ledger.train.values_sent_to_coordinator == 0);
    CHECK(out.ledger.train.round_trips == 0);
  }
  CHECK_THROWS_AS(gpa::run_train(Strategy::Gpa, cluster,
                                 KernelSpec::epanechnikov(), 0.1),
                  std::invalid_argument);
}

// =============================================================================
// Prediction
// =============================================================================

TEST_CASE("assembled predictions equal the pooled-sample estimator") {
  const Sample s = setting_sample(700, 31);
  const Sample sorted = s.sorted_copy();
  const KernelSpec k = KernelSpec::epanechnikov();
  const double h = 0.09;
  const std::vector<double> queries{0.1, 0.25, 0.5, 0.75, 0.9};

  for (const int machines : {1, 6, 35}) {
    const Cluster cluster(s, gpa::partition_random(s, machines, 61));
    const gpa::PredictResult out =
        gpa::run_predict(Strategy::GlobalAssembled, cluster, k, h, queries);
    REQUIRE(out.estimates.size() == queries.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const Estimate direct = gpa::nw_estimate(sorted, queries[q], k, h);
      REQUIRE(direct.has_value() == out.estimates[q].has_value());
      if (direct.has_value()) {
        CHECK(close(*direct, *out.estimates[q], 1e-12));
      }
    }
    const auto nq = static_cast<std::int64_t>(queries.size());
    CHECK(out.ledger.predict.round_trips == nq);
    CHECK(out.ledger.predict.values_broadcast_to_workers == machines * nq);
    CHECK(out.ledger.predict.values_sent_to_coordinator == 2 * machines * nq);
    CHECK(sum64(out.per_worker_sent) ==
          out.ledger.predict.values_sent_to_coordinator);
  }
}

TEST_CASE("grid predictions need no communication at all") {
  const Sample s = setting_sample(500, 33);
  const KernelSpec k = KernelSpec::epanechnikov();
  const Grid grid(0.0, 1.0, 15);
  const Cluster cluster(s, gpa::partition_random(s, 5, 71));
  const gpa::TrainResult trained =
      gpa::run_train(Strategy::Gpa, cluster, k, 0.1, &grid);
  REQUIRE(trained.model.has_value());

  for (const std::size_t batch : {std::size_t{1}, std::size_t{17}, std::size_t{400}}) {
    std::vector<double> queries(batch);
    for (std::size_t q = 0; q < batch; ++q) {
      queries[q] = static_cast<double>(q + 1) / static_cast<double>(batch + 1);
    }
    const gpa::PredictResult out = gpa::run_predict(
        Strategy::Gpa, cluster, k, 0.1, queries, &*trained.model);
    CHECK(out.ledger.predict.values_sent_to_coordinator == 0);
    CHECK(out.ledger.predict.values_broadcast_to_workers == 0);
    CHECK(out.ledger.predict.round_trips == 0);
    CHECK(sum64(out.per_worker_sent) == 0);
    // Same answers as interpolating the model directly.
    for (std::size_t q = 0; q < batch; ++q) {
      CHECK(out.estimates[q] == gpa::predict(*trained.model, queries[q]));
    }
  }
}

TEST_CASE("one-shot prediction under a sorted partition loses coverage") {
  const Sample s = setting_sample(400, 35);
  const KernelSpec k = KernelSpec::epanechnikov();
  const Cluster cluster(s, gpa::partition_sorted(s, 20));
  const std::vector<double> queries{0.05, 0.3, 0.5, 0.7, 0.95};
  const gpa::PredictResult out =
      gpa::run_predict(Strategy::OneShot, cluster, k, 0.05, queries);
  // Each machine covers ~1/20 of the range; distant machines see nothing.
  std::int64_t undefined = 0;
  for (const Estimate& e : out.estimates) undefined += !e.has_value();
  CHECK(undefined == static_cast<std::int64_t>(queries.size()));
  CHECK(out.ledger.predict.values_sent_to_coordinator ==
        20 * static_cast<std::int64_t>(queries.size()));

  // Under a random partition at the same size every machine keeps global
  // coverage and the estimates exist.
  const Cluster random_cluster(s, gpa::partition_random(s, 4, 9));
  const gpa::PredictResult ok =
      gpa::run_predict(Strategy::OneShot, random_cluster, k, 0.15, queries);
  for (const Estimate& e : ok.estimates) CHECK(e.has_value());
}

TEST_CASE("one-shot approaches the assembled fit as shards grow") {
  const KernelSpec k = KernelSpec::epanechnikov();
  const double h = 0.1;
  const int machines = 5;
  std::vector<double> queries;
  for (int q = 0; q < 25; ++q) queries.push_back(0.2 + 0.6 * q / 24.0);

  double mean_gap[3] = {0.0, 0.0, 0.0};
  const std::int64_t per_machine[3] = {100, 400, 1600};
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    for (int c = 0; c < 3; ++c) {
      const Sample s = setting_sample(machines * per_machine[c], 1000 + seed);
      const Cluster cluster(s, gpa::partition_random(s, machines, seed));
      const gpa::PredictResult os =
          gpa::run_predict(Strategy::OneShot, cluster, k, h, queries);
      const gpa::PredictResult gl =
          gpa::run_predict(Strategy::GlobalAssembled, cluster, k, h, queries);
      double gap = 0.0;
      int used = 0;
      for (std::size_t q = 0; q < queries.size(); ++q) {
        if (!os.estimates[q].has_value() || !gl.estimates[q].has_value()) {
          continue;
        }
        gap += std::abs(*os.estimates[q] - *gl.estimates[q]);
        ++used;
      }
      REQUIRE(used > 0);
      mean_gap[c] += gap / used;
    }
  }
  CHECK(mean_gap[1] < mean_gap[0]);
  CHECK(mean_gap[2] < mean_gap[1]);
}

// =============================================================================
// Bandwidth phase
// =============================================================================

TEST_CASE("one-shot bandwidth selection sends one scalar per machine") {
  const Sample s = setting_sample(2000, 41);
  const Cluster cluster(s, gpa::partition_random(s, 8, 43));
  const gpa::BandwidthResult out = gpa::run_bandwidth(
      gpa::BandwidthMethod::OneShotCV, cluster, KernelSpec::epanechnikov());
  REQUIRE(out.local_selections.size() == 8);
  CHECK(out.ledger.bandwidth.values_sent_to_coordinator == 8);
  CHECK(out.ledger.bandwidth.round_trips == 1);
  CHECK(sum64(out.per_worker_sent) == 8);
  // Coordinator combination: M^{-e} times the mean of the local picks.
  CHECK(out.h ==
        doctest::Approx(gpa::oneshot_bandwidth(out.local_selections))
            .epsilon(1e-15));
  // Every local pick respects its shard-sized candidate interval.
  const double center = std::pow(250.0, -0.2);
  for (const double hm : out.local_selections) {
    CHECK(hm >= center / 8.0 - 1e-15);
    CHECK(hm <= center * 8.0 + 1e-15);
  }
}

TEST_CASE("pilot bandwidth selection ships two scalars per pilot row") {
  const Sample s = setting_sample(2000, 47);
  const Cluster cluster(s, gpa::partition_sorted(s, 8));
  gpa::BandwidthOptions options;
  options.pilot_size = 200;
  options.pilot_seed = 5;
  const gpa::BandwidthResult out = gpa::run_bandwidth(
      gpa::BandwidthMethod::PilotCV, cluster, KernelSpec::epanechnikov(),
      options);
  REQUIRE(out.pilot.has_value());
  CHECK(out.ledger.bandwidth.values_sent_to_coordinator == 2 * 200);
  CHECK(sum64(out.per_worker_sent) == 2 * 200);
  CHECK(out.ledger.bandwidth.round_trips == 1);
  CHECK(out.h == doctest::Approx(out.pilot->pilot_h *
                                 std::pow(2000.0 / 200.0, -0.2))
                     .epsilon(1e-14));

  // Same options, same draw, same answer.
  const gpa::BandwidthResult again = gpa::run_bandwidth(
      gpa::BandwidthMethod::PilotCV, cluster, KernelSpec::epanechnikov(),
      options);
  CHECK(out.h == again.h);
}

// =============================================================================
// Worker-thread independence
// =============================================================================

TEST_CASE("results do not depend on the worker thread count") {
  const Sample s = setting_sample(1200, 51);
  const KernelSpec k = KernelSpec::epanechnikov();
  const Grid grid(0.0, 1.0, 17);
  const Cluster cluster(s, gpa::partition_random(s, 12, 53));
  std::vector<double> queries{0.2, 0.4, 0.6, 0.8};

  setenv("GPA_THREADS", "4", 1);
  const gpa::TrainResult train_mt =
      gpa::run_train(Strategy::Gpa, cluster, k, 0.08, &grid);
  const gpa::PredictResult pred_mt =
      gpa::run_predict(Strategy::GlobalAssembled, cluster, k, 0.08, queries);
  setenv("GPA_THREADS", "1", 1);
  const gpa::TrainResult train_st =
      gpa::run_train(Strategy::Gpa, cluster, k, 0.08, &grid);
  const gpa::PredictResult pred_st =
      gpa::run_predict(Strategy::GlobalAssembled, cluster, k, 0.08, queries);
  unsetenv("GPA_THREADS");

  REQUIRE(train_mt.model.has_value());
  REQUIRE(train_st.model.has_value());
  // The merge happens in machine order either way: identical bits.
  CHECK(train_mt.model->values == train_st.model->values);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    CHECK(pred_mt.estimates[q] == pred_st.estimates[q]);
  }
}

// =============================================================================
// Name round-trips
// =============================================================================

TEST_CASE("strategy and method names round-trip") {
  for (const Strategy s :
       {Strategy::GlobalAssembled, Strategy::OneShot, Strategy::Gpa}) {
    CHECK(gpa::strategy_from_name(gpa::strategy_name(s)) == s);
  }
  for (const PartitionStrategy s :
       {PartitionStrategy::Random, PartitionStrategy::SortedByCovariate}) {
    CHECK(gpa::partition_strategy_from_name(gpa::partition_strategy_name(s)) ==
          s);
  }
  for (const gpa::BandwidthMethod m :
       {gpa::BandwidthMethod::OneShotCV, gpa::BandwidthMethod::PilotCV}) {
    CHECK(gpa::bandwidth_method_from_name(gpa::bandwidth_method_name(m)) == m);
  }
  CHECK_THROWS_AS(gpa::strategy_from_name("spark"), std::invalid_argument);
  CHECK_THROWS_AS(gpa::partition_strategy_from_name("hash"),
                  std::invalid_argument);
  CHECK_THROWS_AS(gpa::bandwidth_method_from_name("oracle"),
                  std::invalid_argument);
}
