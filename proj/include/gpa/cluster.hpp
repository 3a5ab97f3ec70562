#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gpa/bandwidth.hpp"
#include "gpa/estimate.hpp"
#include "gpa/kernels.hpp"
#include "gpa/model.hpp"
#include "gpa/sample.hpp"

namespace gpa {

// =============================================================================
// Partition plans
// =============================================================================

enum class PartitionStrategy { Random, SortedByCovariate };

std::string_view partition_strategy_name(PartitionStrategy s);
PartitionStrategy partition_strategy_from_name(std::string_view name);

// Disjoint, exhaustive, balanced (sizes differ by at most one; the first
// N mod M machines hold the extra row).
struct PartitionPlan {
  int machines = 1;
  PartitionStrategy strategy = PartitionStrategy::Random;
  std::vector<std::int64_t> assignment;           // sample row -> machine
  std::vector<std::vector<std::int64_t>> shards;  // machine -> sample rows

  void validate(std::int64_t n) const;  // throws std::invalid_argument
};

// Uniform random balanced assignment, seed-deterministic.
PartitionPlan partition_random(const Sample& sample, int machines,
                               std::uint64_t seed);
// Machine m holds the m-th block of the covariate order statistics
// (univariate; ties broken by original row, stable).
PartitionPlan partition_sorted(const Sample& sample, int machines);
PartitionPlan make_partition(const Sample& sample, PartitionStrategy strategy,
                             int machines, std::uint64_t seed);

// Per-machine simple random sampling without replacement, floor(n0/M) rows
// each plus a round-robin remainder, pooled in machine order.
Sample pilot_draw(const PartitionPlan& plan, const Sample& sample,
                  std::int64_t n0, std::uint64_t seed);

// =============================================================================
// Protocol cost accounting
// =============================================================================
//
// "Communication" is counted at the protocol level: scalars crossing the
// worker/coordinator boundary, not bytes on a wire. Flops proxies count
// kernel evaluations (workers) and reduction/interpolation scalar ops
// (coordinator). Wall-clock is a diagnostic only.

struct PhaseCost {
  std::int64_t values_sent_to_coordinator = 0;
  std::int64_t values_broadcast_to_workers = 0;
  std::int64_t worker_flops_proxy = 0;
  std::int64_t coordinator_flops_proxy = 0;
  std::int64_t round_trips = 0;
  double wall_seconds = 0.0;
};

struct CostLedger {
  PhaseCost train;
  PhaseCost bandwidth;
  PhaseCost predict;

  // Flat key=value rows ("predict.round_trips", ...), phases in fixed order.
  std::vector<std::pair<std::string, std::string>> report() const;
};

// =============================================================================
// In-process cluster
// =============================================================================

// Workers are in-process actors over immutable shard views; univariate
// shards are materialized covariate-sorted so the windowed moment pass
// applies. The coordinator performs every reduction in machine order, so
// results do not depend on the worker thread count.
class Cluster {
 public:
  Cluster(const Sample& sample, PartitionPlan plan);

  int machines() const { return plan_.machines; }
  const PartitionPlan& plan() const { return plan_; }
  const Sample& shard(int m) const;
  const Sample& full_sample() const { return *sample_; }
  int dim() const { return sample_->dim(); }
  std::int64_t size() const { return sample_->size(); }

 private:
  const Sample* sample_;  // borrowed; caller keeps it alive
  PartitionPlan plan_;
  std::vector<Sample> shards_;
};

// =============================================================================
// Distributed strategies
// =============================================================================

enum class Strategy { GlobalAssembled, OneShot, Gpa };

std::string_view strategy_name(Strategy s);
Strategy strategy_from_name(std::string_view name);

// Training. Only the grid strategy has a training phase: every worker
// evaluates its local moment sums at all grid points (2 scalars per point
// sent up), the coordinator merges and fixes the model. The other two
// strategies train lazily and record a zero ledger.
struct TrainResult {
  Strategy strategy = Strategy::Gpa;
  std::optional<GpaModel> model;  // engaged iff strategy == Gpa
  CostLedger ledger;
  std::vector<std::int64_t> per_worker_sent;
};
TrainResult run_train(Strategy strategy, const Cluster& cluster,
                      const KernelSpec& kernel, double h,
                      const Grid* grid = nullptr, int nu = 1,
                      ModelMeta meta = {});

// Prediction at row-major query points.
//
//   GlobalAssembled  per query: broadcast the point, gather 2 scalars per
//                    worker, combine into the exact pooled-sample ratio.
//   OneShot          per query: gather 1 local estimate per worker, average;
//                    Undefined if any machine is Undefined.
//   Gpa              coordinator-only interpolation; communication counters
//                    are identically zero. Requires `model`.
struct PredictResult {
  std::vector<Estimate> estimates;
  CostLedger ledger;
  PredictFlags flags;  // grid strategy only
  std::vector<std::int64_t> per_worker_sent;
};
PredictResult run_predict(Strategy strategy, const Cluster& cluster,
                          const KernelSpec& kernel, double h,
                          std::span<const double> queries,
                          const GpaModel* model = nullptr);

// Bandwidth selection.
//
//   OneShotCV  every worker minimizes CV on its own shard (candidates scaled
//              to the shard size, weight trimmed to the shard range) and
//              sends one scalar; the coordinator averages and rescales by
//              M^-e.
//   PilotCV    workers send their pilot rows (2 scalars each); the
//              coordinator pools them, minimizes CV at the pilot scale and
//              rescales by (N/n0)^-e.
enum class BandwidthMethod { OneShotCV, PilotCV };

std::string_view bandwidth_method_name(BandwidthMethod m);
BandwidthMethod bandwidth_method_from_name(std::string_view name);

struct BandwidthOptions {
  double trim = config::kDefaultTrim;
  double span = config::kCandidateSpan;
  int count = config::kCandidateCount;
  double exponent = config::kDefaultRateExponent;
  std::int64_t pilot_size = 1000;  // PilotCV only
  std::uint64_t pilot_seed = 0;    // PilotCV only
};

struct BandwidthResult {
  double h = 0.0;
  std::vector<double> local_selections;  // OneShotCV: one per machine
  std::optional<PilotSelection> pilot;   // PilotCV details
  CostLedger ledger;
  std::vector<std::int64_t> per_worker_sent;
};
BandwidthResult run_bandwidth(BandwidthMethod method, const Cluster& cluster,
                              const KernelSpec& kernel,
                              const BandwidthOptions& options = {});

}  // namespace gpa
