#include "gpa/cluster.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>

#include "gpa/moments.hpp"
#include "gpa/parallel.hpp"

namespace gpa {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Balanced shard size: the first N mod M machines carry the extra row. The
// pilot quota uses the same convention, so a quota never exceeds its shard.
std::int64_t balanced_size(std::int64_t n, int machines, int m) {
  const std::int64_t base = n / machines;
  return base + (m < static_cast<int>(n % machines) ? 1 : 0);
}

std::string format_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", s);
  return buf;
}

}  // namespace

// =============================================================================
// Names
// =============================================================================

std::string_view partition_strategy_name(PartitionStrategy s) {
  switch (s) {
    case PartitionStrategy::Random: return "random";
    case PartitionStrategy::SortedByCovariate: return "sorted";
  }
  throw std::invalid_argument("partition_strategy_name: unknown enumerator");
}

PartitionStrategy partition_strategy_from_name(std::string_view name) {
  if (name == "random") return PartitionStrategy::Random;
  if (name == "sorted") return PartitionStrategy::SortedByCovariate;
  throw std::invalid_argument("unknown partition strategy '" +
                              std::string(name) + "' (random|sorted)");
}

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::GlobalAssembled: return "global";
    case Strategy::OneShot: return "oneshot";
    case Strategy::Gpa: return "gpa";
  }
  throw std::invalid_argument("strategy_name: unknown enumerator");
}

Strategy strategy_from_name(std::string_view name) {
  if (name == "global") return Strategy::GlobalAssembled;
  if (name == "oneshot") return Strategy::OneShot;
  if (name == "gpa") return Strategy::Gpa;
  throw std::invalid_argument("unknown strategy '" + std::string(name) +
                              "' (global|oneshot|gpa)");
}

std::string_view bandwidth_method_name(BandwidthMethod m) {
  switch (m) {
    case BandwidthMethod::OneShotCV: return "oneshot";
    case BandwidthMethod::PilotCV: return "pilot";
  }
  throw std::invalid_argument("bandwidth_method_name: unknown enumerator");
}

BandwidthMethod bandwidth_method_from_name(std::string_view name) {
  if (name == "oneshot") return BandwidthMethod::OneShotCV;
  if (name == "pilot") return BandwidthMethod::PilotCV;
  throw std::invalid_argument("unknown bandwidth method '" +
                              std::string(name) + "' (oneshot|pilot)");
}

// =============================================================================
// Partitions
// =============================================================================

void PartitionPlan::validate(std::int64_t n) const {
  if (machines < 1)
    throw std::invalid_argument("PartitionPlan: need >= 1 machine");
  if (static_cast<std::int64_t>(assignment.size()) != n ||
      static_cast<int>(shards.size()) != machines)
    throw std::invalid_argument("PartitionPlan: shape mismatch");

  std::int64_t seen = 0, lo = n + 1, hi = -1;
  std::vector<std::uint8_t> hit(static_cast<std::size_t>(n), 0);
  for (int m = 0; m < machines; ++m) {
    const auto sz = static_cast<std::int64_t>(shards[static_cast<std::size_t>(m)].size());
    lo = std::min(lo, sz);
    hi = std::max(hi, sz);
    for (std::int64_t i : shards[static_cast<std::size_t>(m)]) {
      if (i < 0 || i >= n || hit[static_cast<std::size_t>(i)])
        throw std::invalid_argument("PartitionPlan: shards must be disjoint");
      if (assignment[static_cast<std::size_t>(i)] != m)
        throw std::invalid_argument("PartitionPlan: assignment disagrees with shards");
      hit[static_cast<std::size_t>(i)] = 1;
      ++seen;
    }
  }
  if (seen != n)
    throw std::invalid_argument("PartitionPlan: shards must be exhaustive");
  if (hi - lo > 1)
    throw std::invalid_argument("PartitionPlan: shard sizes differ by > 1");
}

namespace {

PartitionPlan plan_from_order(const std::vector<std::int64_t>& order,
                              int machines, PartitionStrategy strategy,
                              bool canonical_sort) {
  const std::int64_t n = static_cast<std::int64_t>(order.size());
  PartitionPlan plan;
  plan.machines = machines;
  plan.strategy = strategy;
  plan.assignment.assign(static_cast<std::size_t>(n), 0);
  plan.shards.resize(static_cast<std::size_t>(machines));

  std::int64_t pos = 0;
  for (int m = 0; m < machines; ++m) {
    const std::int64_t sz = balanced_size(n, machines, m);
    auto& shard = plan.shards[static_cast<std::size_t>(m)];
    shard.assign(order.begin() + pos, order.begin() + pos + sz);
    if (canonical_sort) std::sort(shard.begin(), shard.end());
    for (std::int64_t i : shard) plan.assignment[static_cast<std::size_t>(i)] = m;
    pos += sz;
  }
  return plan;
}

}  // namespace

PartitionPlan partition_random(const Sample& sample, int machines,
                               std::uint64_t seed) {
  const std::int64_t n = sample.size();
  if (machines < 1 || machines > n)
    throw std::invalid_argument("partition_random: need 1 <= M <= N");
  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::int64_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return plan_from_order(order, machines, PartitionStrategy::Random,
                         /*canonical_sort=*/true);
}

PartitionPlan partition_sorted(const Sample& sample, int machines) {
  const std::int64_t n = sample.size();
  if (sample.dim() != 1)
    throw std::invalid_argument("partition_sorted: univariate samples only");
  if (machines < 1 || machines > n)
    throw std::invalid_argument("partition_sorted: need 1 <= M <= N");
  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::int64_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    return sample.x(a) < sample.x(b);
  });
  return plan_from_order(order, machines, PartitionStrategy::SortedByCovariate,
                         /*canonical_sort=*/false);
}

PartitionPlan make_partition(const Sample& sample, PartitionStrategy strategy,
                             int machines, std::uint64_t seed) {
  return strategy == PartitionStrategy::Random
             ? partition_random(sample, machines, seed)
             : partition_sorted(sample, machines);
}

Sample pilot_draw(const PartitionPlan& plan, const Sample& sample,
                  std::int64_t n0, std::uint64_t seed) {
  plan.validate(sample.size());
  if (n0 < plan.machines)
    throw std::invalid_argument("pilot_draw: pilot smaller than machine count");
  if (n0 > sample.size())
    throw std::invalid_argument("pilot_draw: pilot larger than the sample");

  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(n0));
  for (int m = 0; m < plan.machines; ++m) {
    const std::int64_t quota = balanced_size(n0, plan.machines, m);
    const auto& shard = plan.shards[static_cast<std::size_t>(m)];
    std::sample(shard.begin(), shard.end(), std::back_inserter(chosen),
                quota, rng);
  }
  return sample.subset(chosen);
}

// =============================================================================
// Ledger
// =============================================================================

std::vector<std::pair<std::string, std::string>> CostLedger::report() const {
  std::vector<std::pair<std::string, std::string>> rows;
  const std::pair<const char*, const PhaseCost*> phases[] = {
      {"train", &train}, {"bandwidth", &bandwidth}, {"predict", &predict}};
  for (const auto& [name, cost] : phases) {
    const std::string p = std::string(name) + ".";
    rows.emplace_back(p + "values_sent_to_coordinator",
                      std::to_string(cost->values_sent_to_coordinator));
    rows.emplace_back(p + "values_broadcast_to_workers",
                      std::to_string(cost->values_broadcast_to_workers));
    rows.emplace_back(p + "worker_flops_proxy",
                      std::to_string(cost->worker_flops_proxy));
    rows.emplace_back(p + "coordinator_flops_proxy",
                      std::to_string(cost->coordinator_flops_proxy));
    rows.emplace_back(p + "round_trips", std::to_string(cost->round_trips));
    rows.emplace_back(p + "wall_seconds", format_seconds(cost->wall_seconds));
  }
  return rows;
}

// =============================================================================
// Cluster
// =============================================================================

Cluster::Cluster(const Sample& sample, PartitionPlan plan)
    : sample_(&sample), plan_(std::move(plan)) {
  plan_.validate(sample.size());
  shards_.reserve(static_cast<std::size_t>(plan_.machines));
  for (int m = 0; m < plan_.machines; ++m) {
    Sample shard = sample.subset(plan_.shards[static_cast<std::size_t>(m)]);
    // Covariate-sorted shards take the windowed fast path everywhere.
    shards_.push_back(sample.dim() == 1 ? shard.sorted_copy()
                                        : std::move(shard));
  }
}

const Sample& Cluster::shard(int m) const {
  if (m < 0 || m >= plan_.machines)
    throw std::out_of_range("Cluster::shard: machine id out of range");
  return shards_[static_cast<std::size_t>(m)];
}

// =============================================================================
// Training
// =============================================================================

namespace {

// Row-major lattice of grid points over `dim` identical axes, axis 0 slowest
// (the stride convention the simplex walk expects).
std::vector<double> lattice_points(const Grid& axis, int dim) {
  const std::int64_t per_axis = axis.point_count();
  std::int64_t total = 1;
  for (int s = 0; s < dim; ++s) total *= per_axis;

  std::vector<double> pts(static_cast<std::size_t>(total) *
                          static_cast<std::size_t>(dim));
  std::vector<std::int64_t> digit(static_cast<std::size_t>(dim), 0);
  for (std::int64_t f = 0; f < total; ++f) {
    for (int s = 0; s < dim; ++s)
      pts[static_cast<std::size_t>(f) * static_cast<std::size_t>(dim) +
          static_cast<std::size_t>(s)] =
          axis.point(digit[static_cast<std::size_t>(s)]);
    for (int s = dim - 1; s >= 0; --s) {  // odometer, last axis fastest
      if (++digit[static_cast<std::size_t>(s)] <= axis.segments()) break;
      digit[static_cast<std::size_t>(s)] = 0;
    }
  }
  return pts;
}

}  // namespace

TrainResult run_train(Strategy strategy, const Cluster& cluster,
                      const KernelSpec& kernel, double h, const Grid* grid,
                      int nu, ModelMeta meta) {
  TrainResult out;
  out.strategy = strategy;
  out.per_worker_sent.assign(static_cast<std::size_t>(cluster.machines()), 0);
  if (strategy != Strategy::Gpa) return out;  // lazy strategies: zero ledger

  if (grid == nullptr)
    throw std::invalid_argument("run_train: grid strategy needs a grid");
  const auto t0 = Clock::now();
  const int M = cluster.machines();
  const std::vector<double> pts = lattice_points(*grid, cluster.dim());
  const std::int64_t total =
      static_cast<std::int64_t>(pts.size()) / cluster.dim();

  // Workers: local moment sums at every grid point.
  std::vector<MomentStats> stats(static_cast<std::size_t>(M));
  parallel_for(M, [&](std::int64_t m) {
    stats[static_cast<std::size_t>(m)] = local_moments(
        cluster.shard(static_cast<int>(m)), pts, kernel, h);
  });

  // Coordinator: merge in machine order, then fix the grid values.
  PhaseCost& cost = out.ledger.train;
  MomentStats merged = std::move(stats[0]);
  for (int m = 1; m < M; ++m)
    merge_into(merged, stats[static_cast<std::size_t>(m)]);
  for (int m = 0; m < M; ++m) {
    out.per_worker_sent[static_cast<std::size_t>(m)] = 2 * total;
    cost.values_sent_to_coordinator += 2 * total;
  }
  for (std::int64_t w : merged.in_window) cost.worker_flops_proxy += w;
  cost.values_broadcast_to_workers = 4 * M;  // lo, hi, J, h per worker
  cost.round_trips = 1;
  cost.coordinator_flops_proxy = 2 * total * (M - 1) + total;

  meta.n_train = cluster.size();
  meta.machines = M;
  out.model = fit_grid(merged, *grid, cluster.dim(), kernel, h, nu,
                       std::move(meta));
  cost.wall_seconds = seconds_since(t0);
  return out;
}

// =============================================================================
// Prediction
// =============================================================================

PredictResult run_predict(Strategy strategy, const Cluster& cluster,
                          const KernelSpec& kernel, double h,
                          std::span<const double> queries,
                          const GpaModel* model) {
  const auto t0 = Clock::now();
  const int dim = strategy == Strategy::Gpa && model != nullptr ? model->dim
                                                                : cluster.dim();
  if (queries.empty() ||
      queries.size() % static_cast<std::size_t>(dim) != 0)
    throw std::invalid_argument("run_predict: query layout mismatch");
  const std::int64_t nq =
      static_cast<std::int64_t>(queries.size()) / dim;

  PredictResult out;
  out.estimates.resize(static_cast<std::size_t>(nq));
  out.per_worker_sent.assign(static_cast<std::size_t>(cluster.machines()), 0);
  PhaseCost& cost = out.ledger.predict;

  if (strategy == Strategy::Gpa) {
    if (model == nullptr)
      throw std::invalid_argument("run_predict: grid strategy needs a model");
    // Coordinator-only interpolation: communication counters stay zero.
    for (std::int64_t q = 0; q < nq; ++q) {
      if (model->dim == 1) {
        out.estimates[static_cast<std::size_t>(q)] =
            predict(*model, queries[static_cast<std::size_t>(q)], &out.flags);
      } else {
        out.estimates[static_cast<std::size_t>(q)] = predict_multi(
            *model, queries.subspan(static_cast<std::size_t>(q) *
                                        static_cast<std::size_t>(dim),
                                    static_cast<std::size_t>(dim)));
      }
    }
    cost.coordinator_flops_proxy =
        nq * (model->dim == 1 ? model->nu + 1 : model->dim + 1);
    cost.wall_seconds = seconds_since(t0);
    return out;
  }

  // Workers: moment sums (global) or local estimates (one-shot) per query.
  const int M = cluster.machines();
  std::vector<MomentStats> stats(static_cast<std::size_t>(M));
  parallel_for(M, [&](std::int64_t m) {
    stats[static_cast<std::size_t>(m)] = local_moments(
        cluster.shard(static_cast<int>(m)), queries, kernel, h);
  });
  for (const auto& s : stats)
    for (std::int64_t w : s.in_window) cost.worker_flops_proxy += w;

  if (strategy == Strategy::GlobalAssembled) {
    MomentStats merged = std::move(stats[0]);
    for (int m = 1; m < M; ++m)
      merge_into(merged, stats[static_cast<std::size_t>(m)]);
    for (std::int64_t q = 0; q < nq; ++q)
      out.estimates[static_cast<std::size_t>(q)] =
          nw_from_stats(merged, static_cast<std::size_t>(q));
    for (int m = 0; m < M; ++m)
      out.per_worker_sent[static_cast<std::size_t>(m)] = 2 * nq;
    cost.values_sent_to_coordinator = std::int64_t{2} * M * nq;
    cost.coordinator_flops_proxy = nq * (2 * std::int64_t{M} + 1);
  } else {  // OneShot
    std::vector<Estimate> locals(static_cast<std::size_t>(M));
    for (std::int64_t q = 0; q < nq; ++q) {
      for (int m = 0; m < M; ++m)
        locals[static_cast<std::size_t>(m)] = nw_from_stats(
            stats[static_cast<std::size_t>(m)], static_cast<std::size_t>(q));
      out.estimates[static_cast<std::size_t>(q)] = oneshot_combine(locals);
    }
    for (int m = 0; m < M; ++m)
      out.per_worker_sent[static_cast<std::size_t>(m)] = nq;
    cost.values_sent_to_coordinator = std::int64_t{M} * nq;
    cost.coordinator_flops_proxy = nq * (std::int64_t{M} + 1);
  }
  cost.values_broadcast_to_workers = std::int64_t{M} * nq * dim;
  cost.round_trips = nq;  // one distributed evaluation per query
  cost.wall_seconds = seconds_since(t0);
  return out;
}

// =============================================================================
// Bandwidth selection
// =============================================================================

BandwidthResult run_bandwidth(BandwidthMethod method, const Cluster& cluster,
                              const KernelSpec& kernel,
                              const BandwidthOptions& options) {
  if (cluster.dim() != 1)
    throw std::invalid_argument("run_bandwidth: univariate samples only");
  const auto t0 = Clock::now();
  const int M = cluster.machines();

  BandwidthResult out;
  out.per_worker_sent.assign(static_cast<std::size_t>(M), 0);
  PhaseCost& cost = out.ledger.bandwidth;

  if (method == BandwidthMethod::OneShotCV) {
    out.local_selections.assign(static_cast<std::size_t>(M), 0.0);
    std::vector<std::int64_t> evals(static_cast<std::size_t>(M), 0);
    parallel_for(M, [&](std::int64_t m) {
      const Sample& shard = cluster.shard(static_cast<int>(m));
      CandidateSet cands;
      cands.n_ref = static_cast<double>(shard.size());
      cands.span = options.span;
      cands.count = options.count;
      cands.exponent = options.exponent;
      const WeightFn weight = WeightFn::from_sample(shard, options.trim);
      const CvSelection sel = minimize_cv(shard, cands, kernel, weight);
      out.local_selections[static_cast<std::size_t>(m)] = sel.h;
      for (const auto& [h, score] : sel.table)
        evals[static_cast<std::size_t>(m)] += score.kernel_evals;
    });
    out.h = oneshot_bandwidth(out.local_selections, options.exponent);
    for (int m = 0; m < M; ++m) {
      out.per_worker_sent[static_cast<std::size_t>(m)] = 1;
      cost.worker_flops_proxy += evals[static_cast<std::size_t>(m)];
    }
    cost.values_sent_to_coordinator = M;
    cost.coordinator_flops_proxy = M;
    cost.round_trips = 1;
  } else {  // PilotCV
    const Sample pilot =
        pilot_draw(cluster.plan(), cluster.full_sample(), options.pilot_size,
                   options.pilot_seed)
            .sorted_copy();
    const WeightFn weight = WeightFn::from_sample(pilot, options.trim);
    PilotSelection sel =
        pilot_bandwidth(pilot, cluster.size(), kernel, weight, options.count,
                        options.span, options.exponent);
    out.h = sel.h;
    for (int m = 0; m < M; ++m) {
      const std::int64_t quota = balanced_size(options.pilot_size, M, m);
      out.per_worker_sent[static_cast<std::size_t>(m)] = 2 * quota;
      cost.values_sent_to_coordinator += 2 * quota;
    }
    for (const auto& [h, score] : sel.selection.table)
      cost.coordinator_flops_proxy += score.kernel_evals;
    out.pilot = std::move(sel);
    cost.values_broadcast_to_workers = M;  // each worker told its quota
    cost.round_trips = 1;
  }
  cost.wall_seconds = seconds_since(t0);
  return out;
}

}  // namespace gpa
