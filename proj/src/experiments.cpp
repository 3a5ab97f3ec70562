#include "gpa/experiments.hpp"

#include <stdexcept>

#include "gpa/grid.hpp"

namespace gpa {

TrialResult run_trial(const TrialConfig& cfg) {
  if (!(cfg.h > 0.0))
    throw std::invalid_argument("run_trial: fixed bandwidth required");
  const KernelSpec kernel = kernel_for_order(cfg.nu);

  const SimData train = generate(cfg.setting, cfg.n_train, cfg.seed);
  const SimData test =
      generate(cfg.setting, cfg.n_test, cfg.seed + config::kTestSeedOffset);

  const PartitionPlan plan =
      make_partition(train.sample, cfg.partition, cfg.machines,
                     cfg.seed + config::kPartitionSeedOffset);
  const Cluster cluster(train.sample, plan);
  const auto queries = test.sample.xs();

  TrialResult out;
  if (cfg.run_global) {
    PredictResult r = run_predict(Strategy::GlobalAssembled, cluster, kernel,
                                  cfg.h, queries);
    out.rmse_global = rmse(r.estimates, test.truth).value;
    out.ledger_global = std::move(r.ledger);
  }
  if (cfg.run_oneshot) {
    PredictResult r =
        run_predict(Strategy::OneShot, cluster, kernel, cfg.h, queries);
    std::int64_t undefined = 0;
    for (const auto& e : r.estimates)
      if (!e.has_value()) ++undefined;
    out.oneshot_undefined = undefined;
    // Strict policy: one Undefined machine anywhere marks the whole
    // replication NA for this estimator.
    if (undefined == 0) out.rmse_oneshot = rmse(r.estimates, test.truth).value;
    out.ledger_oneshot = std::move(r.ledger);
  }
  if (cfg.run_gpa) {
    const Grid axis =
        cfg.grid_segments > 0
            ? Grid(cfg.setting.support_lo(), cfg.setting.support_hi(),
                   cfg.grid_segments)
            : design_grid(cfg.n_train, cfg.h, SupportMode::Compact,
                          cfg.setting.support_lo(), cfg.setting.support_hi(),
                          cfg.grid_multiplier);
    out.grid_segments = axis.segments();
    TrainResult t =
        run_train(Strategy::Gpa, cluster, kernel, cfg.h, &axis, cfg.nu);
    PredictResult r = run_predict(Strategy::Gpa, cluster, kernel, cfg.h,
                                  queries, &*t.model);
    out.rmse_gpa = rmse(r.estimates, test.truth).value;
    out.ledger_gpa = std::move(t.ledger);
    out.ledger_gpa.predict = r.ledger.predict;
  }
  return out;
}

std::optional<double> mean_defined(
    const std::vector<std::optional<double>>& values) {
  long double acc = 0.0L;
  std::int64_t used = 0;
  for (const auto& v : values) {
    if (!v.has_value()) continue;
    acc += *v;
    ++used;
  }
  if (used == 0) return std::nullopt;
  return static_cast<double>(acc / static_cast<long double>(used));
}

double run_bandwidth_trial(const BandwidthTrialConfig& cfg) {
  const KernelSpec kernel = KernelSpec::epanechnikov();
  const SimData train = generate(cfg.setting, cfg.n, cfg.seed);
  const PartitionPlan plan =
      make_partition(train.sample, cfg.partition, cfg.machines,
                     cfg.seed + config::kPartitionSeedOffset);
  const Cluster cluster(train.sample, plan);

  BandwidthOptions options = cfg.options;
  options.pilot_seed = cfg.seed + config::kPilotSeedOffset;
  return run_bandwidth(cfg.method, cluster, kernel, options).h;
}

}  // namespace gpa
