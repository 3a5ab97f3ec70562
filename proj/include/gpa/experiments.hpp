#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gpa/cluster.hpp"
#include "gpa/synthdata.hpp"

namespace gpa {

namespace config {

// Seed-stream separation inside one replication: the training draw uses the
// replication seed itself; derived streams add these odd constants so they
// never collide across the B consecutive seeds of a run.
inline constexpr std::uint64_t kTestSeedOffset = 0x9e3779b97f4a7c15ULL;
inline constexpr std::uint64_t kPartitionSeedOffset = 0xbf58476d1ce4e5b9ULL;
inline constexpr std::uint64_t kPilotSeedOffset = 0x94d049bb133111ebULL;

}  // namespace config

// =============================================================================
// One replication of the estimator comparison
// =============================================================================
//
// Draw a training sample and an independent test sample from the setting,
// partition, then score the requested strategies against the noiseless
// truth at the test points. The one-shot column follows the strict policy:
// a replication with any Undefined one-shot prediction scores NA.

struct TrialConfig {
  SimSetting setting;
  std::int64_t n_train = 10000;
  std::int64_t n_test = 5000;
  int machines = 50;
  PartitionStrategy partition = PartitionStrategy::Random;
  double h = 0.0;                  // fixed bandwidth, required
  double grid_multiplier = 1.0;    // c in the grid-count formula
  std::int64_t grid_segments = 0;  // 0: use the design formula
  int nu = 1;
  std::uint64_t seed = 1;
  bool run_global = true;
  bool run_oneshot = true;
  bool run_gpa = true;
};

struct TrialResult {
  std::optional<double> rmse_global;
  std::optional<double> rmse_oneshot;  // NA when any prediction was Undefined
  std::optional<double> rmse_gpa;
  std::int64_t oneshot_undefined = 0;
  std::int64_t grid_segments = 0;
  CostLedger ledger_global;
  CostLedger ledger_oneshot;
  CostLedger ledger_gpa;
};

TrialResult run_trial(const TrialConfig& cfg);

// Mean over the engaged entries; nullopt when all are NA.
std::optional<double> mean_defined(
    const std::vector<std::optional<double>>& values);

// =============================================================================
// One replication of the bandwidth-selector comparison
// =============================================================================

struct BandwidthTrialConfig {
  SimSetting setting;
  std::int64_t n = 10000;
  int machines = 50;
  PartitionStrategy partition = PartitionStrategy::Random;
  BandwidthMethod method = BandwidthMethod::OneShotCV;
  BandwidthOptions options;
  std::uint64_t seed = 1;
};

// The selected full-sample bandwidth for this replication.
double run_bandwidth_trial(const BandwidthTrialConfig& cfg);

}  // namespace gpa
