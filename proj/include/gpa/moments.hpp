#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gpa/estimate.hpp"
#include "gpa/kernels.hpp"
#include "gpa/sample.hpp"

namespace gpa {

namespace config {

// An estimator denominator counts as zero when |sum_w| h^p / n falls at or
// below this threshold; the normalized quantity is O(1) regardless of n and
// h, so the cutoff is scale-free.
inline constexpr double kDenominatorEps = 1e-12;

}  // namespace config

// =============================================================================
// Local-constant moment sums
// =============================================================================
//
// For query point x the local-constant (ratio) estimator needs only the two
// sums
//
//   sum_w  = sum_i K_h(X_i - x)          K_h(u) = K(u/h)/h
//   sum_wy = sum_i K_h(X_i - x) Y_i
//
// Both are additive over any partition of the sample, so machine-local
// MomentStats merge into exactly the statistics a single machine would have
// computed on the pooled data. n_samples and the h^p scale ride along so a
// merged block still knows its Undefined threshold.

struct MomentStats {
  std::vector<double> sum_w;
  std::vector<double> sum_wy;
  std::vector<std::int64_t> in_window;  // observations with |X_i - x| <= h
  std::int64_t n_samples = 0;           // observations scanned
  double scale = 0.0;                   // h^p of the producing pass

  std::size_t size() const { return sum_w.size(); }
};

// Moment sums for every query point. `points` holds the query coordinates
// row-major (size = #points * sample.dim()). Univariate sorted samples use a
// binary-search window; out-of-window terms are exact zeros, so the fast
// path reproduces the generic path bitwise.
MomentStats local_moments(const Sample& sample, std::span<const double> points,
                          const KernelSpec& kernel, double h);

// Single-query accumulation without the container overhead; returns the
// number of in-window observations.
std::int64_t local_moments_at(const Sample& sample,
                              std::span<const double> point,
                              const KernelSpec& kernel, double h,
                              double* sum_w, double* sum_wy);

// Field-wise addition. Blocks must share the query layout and scale.
void merge_into(MomentStats& acc, const MomentStats& other);
MomentStats merge(MomentStats a, const MomentStats& b);

// Ratio estimate at entry `at`; Undefined when the normalized denominator
// |sum_w| scale / n_samples is at or below kDenominatorEps.
Estimate nw_from_stats(const MomentStats& stats, std::size_t at);

// One-pass convenience: local moments at a single point, then the ratio.
Estimate nw_estimate(const Sample& sample, std::span<const double> point,
                     const KernelSpec& kernel, double h);
Estimate nw_estimate(const Sample& sample, double x, const KernelSpec& kernel,
                     double h);

// Equal-weight combination of machine-local estimates. Undefined if any
// machine's estimate is Undefined (strict propagation).
Estimate oneshot_combine(std::span<const Estimate> locals);

}  // namespace gpa
