#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gpa/kernels.hpp"
#include "gpa/sample.hpp"

namespace gpa {

namespace config {

// Candidate bandwidth interval [span^-1 n^-e, span n^-e]. The span must
// bracket the unknown optimal constant with room for the CV argmin to move
// both ways; 8 covers every mean/design pair exercised here.
inline constexpr double kCandidateSpan = 8.0;
inline constexpr int kCandidateCount = 25;
// Fraction of the support range trimmed off each end by the default weight.
inline constexpr double kDefaultTrim = 0.05;
// n^-1/5: the second-order local-constant rate.
inline constexpr double kDefaultRateExponent = 0.2;

}  // namespace config

// =============================================================================
// Bandwidth selection
// =============================================================================

// Log-spaced candidate bandwidths n_ref^-exponent * [1/span, span].
struct CandidateSet {
  double n_ref = 0.0;
  double span = config::kCandidateSpan;
  int count = config::kCandidateCount;
  double exponent = config::kDefaultRateExponent;

  std::vector<double> values() const;  // ascending, endpoints included
};

// Convergence-rate exponents: order-nu fits smooth at n^-1/(2nu+3); p-variate
// second-order fits at n^-1/(p+4).
double rate_exponent_for_order(int nu);
double rate_exponent_for_dim(int p);

// Boundary-trimmed indicator weight: 1 on [lo + trim r, hi - trim r] with
// r = hi - lo, else 0.
struct WeightFn {
  double lo = 0.0;
  double hi = 1.0;
  double trim = config::kDefaultTrim;

  double trim_lo() const { return lo + trim * (hi - lo); }
  double trim_hi() const { return hi - trim * (hi - lo); }
  bool contains(double x) const { return x >= trim_lo() && x <= trim_hi(); }
  void validate() const;  // lo <= hi, 0 <= trim < 0.5

  static WeightFn from_sample(const Sample& sample,
                              double trim = config::kDefaultTrim);
};

// Leave-one-out cross-validation score
//
//   CV(h) = n^-1 sum_i w(X_i) (Y_i - mu_loo(X_i))^2
//
// computed by subtracting each observation's own contribution K(0)/h and
// K(0)Y_i/h from the full-sample moment sums, so the cost is one windowed
// pass instead of n refits. Observations whose leave-one-out denominator is
// degenerate contribute 0 and are counted in n_undefined.
struct CvScore {
  double value = 0.0;
  std::int64_t n_used = 0;       // trim-passing with a defined estimate
  std::int64_t n_undefined = 0;  // trim-passing, Undefined leave-one-out
  std::int64_t n_trimmed = 0;    // weight zero
  std::int64_t kernel_evals = 0;

  bool degenerate() const { return n_used == 0; }
};

CvScore cv_score(const Sample& sample, double h, const KernelSpec& kernel,
                 const WeightFn& weight);

// Smallest-score candidate; exact ties and all-degenerate grids resolve
// toward the smaller bandwidth / a runtime error respectively.
struct CvSelection {
  double h = 0.0;
  CvScore score;
  std::vector<std::pair<double, CvScore>> table;
};
CvSelection minimize_cv(const Sample& sample, const CandidateSet& candidates,
                        const KernelSpec& kernel, const WeightFn& weight);

// Machine-local selections h_m (each at scale n^-e) combined into the
// full-sample scale: M^-e * mean(h_m).
double oneshot_bandwidth(std::span<const double> local_selections,
                         double exponent = config::kDefaultRateExponent);

// CV on a pooled pilot of size n0, then rescaled by (n/n0)^-e.
struct PilotSelection {
  double h = 0.0;        // rescaled to the full sample
  double pilot_h = 0.0;  // as selected at pilot scale
  CvSelection selection;
};
PilotSelection pilot_bandwidth(const Sample& pilot, std::int64_t full_n,
                               const KernelSpec& kernel, const WeightFn& weight,
                               int count = config::kCandidateCount,
                               double span = config::kCandidateSpan,
                               double exponent = config::kDefaultRateExponent);

// h_opt = (Vbar / (4 Bbar))^{1/5} n^{-1/5} from the integrated squared-bias
// and variance constants.
double amise_optimal(double b_bar, double v_bar, std::int64_t n);

}  // namespace gpa
