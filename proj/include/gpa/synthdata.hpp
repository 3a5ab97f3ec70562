#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gpa/bandwidth.hpp"
#include "gpa/estimate.hpp"
#include "gpa/kernels.hpp"
#include "gpa/sample.hpp"

namespace gpa {

namespace config {

// Central finite differences for user-supplied mean/density functions:
// primary step, the finer cross-check step, and how closely the two must
// agree (relative) before the derivative is trusted.
inline constexpr double kFdStep = 1e-5;
inline constexpr double kFdCheckStep = 1e-6;
inline constexpr double kFdRelTol = 1e-4;
// Simpson panels for the integrated bias/variance constants.
inline constexpr std::int64_t kAmiseQuadPanels = 1 << 14;

}  // namespace config

// =============================================================================
// Benchmark regression settings
// =============================================================================

// Built-in mean curves on [0,1] (u = x - 1/2 throughout):
//   Mu1: 4u + 2 exp(-128 u^2)            -- linear trend with a sharp bump
//   Mu2: sin(8u) + 2 exp(-128 u^2)       -- wave with the same bump
//   Mu3: 24 sqrt(x(1-x)) sin(2.1 pi / (x + 0.05))  -- boundary-chirp
enum class MeanFn { Mu1, Mu2, Mu3, Custom };

enum class CovariateLaw { Uniform01, Beta23, CustomDensity };

std::string_view mean_fn_name(MeanFn fn);
std::string_view covariate_law_name(CovariateLaw law);

struct SimSetting {
  MeanFn mean_fn = MeanFn::Mu1;
  CovariateLaw law = CovariateLaw::Uniform01;
  double sigma = 1.0;  // noise standard deviation
  std::string label = "1";

  // Only consulted for the Custom variants; evaluation falls back to
  // finite differences (cross-checked at two steps) for derivatives.
  std::function<double(double)> custom_mu;
  std::function<double(double)> custom_density;

  double mu(double x) const;
  double mu_d1(double x) const;
  double mu_d2(double x) const;
  double density(double x) const;     // f(x) on [0,1]
  double density_d1(double x) const;  // f'(x)
  double support_lo() const { return 0.0; }
  double support_hi() const { return 1.0; }

  void validate() const;

  // The four numbered settings: {Mu1, Mu2} x {Uniform01, Beta23}.
  static SimSetting numbered(int id);
  static SimSetting mu3_uniform();
  static SimSetting from_name(const std::string& name);  // "1".."4" | "mu3"
};

// =============================================================================
// Data generation
// =============================================================================

// A generated sample together with the noiseless curve values mu(X_i), so
// error metrics never have to re-evaluate the mean function.
struct SimData {
  Sample sample;
  std::vector<double> truth;
};

// X_i i.i.d. from the covariate law, Y_i = mu(X_i) + sigma Z_i with standard
// normal Z. All X are drawn before any Z, so the design is unchanged when
// only sigma varies. Bitwise reproducible for a fixed seed and build.
SimData generate(const SimSetting& setting, std::int64_t n, std::uint64_t seed);

// =============================================================================
// Asymptotic oracles
// =============================================================================

// Pointwise leading-order bias and variance factors of the local-constant
// fit with kernel K and density f:
//
//   B(x) = (kappa_2 / 2) { mu''(x) + 2 mu'(x) f'(x) / f(x) }
//   V(x) = nu_0 sigma^2 / f(x)
//
// Evaluation throws where the density vanishes.
struct BiasVarianceFns {
  std::function<double(double)> bias;
  std::function<double(double)> variance;
};
BiasVarianceFns bias_variance_fns(const SimSetting& setting,
                                  const KernelSpec& kernel);

// Weighted integrals Bbar = int B^2 w f, Vbar = int V w f over the trimmed
// support, by composite Simpson quadrature.
struct AmiseConstants {
  double b_bar = 0.0;
  double v_bar = 0.0;
};
AmiseConstants amise_constants(const SimSetting& setting,
                               const KernelSpec& kernel,
                               const WeightFn& weight);

// (Vbar / 4 Bbar)^{1/5} n^{-1/5}: the reference bandwidth the error metrics
// and grid designs are anchored to.
double amise_reference_bandwidth(const SimSetting& setting,
                                 const KernelSpec& kernel,
                                 const WeightFn& weight, std::int64_t n);

// =============================================================================
// Error metrics
// =============================================================================

// Undefined estimates are excluded from the mean and reported; a batch with
// nothing left after exclusion is an error, not a zero.
struct MetricResult {
  double value = 0.0;
  std::int64_t n_used = 0;
  std::int64_t n_undefined = 0;
};

// sqrt(mean (estimate - reference)^2); rmse compares against the noiseless
// truth, rmpe against held-out observations.
MetricResult rmse(std::span<const Estimate> estimates,
                  std::span<const double> truth);
MetricResult rmpe(std::span<const Estimate> estimates,
                  std::span<const double> observed);

// mean |h_hat - h_ref| / h_ref over a batch of selected bandwidths.
double mrae(std::span<const double> selected, double h_ref);

}  // namespace gpa
