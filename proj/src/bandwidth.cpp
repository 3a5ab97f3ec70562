#include "gpa/bandwidth.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "gpa/moments.hpp"

namespace gpa {

// =============================================================================
// Candidate grids and rate exponents
// =============================================================================

std::vector<double> CandidateSet::values() const {
  if (!(n_ref > 1.0) || !std::isfinite(n_ref))
    throw std::invalid_argument("CandidateSet: reference size must exceed 1");
  if (!(span > 1.0) || !std::isfinite(span))
    throw std::invalid_argument("CandidateSet: span must exceed 1");
  if (count < 2) throw std::invalid_argument("CandidateSet: need >= 2 candidates");
  if (!(exponent > 0.0) || !(exponent < 1.0))
    throw std::invalid_argument("CandidateSet: exponent must lie in (0,1)");

  const double center = std::pow(n_ref, -exponent);
  const double log_lo = std::log(center / span);
  const double log_hi = std::log(center * span);
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(count - 1);
    out[static_cast<std::size_t>(k)] =
        std::exp(log_lo * (1.0 - t) + log_hi * t);
  }
  out.front() = center / span;  // pin endpoints against exp/log round-off
  out.back() = center * span;
  return out;
}

double rate_exponent_for_order(int nu) {
  if (nu < 1) throw std::invalid_argument("rate exponent: order must be >= 1");
  return 1.0 / (2.0 * nu + 3.0);
}

double rate_exponent_for_dim(int p) {
  if (p < 1) throw std::invalid_argument("rate exponent: dimension must be >= 1");
  return 1.0 / (p + 4.0);
}

// =============================================================================
// Trimmed weight
// =============================================================================

void WeightFn::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi)
    throw std::invalid_argument("WeightFn: need finite lo <= hi");
  if (!(trim >= 0.0) || !(trim < 0.5))
    throw std::invalid_argument("WeightFn: trim must lie in [0, 0.5)");
}

WeightFn WeightFn::from_sample(const Sample& sample, double trim) {
  if (sample.dim() != 1)
    throw std::invalid_argument("WeightFn: univariate samples only");
  WeightFn w{sample.min_x(), sample.max_x(), trim};
  w.validate();
  return w;
}

// =============================================================================
// Leave-one-out cross-validation
// =============================================================================

CvScore cv_score(const Sample& sample, double h, const KernelSpec& kernel,
                 const WeightFn& weight) {
  if (sample.dim() != 1)
    throw std::invalid_argument("cv_score: univariate samples only");
  if (!(h > 0.0) || !std::isfinite(h))
    throw std::invalid_argument("cv_score: bandwidth must be positive");
  const std::int64_t n = sample.size();
  if (n < 2) throw std::invalid_argument("cv_score: need >= 2 observations");
  weight.validate();

  // Full-sample moments at every design point, windowed pass.
  const MomentStats stats = local_moments(sample, sample.xs(), kernel, h);

  const double k0 = kernel.eval(0.0) / h;  // self contribution to sum_w
  const std::int64_t n_loo = n - 1;

  CvScore out;
  long double acc = 0.0L;
  for (std::int64_t i = 0; i < n; ++i) {
    const double xi = sample.x(i);
    const double yi = sample.y(i);
    out.kernel_evals += stats.in_window[static_cast<std::size_t>(i)];
    if (!weight.contains(xi)) {
      ++out.n_trimmed;
      continue;
    }
    const double sw = stats.sum_w[static_cast<std::size_t>(i)] - k0;
    const double swy = stats.sum_wy[static_cast<std::size_t>(i)] - k0 * yi;
    const double normalized =
        std::abs(sw) * stats.scale / static_cast<double>(n_loo);
    if (normalized <= config::kDenominatorEps) {
      ++out.n_undefined;  // isolated point: no leave-one-out estimate
      continue;
    }
    const double resid = yi - swy / sw;
    acc += static_cast<long double>(resid) * resid;
    ++out.n_used;
  }
  out.value = static_cast<double>(acc / static_cast<long double>(n));
  return out;
}

CvSelection minimize_cv(const Sample& sample, const CandidateSet& candidates,
                        const KernelSpec& kernel, const WeightFn& weight) {
  const std::vector<double> hs = candidates.values();

  CvSelection sel;
  sel.table.reserve(hs.size());
  bool found = false;
  for (double h : hs) {
    CvScore score = cv_score(sample, h, kernel, weight);
    sel.table.emplace_back(h, score);
    if (score.degenerate()) continue;  // no usable residuals at this h
    if (!found || score.value < sel.score.value) {
      sel.h = h;
      sel.score = score;
      found = true;
    }
  }
  if (!found)
    throw std::runtime_error(
        "minimize_cv: every candidate bandwidth left the criterion undefined");
  return sel;
}

// =============================================================================
// Distributed selectors
// =============================================================================

double oneshot_bandwidth(std::span<const double> local_selections,
                         double exponent) {
  if (local_selections.empty())
    throw std::invalid_argument("oneshot_bandwidth: no machine selections");
  if (!(exponent > 0.0) || !(exponent < 1.0))
    throw std::invalid_argument("oneshot_bandwidth: exponent must lie in (0,1)");
  long double acc = 0.0L;
  for (double h : local_selections) {
    if (!(h > 0.0) || !std::isfinite(h))
      throw std::invalid_argument("oneshot_bandwidth: selections must be positive");
    acc += h;
  }
  const double mean =
      static_cast<double>(acc / static_cast<long double>(local_selections.size()));
  // Each machine selected at scale n_m^-e; shrink by M^-e to reach N^-e.
  return std::pow(static_cast<double>(local_selections.size()), -exponent) * mean;
}

PilotSelection pilot_bandwidth(const Sample& pilot, std::int64_t full_n,
                               const KernelSpec& kernel, const WeightFn& weight,
                               int count, double span, double exponent) {
  const std::int64_t n0 = pilot.size();
  if (full_n < n0)
    throw std::invalid_argument("pilot_bandwidth: full sample smaller than pilot");

  CandidateSet cands;
  cands.n_ref = static_cast<double>(n0);
  cands.span = span;
  cands.count = count;
  cands.exponent = exponent;

  PilotSelection out;
  out.selection = minimize_cv(pilot, cands, kernel, weight);
  out.pilot_h = out.selection.h;
  out.h = out.pilot_h *
          std::pow(static_cast<double>(full_n) / static_cast<double>(n0),
                   -exponent);
  return out;
}

double amise_optimal(double b_bar, double v_bar, std::int64_t n) {
  if (!(b_bar > 0.0) || !std::isfinite(b_bar))
    throw std::invalid_argument("amise_optimal: squared-bias constant must be positive");
  if (!(v_bar > 0.0) || !std::isfinite(v_bar))
    throw std::invalid_argument("amise_optimal: variance constant must be positive");
  if (n < 1) throw std::invalid_argument("amise_optimal: need n >= 1");
  return std::pow(v_bar / (4.0 * b_bar), 0.2) *
         std::pow(static_cast<double>(n), -0.2);
}

}  // namespace gpa
