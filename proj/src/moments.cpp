#include "gpa/moments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gpa {

namespace {

void check_bandwidth(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("moments: bandwidth must be positive");
  }
}

// Accumulate one univariate observation range [first, last).
inline void accumulate_range(const Sample& s, std::int64_t first,
                             std::int64_t last, double q,
                             const KernelSpec& kernel, double h,
                             long double* sw, long double* swy,
                             std::int64_t* count) {
  const double inv_h = 1.0 / h;
  for (std::int64_t i = first; i < last; ++i) {
    const double u = (s.x(i) - q) * inv_h;
    if (u < -1.0 || u > 1.0) continue;
    const double w = kernel.eval(u) * inv_h;
    *sw += w;
    *swy += w * s.y(i);
    ++*count;
  }
}

}  // namespace

MomentStats local_moments(const Sample& sample, std::span<const double> points,
                          const KernelSpec& kernel, double h) {
  check_bandwidth(h);
  const int p = sample.dim();
  if (points.empty() || points.size() % static_cast<std::size_t>(p) != 0) {
    throw std::invalid_argument(
        "moments: query layout does not match sample dimension");
  }
  const std::size_t n_points = points.size() / static_cast<std::size_t>(p);

  MomentStats stats;
  stats.sum_w.resize(n_points);
  stats.sum_wy.resize(n_points);
  stats.in_window.resize(n_points);
  stats.n_samples = sample.size();
  stats.scale = std::pow(h, static_cast<double>(p));

  for (std::size_t j = 0; j < n_points; ++j) {
    double sw = 0.0, swy = 0.0;
    stats.in_window[j] = local_moments_at(
        sample, points.subspan(j * static_cast<std::size_t>(p),
                               static_cast<std::size_t>(p)),
        kernel, h, &sw, &swy);
    stats.sum_w[j] = sw;
    stats.sum_wy[j] = swy;
  }
  return stats;
}

std::int64_t local_moments_at(const Sample& sample,
                              std::span<const double> point,
                              const KernelSpec& kernel, double h,
                              double* sum_w, double* sum_wy) {
  check_bandwidth(h);
  const int p = sample.dim();
  if (point.size() != static_cast<std::size_t>(p)) {
    throw std::invalid_argument(
        "moments: query layout does not match sample dimension");
  }

  long double sw = 0.0L, swy = 0.0L;
  std::int64_t count = 0;

  if (p == 1) {
    const double q = point[0];
    const double inv_h1 = 1.0 / h;
    std::int64_t first = 0, last = sample.size();
    if (sample.sorted()) {
      // Window [q-h, q+h] is closed on both ends, matching the |u| <= 1
      // support test of the generic scan.
      const auto xs = sample.xs();
      first = std::lower_bound(xs.begin(), xs.end(), q - h) - xs.begin();
      last = std::upper_bound(xs.begin(), xs.end(), q + h) - xs.begin();
      // The accepted set is decided by the rounded (x-q)/h, which can
      // disagree with the searched bounds by an ulp at the edges; widen until
      // the support test itself fails so both paths see identical terms.
      auto inside = [&](std::int64_t i) {
        const double u = (sample.x(i) - q) * inv_h1;
        return u >= -1.0 && u <= 1.0;
      };
      while (first > 0 && inside(first - 1)) --first;
      while (last < sample.size() && inside(last)) ++last;
    }
    accumulate_range(sample, first, last, q, kernel, h, &sw, &swy, &count);
  } else {
    const double inv_h = 1.0 / h;
    const double hp = std::pow(h, static_cast<double>(p));
    for (std::int64_t i = 0; i < sample.size(); ++i) {
      double w = 1.0;
      bool inside = true;
      for (int s = 0; s < p; ++s) {
        const double u = (sample.x(i, s) - point[static_cast<std::size_t>(s)]) *
                         inv_h;
        if (u < -1.0 || u > 1.0) {
          inside = false;
          break;
        }
        w *= kernel.eval(u);
      }
      if (!inside) continue;
      w /= hp;
      sw += w;
      swy += w * sample.y(i);
      ++count;
    }
  }

  *sum_w = static_cast<double>(sw);
  *sum_wy = static_cast<double>(swy);
  return count;
}

void merge_into(MomentStats& acc, const MomentStats& other) {
  if (acc.size() != other.size() || acc.scale != other.scale) {
    throw std::invalid_argument("moments: merge layout mismatch");
  }
  for (std::size_t j = 0; j < acc.size(); ++j) {
    acc.sum_w[j] += other.sum_w[j];
    acc.sum_wy[j] += other.sum_wy[j];
    acc.in_window[j] += other.in_window[j];
  }
  acc.n_samples += other.n_samples;
}

MomentStats merge(MomentStats a, const MomentStats& b) {
  merge_into(a, b);
  return a;
}

Estimate nw_from_stats(const MomentStats& stats, std::size_t at) {
  if (at >= stats.size()) {
    throw std::invalid_argument("moments: stats index out of range");
  }
  if (stats.n_samples <= 0 || stats.scale <= 0.0) {
    throw std::invalid_argument("moments: stats lack sample context");
  }
  const double sw = stats.sum_w[at];
  const double normalized =
      std::fabs(sw) * stats.scale / static_cast<double>(stats.n_samples);
  if (normalized <= config::kDenominatorEps) return std::nullopt;
  return stats.sum_wy[at] / sw;
}

Estimate nw_estimate(const Sample& sample, std::span<const double> point,
                     const KernelSpec& kernel, double h) {
  double sw = 0.0, swy = 0.0;
  local_moments_at(sample, point, kernel, h, &sw, &swy);
  const double hp = std::pow(h, static_cast<double>(sample.dim()));
  const double normalized =
      std::fabs(sw) * hp / static_cast<double>(sample.size());
  if (normalized <= config::kDenominatorEps) return std::nullopt;
  return swy / sw;
}

Estimate nw_estimate(const Sample& sample, double x, const KernelSpec& kernel,
                     double h) {
  return nw_estimate(sample, std::span<const double>(&x, 1), kernel, h);
}

Estimate oneshot_combine(std::span<const Estimate> locals) {
  if (locals.empty()) {
    throw std::invalid_argument("oneshot_combine: no machine estimates");
  }
  long double acc = 0.0L;
  for (const Estimate& e : locals) {
    if (!e.has_value()) return std::nullopt;
    acc += *e;
  }
  return static_cast<double>(acc / static_cast<long double>(locals.size()));
}

}  // namespace gpa
