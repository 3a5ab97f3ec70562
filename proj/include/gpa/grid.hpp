#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace gpa {

// Support handling for grid construction and prediction.
//
//   Compact   — fixed [lo, hi]; out-of-range queries clamp to the boundary
//               (flagged, see PredictFlags).
//   Diverging — support grows with the sample as [-log n, log n]; the grid
//               gets floor(2 log n) * J_base segments so the spacing stays
//               O(1/J_base); out-of-range queries return 0 (flagged).
enum class SupportMode { Compact, Diverging };

const char* support_mode_name(SupportMode mode);
SupportMode support_mode_from_name(const std::string_view name);

// =============================================================================
// Uniform design grid on one axis
// =============================================================================

class Grid {
 public:
  Grid(double lo, double hi, std::int64_t segments,
       SupportMode mode = SupportMode::Compact);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::int64_t segments() const { return segments_; }  // J
  std::int64_t point_count() const { return segments_ + 1; }
  SupportMode mode() const { return mode_; }
  double spacing() const { return (hi_ - lo_) / static_cast<double>(segments_); }

  // j-th grid point; the blended form hits lo and hi exactly at the ends.
  double point(std::int64_t j) const {
    const double t = static_cast<double>(j) / static_cast<double>(segments_);
    return lo_ * (1.0 - t) + hi_ * t;
  }
  std::vector<double> points() const;

  // Index of the segment containing x, clamped to [0, J-1].
  std::int64_t locate(double x) const;

 private:
  double lo_, hi_;
  std::int64_t segments_;
  SupportMode mode_;
};

// Grid sized for a bandwidth-h fit on n observations.
//
//   Compact   J = max(2, floor(c (hi-lo) loglog(n) / h))
//   Diverging lo = -log n, hi = log n,
//             segments = floor(2 log n) * max(2, floor(c loglog(n) / h))
//
// The loglog(n) factor keeps the grid-level interpolation error negligible
// next to the estimation error while the point count stays polylogarithmic.
Grid design_grid(std::int64_t n, double h, SupportMode mode, double lo = 0.0,
                 double hi = 1.0, double multiplier = 1.0);

}  // namespace gpa
