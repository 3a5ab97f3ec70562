#include "gpa/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string_view>

namespace gpa {

const char* support_mode_name(SupportMode mode) {
  return mode == SupportMode::Compact ? "compact" : "diverging";
}

SupportMode support_mode_from_name(const std::string_view name) {
  if (name == "compact") return SupportMode::Compact;
  if (name == "diverging") return SupportMode::Diverging;
  throw std::invalid_argument("unknown support mode");
}

Grid::Grid(double lo, double hi, std::int64_t segments, SupportMode mode)
    : lo_(lo), hi_(hi), segments_(segments), mode_(mode) {
  if (!std::isfinite(lo_) || !std::isfinite(hi_) || !(lo_ < hi_)) {
    throw std::invalid_argument("grid: needs finite lo < hi");
  }
  if (segments_ < 1) {
    throw std::invalid_argument("grid: needs at least one segment");
  }
}

std::vector<double> Grid::points() const {
  std::vector<double> pts(static_cast<std::size_t>(point_count()));
  for (std::int64_t j = 0; j <= segments_; ++j) {
    pts[static_cast<std::size_t>(j)] = point(j);
  }
  return pts;
}

std::int64_t Grid::locate(double x) const {
  const double t = (x - lo_) / spacing();
  auto j = static_cast<std::int64_t>(std::floor(t));
  return std::clamp<std::int64_t>(j, 0, segments_ - 1);
}

Grid design_grid(std::int64_t n, double h, SupportMode mode, double lo,
                 double hi, double multiplier) {
  if (n < 3) throw std::invalid_argument("design_grid: needs n >= 3");
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("design_grid: bandwidth must be positive");
  }
  if (!(multiplier > 0.0)) {
    throw std::invalid_argument("design_grid: multiplier must be positive");
  }
  const double loglog = std::log(std::log(static_cast<double>(n)));
  if (mode == SupportMode::Compact) {
    if (!(lo < hi)) throw std::invalid_argument("design_grid: needs lo < hi");
    const auto j = static_cast<std::int64_t>(
        std::floor(multiplier * (hi - lo) * loglog / h));
    return Grid(lo, hi, std::max<std::int64_t>(2, j), SupportMode::Compact);
  }
  // Diverging support ignores the caller's lo/hi.
  const double edge = std::log(static_cast<double>(n));
  const auto j_base = std::max<std::int64_t>(
      2, static_cast<std::int64_t>(std::floor(multiplier * loglog / h)));
  const auto length = static_cast<std::int64_t>(std::floor(2.0 * edge));
  return Grid(-edge, edge, std::max<std::int64_t>(1, length) * j_base,
              SupportMode::Diverging);
}

}  // namespace gpa
