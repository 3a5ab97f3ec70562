#include "gpa/sample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gpa {

Sample::Sample(std::vector<double> x, std::vector<double> y)
    : Sample(std::move(x), std::move(y), 1) {}

Sample::Sample(std::vector<double> x_rowmajor, std::vector<double> y, int dim)
    : x_(std::move(x_rowmajor)), y_(std::move(y)), dim_(dim) {
  if (dim_ < 1) throw std::invalid_argument("sample: dimension must be >= 1");
  if (y_.empty()) throw std::invalid_argument("sample: empty");
  if (x_.size() != y_.size() * static_cast<std::size_t>(dim_)) {
    throw std::invalid_argument("sample: covariate/response size mismatch");
  }
  for (double v : x_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("sample: non-finite covariate");
    }
  }
  for (double v : y_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("sample: non-finite response");
    }
  }
  sorted_ = dim_ == 1 && std::is_sorted(x_.begin(), x_.end());
}

double Sample::min_x(int axis) const {
  double m = x(0, axis);
  for (std::int64_t i = 1; i < size(); ++i) m = std::min(m, x(i, axis));
  return m;
}

double Sample::max_x(int axis) const {
  double m = x(0, axis);
  for (std::int64_t i = 1; i < size(); ++i) m = std::max(m, x(i, axis));
  return m;
}

Sample Sample::subset(std::span<const std::int64_t> idx) const {
  if (idx.empty()) throw std::invalid_argument("sample: empty subset");
  std::vector<double> xs(idx.size() * static_cast<std::size_t>(dim_));
  std::vector<double> ys(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const std::int64_t i = idx[k];
    if (i < 0 || i >= size()) {
      throw std::invalid_argument("sample: subset index out of range");
    }
    for (int s = 0; s < dim_; ++s) {
      xs[k * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(s)] =
          x(i, s);
    }
    ys[k] = y(i);
  }
  return Sample(std::move(xs), std::move(ys), dim_);
}

Sample Sample::sorted_copy() const {
  if (dim_ != 1) {
    throw std::invalid_argument("sample: sorted_copy is univariate only");
  }
  std::vector<std::int64_t> idx(static_cast<std::size_t>(size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::int64_t a, std::int64_t b) {
    return x_[static_cast<std::size_t>(a)] < x_[static_cast<std::size_t>(b)];
  });
  return subset(idx);
}

}  // namespace gpa
