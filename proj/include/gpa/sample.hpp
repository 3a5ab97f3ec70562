#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gpa {

// =============================================================================
// Immutable regression sample
// =============================================================================
//
// Covariates are stored row-major (observation i occupies x[i*p .. i*p+p)),
// responses in y. Construction validates finiteness and shape. Univariate
// samples detect ascending order once so downstream window scans can use the
// binary-search fast path.

class Sample {
 public:
  // Univariate convenience constructor.
  Sample(std::vector<double> x, std::vector<double> y);
  Sample(std::vector<double> x_rowmajor, std::vector<double> y, int dim);

  int dim() const { return dim_; }
  std::int64_t size() const { return static_cast<std::int64_t>(y_.size()); }
  bool sorted() const { return sorted_; }

  double x(std::int64_t i) const { return x_[static_cast<std::size_t>(i)]; }
  double x(std::int64_t i, int s) const {
    return x_[static_cast<std::size_t>(i) * static_cast<std::size_t>(dim_) +
              static_cast<std::size_t>(s)];
  }
  double y(std::int64_t i) const { return y_[static_cast<std::size_t>(i)]; }
  std::span<const double> xs() const { return x_; }
  std::span<const double> ys() const { return y_; }

  double min_x(int axis = 0) const;
  double max_x(int axis = 0) const;

  // Row subset in the given index order.
  Sample subset(std::span<const std::int64_t> idx) const;
  // Univariate copy sorted ascending by x (stable in y via index sort).
  Sample sorted_copy() const;

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  int dim_ = 1;
  bool sorted_ = false;
};

}  // namespace gpa
