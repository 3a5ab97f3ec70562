#pragma once

#include <span>
#include <string>
#include <vector>

namespace gpa {

namespace config {

// Moments of r < order must vanish within this tolerance...
inline constexpr double kMomentZeroTol = 1e-10;
// ...while the order-defining moment must clear this one. Values between the
// two bands mean the coefficients cannot be certified and are rejected.
inline constexpr double kMomentNonzeroTol = 1e-6;
// Normalization check: |integral K - 1|.
inline constexpr double kNormalizationTol = 1e-10;
// Panel count for the quadrature cross-check of the closed-form moments.
inline constexpr int kMomentQuadPanels = 2048;
// Highest moment scanned when certifying the order of a custom kernel.
inline constexpr int kMaxCertifiedOrder = 16;

}  // namespace config

// =============================================================================
// Symmetric polynomial kernels on [-1, 1]
// =============================================================================
//
// Every supported kernel is an even polynomial supported on [-1, 1]:
//
//   Epanechnikov    K(u) = 3/4 (1 - u^2)
//   fourth-order    K(u) = 45/32 (1 - 7u^2/3)(1 - u^2)
//   custom          K(u) = sum_k c_k u^k   (odd c_k must be zero)
//
// The kernel order q is the smallest r >= 1 with kappa_r != 0, where
// kappa_r = integral u^r K(u) du. A valid order-q kernel integrates to one
// and has kappa_1 = ... = kappa_{q-1} = 0. Construction validates all of
// this and throws std::invalid_argument otherwise.

class KernelSpec {
 public:
  static KernelSpec epanechnikov();
  static KernelSpec fourth_order();
  // coeffs[k] multiplies u^k; trailing zeros allowed, odd entries must be 0.
  static KernelSpec polynomial(std::vector<double> coeffs);
  // Inverse of id(): "epanechnikov", "fourth-order", "poly:c0,c1,...".
  static KernelSpec from_id(const std::string& id);

  // K(u); exactly 0 outside [-1, 1]. Inline: this sits in the innermost
  // window loops, where the polynomial should fold into registers.
  double eval(double u) const {
    if (u < -1.0 || u > 1.0) return 0.0;
    double acc = 0.0;
    for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * u + coeffs_[k];
    return acc;
  }
  // K_h(d) = K(d/h)/h. Requires h > 0.
  double scaled_eval(double h, double d) const;
  // Product kernel h^{-p} prod_s K(d_s/h) for a p-vector of coordinate gaps.
  double product_eval(double h, std::span<const double> d) const;

  // kappa_r = integral u^r K(u) du (closed form; the integrand is a
  // polynomial, so each term is 2/(k+r+1) or 0 by symmetry).
  double moment(int r) const;
  // nu_r = integral u^r K(u)^2 du, closed form via the squared coefficients.
  double square_moment(int r) const;
  // Simpson cross-checks of the two closed forms.
  double moment_quadrature(int r, int panels = config::kMomentQuadPanels) const;
  double square_moment_quadrature(int r,
                                  int panels = config::kMomentQuadPanels) const;

  int order() const { return order_; }
  const std::string& id() const { return id_; }
  std::span<const double> coefficients() const { return coeffs_; }

 private:
  KernelSpec(std::vector<double> coeffs, std::string id);

  std::vector<double> coeffs_;
  std::vector<double> square_coeffs_;  // coefficients of K^2
  std::string id_;
  int order_ = 0;
};

// Kernel matching an interpolation order: nu = 1 pairs with the
// second-order Epanechnikov kernel; nu in {2, 3} needs vanishing kappa_2, and
// since no symmetric third-order kernel exists both map to the fourth-order
// kernel. Higher orders must be supplied explicitly by the caller.
KernelSpec kernel_for_order(int nu);

}  // namespace gpa
