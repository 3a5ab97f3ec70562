#include "gpa/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gpa/quadrature.hpp"

namespace gpa {

namespace {

// integral_{-1}^{1} u^{k+r} du = 2/(k+r+1) for even k+r, 0 otherwise.
double poly_moment(std::span<const double> coeffs, int r) {
  long double acc = 0.0L;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if ((static_cast<int>(k) + r) % 2 == 0) {
      acc += static_cast<long double>(coeffs[k]) * 2.0L /
             static_cast<long double>(k + static_cast<std::size_t>(r) + 1);
    }
  }
  return static_cast<double>(acc);
}

std::vector<double> square_polynomial(const std::vector<double>& c) {
  std::vector<double> sq(2 * c.size() - 1, 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j < c.size(); ++j) {
      sq[i + j] += c[i] * c[j];
    }
  }
  return sq;
}

std::string format_poly_id(const std::vector<double>& coeffs) {
  std::string id = "poly:";
  char buf[40];
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", coeffs[k]);
    if (k > 0) id += ',';
    id += buf;
  }
  return id;
}

}  // namespace

KernelSpec::KernelSpec(std::vector<double> coeffs, std::string id)
    : coeffs_(std::move(coeffs)), id_(std::move(id)) {
  if (coeffs_.empty()) {
    throw std::invalid_argument("kernel: empty coefficient list");
  }
  bool any_nonzero = false;
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    if (!std::isfinite(coeffs_[k])) {
      throw std::invalid_argument("kernel: non-finite coefficient");
    }
    if (k % 2 == 1 && coeffs_[k] != 0.0) {
      throw std::invalid_argument(
          "kernel: odd-power coefficient breaks symmetry");
    }
    any_nonzero = any_nonzero || coeffs_[k] != 0.0;
  }
  if (!any_nonzero) {
    throw std::invalid_argument("kernel: identically zero");
  }
  square_coeffs_ = square_polynomial(coeffs_);

  if (std::fabs(poly_moment(coeffs_, 0) - 1.0) > config::kNormalizationTol) {
    throw std::invalid_argument("kernel: does not integrate to 1");
  }
  // Certify the order: scan even moments (odd ones vanish by symmetry).
  for (int r = 2; r <= config::kMaxCertifiedOrder; r += 2) {
    const double kr = std::fabs(poly_moment(coeffs_, r));
    if (kr > config::kMomentNonzeroTol) {
      order_ = r;
      break;
    }
    if (kr > config::kMomentZeroTol) {
      throw std::invalid_argument(
          "kernel: moment falls between the zero and nonzero tolerance bands; "
          "order cannot be certified");
    }
  }
  if (order_ == 0) {
    throw std::invalid_argument("kernel: no nonzero moment up to order 16");
  }
}

KernelSpec KernelSpec::epanechnikov() {
  // K(u) = 3/4 (1 - u^2), kappa_2 = 1/5, nu_0 = 3/5.
  return KernelSpec({0.75, 0.0, -0.75}, "epanechnikov");
}

KernelSpec KernelSpec::fourth_order() {
  // K(u) = 45/32 (1 - 7u^2/3)(1 - u^2) = 45/32 - 75/16 u^2 + 105/32 u^4.
  // kappa_2 = 0 exactly; kappa_4 = -1/21.
  return KernelSpec({1.40625, 0.0, -4.6875, 0.0, 3.28125}, "fourth-order");
}

KernelSpec KernelSpec::polynomial(std::vector<double> coeffs) {
  std::string id = format_poly_id(coeffs);
  return KernelSpec(std::move(coeffs), std::move(id));
}

KernelSpec KernelSpec::from_id(const std::string& id) {
  if (id == "epanechnikov") return epanechnikov();
  if (id == "fourth-order") return fourth_order();
  if (id.rfind("poly:", 0) == 0) {
    std::vector<double> coeffs;
    std::size_t pos = 5;
    while (pos < id.size()) {
      std::size_t next = id.find(',', pos);
      if (next == std::string::npos) next = id.size();
      try {
        coeffs.push_back(std::stod(id.substr(pos, next - pos)));
      } catch (const std::exception&) {
        throw std::invalid_argument("kernel id: bad coefficient in '" + id +
                                    "'");
      }
      pos = next + 1;
    }
    return polynomial(std::move(coeffs));
  }
  throw std::invalid_argument("unknown kernel id '" + id + "'");
}

double KernelSpec::scaled_eval(double h, double d) const {
  if (!(h > 0.0)) {
    throw std::invalid_argument("kernel: bandwidth must be positive");
  }
  return eval(d / h) / h;
}

double KernelSpec::product_eval(double h, std::span<const double> d) const {
  if (!(h > 0.0)) {
    throw std::invalid_argument("kernel: bandwidth must be positive");
  }
  if (d.empty()) {
    throw std::invalid_argument("kernel: empty coordinate gap vector");
  }
  double w = 1.0;
  for (double ds : d) {
    const double k = eval(ds / h);
    if (k == 0.0) return 0.0;
    w *= k;
  }
  return w / std::pow(h, static_cast<double>(d.size()));
}

double KernelSpec::moment(int r) const {
  if (r < 0) throw std::invalid_argument("kernel: negative moment order");
  return poly_moment(coeffs_, r);
}

double KernelSpec::square_moment(int r) const {
  if (r < 0) throw std::invalid_argument("kernel: negative moment order");
  return poly_moment(square_coeffs_, r);
}

double KernelSpec::moment_quadrature(int r, int panels) const {
  if (r < 0) throw std::invalid_argument("kernel: negative moment order");
  return simpson(
      [&](double u) { return std::pow(u, static_cast<double>(r)) * eval(u); },
      -1.0, 1.0, panels);
}

double KernelSpec::square_moment_quadrature(int r, int panels) const {
  if (r < 0) throw std::invalid_argument("kernel: negative moment order");
  return simpson(
      [&](double u) {
        const double k = eval(u);
        return std::pow(u, static_cast<double>(r)) * k * k;
      },
      -1.0, 1.0, panels);
}

KernelSpec kernel_for_order(int nu) {
  if (nu == 1) return KernelSpec::epanechnikov();
  if (nu == 2 || nu == 3) return KernelSpec::fourth_order();
  throw std::invalid_argument(
      "kernel_for_order: supply a custom kernel for orders above 3");
}

}  // namespace gpa
