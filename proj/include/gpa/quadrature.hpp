#pragma once

#include <cstdint>
#include <stdexcept>

namespace gpa {

// Composite Simpson rule with a fixed even panel count.
// Error is O((b-a) dx^4 f''''), plenty below 1e-10 for the smooth integrands
// used here (polynomial kernels, squared-bias densities).
template <typename F>
double simpson(F&& f, double a, double b, std::int64_t panels) {
  if (panels < 2 || panels % 2 != 0) {
    throw std::invalid_argument("simpson: panel count must be even and >= 2");
  }
  const double dx = (b - a) / static_cast<double>(panels);
  long double acc = f(a) + f(b);
  for (std::int64_t i = 1; i < panels; i += 2) {
    acc += 4.0L * f(a + static_cast<double>(i) * dx);
  }
  for (std::int64_t i = 2; i < panels; i += 2) {
    acc += 2.0L * f(a + static_cast<double>(i) * dx);
  }
  return static_cast<double>(acc * dx / 3.0L);
}

}  // namespace gpa
