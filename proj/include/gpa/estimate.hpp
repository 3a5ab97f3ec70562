#pragma once

#include <optional>

namespace gpa {

// A point estimate that may be Undefined (empty kernel window, degenerate
// denominator, ...). Undefined propagates through combination and
// interpolation; report writers render it as "NA".
using Estimate = std::optional<double>;

}  // namespace gpa
