#include "gpa/parallel.hpp"

#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gpa {

int max_threads() {
  if (const char* raw = std::getenv("GPA_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(raw, &end, 10);
    if (end != raw && *end == '\0' && parsed >= 1 && parsed <= 4096)
      return static_cast<int>(parsed);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn) {
  if (n < 0) throw std::invalid_argument("parallel_for: negative count");
  if (n == 0) return;

  const std::int64_t workers =
      std::min<std::int64_t>(max_threads(), n);
  if (workers == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (std::int64_t b = 0; b < workers; ++b) {
    const std::int64_t lo = b * n / workers;
    const std::int64_t hi = (b + 1) * n / workers;
    pool.emplace_back([&, b, lo, hi] {
      try {
        for (std::int64_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(b)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);  // lowest block wins: deterministic
}

}  // namespace gpa
