#include "qldrift/runner/workers.hpp"

#include <charconv>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace qldrift::runner {

std::size_t default_worker_count() {
  if (const char* env = std::getenv("QLDRIFT_WORKERS"); env && *env) {
    const std::string s(env);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v == 0)
      throw std::invalid_argument("QLDRIFT_WORKERS must be a positive integer, got '" + s + "'");
    return v;
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

}  // namespace qldrift::runner
