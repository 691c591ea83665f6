#include "weblog/parallel.hpp"

#include <charconv>

#include <omp.h>

namespace weblog {

namespace {
int default_threads() {
  static const int n = omp_get_max_threads();
  return n;
}
}  // namespace

void set_parallelism(int threads) {
  const int fallback = default_threads();
  omp_set_num_threads(threads > 0 ? threads : fallback);
}

int parallelism() { return omp_get_max_threads(); }

std::optional<int> parse_thread_count(std::string_view text) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || value < 0) {
    return std::nullopt;
  }
  return value;
}

}  // namespace weblog
