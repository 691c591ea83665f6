#pragma once

#include <optional>
#include <string_view>

namespace weblog {

// Caps the number of OpenMP threads used by the kernels; 0 restores the
// runtime default.
void set_parallelism(int threads);
int parallelism();

// Reads a thread count in WEBLOG_PREP_THREADS format ("0" = auto). Empty on
// anything that is not a non-negative integer.
std::optional<int> parse_thread_count(std::string_view text);

}  // namespace weblog
