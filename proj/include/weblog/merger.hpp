#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "weblog/logmodel.hpp"

namespace weblog {

// The joint log: every source's entries, tagged with the server name and
// ordered by merge_key_less.
struct JointLog {
  std::vector<LogEntry> entries;
  std::map<std::string, std::size_t> source_counts;
};

struct SourceLog {
  LogSource source;
  std::vector<LogEntry> entries;
};

// Total order used for the joint log: (timestamp_utc, server_name,
// line_number).
bool merge_key_less(const LogEntry& a, const LogEntry& b);

// True when the sequence is already non-decreasing under merge_key_less.
bool is_merge_sorted(std::span<const LogEntry> entries);

// Throws ConfigError on a duplicate server name before touching any entry.
// Inputs that are individually sorted are k-way merged; otherwise everything
// is concatenated and sorted. Both paths give the same sequence.
JointLog merge(std::vector<SourceLog> inputs);

}  // namespace weblog
