#include "weblog/merger.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <tuple>

#include "weblog/error.hpp"

namespace weblog {

bool merge_key_less(const LogEntry& a, const LogEntry& b) {
  return std::tie(a.timestamp_utc, a.server_name, a.line_number) <
         std::tie(b.timestamp_utc, b.server_name, b.line_number);
}

bool is_merge_sorted(std::span<const LogEntry> entries) {
  return std::is_sorted(entries.begin(), entries.end(), merge_key_less);
}

namespace {

void kway_merge(std::vector<SourceLog>& inputs, std::vector<LogEntry>& out) {
  struct Head {
    std::size_t source;
    std::size_t index;
  };
  auto greater = [&](const Head& a, const Head& b) {
    return merge_key_less(inputs[b.source].entries[b.index], inputs[a.source].entries[a.index]);
  };
  std::priority_queue<Head, std::vector<Head>, decltype(greater)> heads(greater);
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    if (!inputs[s].entries.empty()) heads.push({s, 0});
  }
  while (!heads.empty()) {
    const Head head = heads.top();
    heads.pop();
    std::vector<LogEntry>& entries = inputs[head.source].entries;
    out.push_back(std::move(entries[head.index]));
    if (head.index + 1 < entries.size()) {
      heads.push({head.source, head.index + 1});
    } else {
      std::vector<LogEntry>().swap(entries);
    }
  }
}

}  // namespace

JointLog merge(std::vector<SourceLog> inputs) {
  std::set<std::string, std::less<>> names;
  for (const SourceLog& input : inputs) {
    if (!names.insert(input.source.server_name).second) {
      throw ConfigError("duplicate server name '" + input.source.server_name + "'");
    }
  }

  JointLog joint;
  std::size_t total = 0;
  bool all_sorted = true;
  for (SourceLog& input : inputs) {
    for (LogEntry& entry : input.entries) entry.server_name = input.source.server_name;
    joint.source_counts[input.source.server_name] += input.entries.size();
    total += input.entries.size();
    all_sorted = all_sorted && is_merge_sorted(input.entries);
  }
  joint.entries.reserve(total);

  if (all_sorted) {
    kway_merge(inputs, joint.entries);
  } else {
    for (SourceLog& input : inputs) {
      std::move(input.entries.begin(), input.entries.end(), std::back_inserter(joint.entries));
      std::vector<LogEntry>().swap(input.entries);
    }
    std::stable_sort(joint.entries.begin(), joint.entries.end(), merge_key_less);
  }
  return joint;
}

}  // namespace weblog
