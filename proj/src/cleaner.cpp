#include "weblog/cleaner.hpp"

#include <algorithm>
#include <cctype>

#include "weblog/parser.hpp"

namespace weblog {

std::string_view to_string(StatusPolicy policy) {
  return policy == StatusPolicy::KeepAll ? "KEEP_ALL" : "KEEP_SUCCESS_AND_REDIRECT";
}

std::optional<StatusPolicy> parse_status_policy(std::string_view text) {
  if (text == "KEEP_ALL") return StatusPolicy::KeepAll;
  if (text == "KEEP_SUCCESS_AND_REDIRECT") return StatusPolicy::KeepSuccessAndRedirect;
  return std::nullopt;
}

std::string_view to_string(RemovalRule rule) {
  switch (rule) {
    case RemovalRule::Robot:
      return "robot";
    case RemovalRule::Image:
      return "image";
    case RemovalRule::Multimedia:
      return "multimedia";
    case RemovalRule::Style:
      return "style";
    case RemovalRule::Script:
      return "script";
    case RemovalRule::Other:
      return "other";
    case RemovalRule::Status:
      return "status";
    case RemovalRule::Method:
      return "method";
  }
  return "other";
}

std::string RobotPairs::key(std::string_view host, std::string_view agent) {
  std::string k;
  k.reserve(host.size() + 1 + agent.size());
  k.append(host).push_back('\x01');
  k.append(agent);
  return k;
}

void RobotPairs::insert(std::string_view host, std::string_view agent) {
  keys_.insert(key(host, agent));
}

bool RobotPairs::contains(std::string_view host, std::string_view agent) const {
  return !keys_.empty() && keys_.contains(key(host, agent));
}

void RobotPairs::merge(const RobotPairs& other) { keys_.insert(other.keys_.begin(), other.keys_.end()); }

std::map<std::string, std::uint64_t> CleaningReport::empty_rule_counts() {
  std::map<std::string, std::uint64_t> counts;
  for (RemovalRule rule : kAllRemovalRules) counts.emplace(to_string(rule), 0);
  return counts;
}

double CleaningReport::reduction_percent() const {
  if (input_count == 0) return 0.0;
  return 100.0 * static_cast<double>(input_count - kept_count) / static_cast<double>(input_count);
}

double CleaningReport::byte_reduction_percent() const {
  if (input_bytes == 0) return 0.0;
  return 100.0 * static_cast<double>(input_bytes - kept_bytes) / static_cast<double>(input_bytes);
}

std::uint64_t CleaningReport::removed_count() const {
  std::uint64_t total = 0;
  for (const auto& [rule, count] : removed_by_rule) total += count;
  return total;
}

void CleaningReport::add(const CleaningReport& other) {
  input_count += other.input_count;
  kept_count += other.kept_count;
  input_bytes += other.input_bytes;
  kept_bytes += other.kept_bytes;
  for (const auto& [rule, count] : other.removed_by_rule) removed_by_rule[rule] += count;
}

std::uint64_t entry_bytes(const LogEntry& entry) {
  return serialize_entry(entry, entry.format).size() + 1;
}

namespace {

bool contains_nocase(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return true;
  const auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                              [](char a, char b) {
                                return std::tolower(static_cast<unsigned char>(a)) ==
                                       std::tolower(static_cast<unsigned char>(b));
                              });
  return it != haystack.end();
}

std::string_view agent_of(const LogEntry& entry) {
  return entry.user_agent ? std::string_view(*entry.user_agent) : std::string_view{};
}

std::optional<RemovalRule> class_rule(ResourceClass cls) {
  switch (cls) {
    case ResourceClass::Image:
      return RemovalRule::Image;
    case ResourceClass::Multimedia:
      return RemovalRule::Multimedia;
    case ResourceClass::Style:
      return RemovalRule::Style;
    case ResourceClass::Script:
      return RemovalRule::Script;
    case ResourceClass::Other:
      return RemovalRule::Other;
    case ResourceClass::Page:
    case ResourceClass::RobotFile:
      return std::nullopt;
  }
  return std::nullopt;
}

bool method_kept(const Method& method, const CleaningConfig& config) {
  const std::string_view verb = method.text();
  return std::find(config.methods_kept.begin(), config.methods_kept.end(), verb) !=
         config.methods_kept.end();
}

void tally(CleaningReport& report, std::optional<RemovalRule> rule, std::uint64_t bytes) {
  ++report.input_count;
  report.input_bytes += bytes;
  if (rule) {
    ++report.removed_by_rule[std::string(to_string(*rule))];
  } else {
    ++report.kept_count;
    report.kept_bytes += bytes;
  }
}

JointLog recount(std::vector<LogEntry> entries, const JointLog& input) {
  JointLog out;
  for (const auto& [server, count] : input.source_counts) out.source_counts[server] = 0;
  for (const LogEntry& e : entries) ++out.source_counts[e.server_name];
  out.entries = std::move(entries);
  return out;
}

}  // namespace

bool is_robot(const LogEntry& entry, const RobotPairs& robot_pairs,
              const CleaningConfig& config) {
  const std::string_view agent = agent_of(entry);
  if (!agent.empty()) {
    for (const std::string& needle : config.robot_agent_substrings) {
      if (contains_nocase(agent, needle)) return true;
    }
  }
  return robot_pairs.contains(entry.remote_host, agent);
}

std::optional<RemovalRule> removal_rule(const LogEntry& entry, const RobotPairs& robot_pairs,
                                        const CleaningConfig& config) {
  const ResourceClass cls = classify_resource(entry.path, config.extensions);
  if (cls == ResourceClass::RobotFile || is_robot(entry, robot_pairs, config)) {
    return RemovalRule::Robot;
  }
  if (config.remove_classes.contains(cls)) {
    if (auto rule = class_rule(cls)) return rule;
  }
  if (config.status_policy == StatusPolicy::KeepSuccessAndRedirect && entry.status >= 400) {
    return RemovalRule::Status;
  }
  if (!method_kept(entry.method, config)) return RemovalRule::Method;
  return std::nullopt;
}

RobotPairs collect_robot_pairs(std::span<const LogEntry> entries, const CleaningConfig& config) {
  RobotPairs pairs;
  if (!config.robots_txt_rule) return pairs;
  const auto n = static_cast<std::ptrdiff_t>(entries.size());
#pragma omp parallel
  {
    RobotPairs local;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const LogEntry& e = entries[i];
      if (classify_resource(e.path, config.extensions) == ResourceClass::RobotFile) {
        local.insert(e.remote_host, agent_of(e));
      }
    }
#pragma omp critical(weblog_robot_pairs)
    pairs.merge(local);
  }
  return pairs;
}

CleaningReport filter_entries(std::vector<LogEntry>& entries, const RobotPairs& robot_pairs,
                              const CleaningConfig& config) {
  const auto n = static_cast<std::ptrdiff_t>(entries.size());
  constexpr std::int8_t kKeep = -1;
  std::vector<std::int8_t> rules(entries.size());
  std::vector<std::uint64_t> bytes(entries.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto rule = removal_rule(entries[i], robot_pairs, config);
    rules[i] = rule ? static_cast<std::int8_t>(*rule) : kKeep;
    bytes[i] = entry_bytes(entries[i]);
  }

  CleaningReport report;
  std::size_t write = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (rules[i] != kKeep) {
      tally(report, static_cast<RemovalRule>(rules[i]), bytes[i]);
      continue;
    }
    tally(report, std::nullopt, bytes[i]);
    if (write != i) entries[write] = std::move(entries[i]);
    ++write;
  }
  entries.erase(entries.begin() + static_cast<std::ptrdiff_t>(write), entries.end());
  return report;
}

CleanResult clean(const JointLog& joint, const CleaningConfig& config) {
  const RobotPairs pairs = collect_robot_pairs(joint.entries, config);
  std::vector<LogEntry> entries = joint.entries;
  CleaningReport report = filter_entries(entries, pairs, config);
  return {recount(std::move(entries), joint), std::move(report)};
}

namespace serial {

RobotPairs collect_robot_pairs(std::span<const LogEntry> entries, const CleaningConfig& config) {
  RobotPairs pairs;
  if (!config.robots_txt_rule) return pairs;
  for (const LogEntry& e : entries) {
    if (classify_resource(e.path, config.extensions) == ResourceClass::RobotFile) {
      pairs.insert(e.remote_host, agent_of(e));
    }
  }
  return pairs;
}

CleaningReport filter_entries(std::vector<LogEntry>& entries, const RobotPairs& robot_pairs,
                              const CleaningConfig& config) {
  CleaningReport report;
  std::vector<LogEntry> kept;
  for (LogEntry& e : entries) {
    const auto rule = removal_rule(e, robot_pairs, config);
    tally(report, rule, entry_bytes(e));
    if (!rule) kept.push_back(std::move(e));
  }
  entries = std::move(kept);
  return report;
}

CleanResult clean(const JointLog& joint, const CleaningConfig& config) {
  const RobotPairs pairs = serial::collect_robot_pairs(joint.entries, config);
  std::vector<LogEntry> entries = joint.entries;
  CleaningReport report = serial::filter_entries(entries, pairs, config);
  return {recount(std::move(entries), joint), std::move(report)};
}

}  // namespace serial

}  // namespace weblog
