#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "weblog/logmodel.hpp"
#include "weblog/merger.hpp"

namespace weblog {

enum class StatusPolicy {
  KeepAll,
  KeepSuccessAndRedirect,  // drops status >= 400
};

std::string_view to_string(StatusPolicy policy);
std::optional<StatusPolicy> parse_status_policy(std::string_view text);

struct CleaningConfig {
  std::set<ResourceClass> remove_classes{ResourceClass::Image, ResourceClass::Multimedia,
                                         ResourceClass::Style, ResourceClass::Script};
  StatusPolicy status_policy = StatusPolicy::KeepSuccessAndRedirect;
  // Matched case-insensitively against the user agent.
  std::vector<std::string> robot_agent_substrings{"slurp", "bot", "crawler", "spider"};
  // A (host, agent) pair that ever fetches /robots.txt is a robot for the whole run.
  bool robots_txt_rule = true;
  std::vector<std::string> methods_kept{"GET", "POST", "HEAD"};
  ExtensionTable extensions = ExtensionTable::defaults();
};

// Why an entry was dropped. The first matching rule wins, in declaration
// order: robot, then resource class, then status, then method.
enum class RemovalRule { Robot, Image, Multimedia, Style, Script, Other, Status, Method };

std::string_view to_string(RemovalRule rule);
inline constexpr RemovalRule kAllRemovalRules[] = {
    RemovalRule::Robot, RemovalRule::Image,  RemovalRule::Multimedia, RemovalRule::Style,
    RemovalRule::Script, RemovalRule::Other, RemovalRule::Status,     RemovalRule::Method};

// (remote_host, user_agent) pairs; an absent agent is the empty string.
class RobotPairs {
 public:
  void insert(std::string_view host, std::string_view agent);
  bool contains(std::string_view host, std::string_view agent) const;
  void merge(const RobotPairs& other);
  std::size_t size() const { return keys_.size(); }
  bool operator==(const RobotPairs&) const = default;

 private:
  static std::string key(std::string_view host, std::string_view agent);
  std::unordered_set<std::string> keys_;
};

struct CleaningReport {
  std::uint64_t input_count = 0;
  std::uint64_t kept_count = 0;
  std::uint64_t input_bytes = 0;
  std::uint64_t kept_bytes = 0;
  // Every RemovalRule name is present, zero or not.
  std::map<std::string, std::uint64_t> removed_by_rule = empty_rule_counts();

  // 100 * (input - kept) / input, 0 for empty input.
  double reduction_percent() const;
  double byte_reduction_percent() const;
  std::uint64_t removed_count() const;

  void add(const CleaningReport& other);

  static std::map<std::string, std::uint64_t> empty_rule_counts();
};

// Bytes an entry contributes to the size metrics: its serialized line + LF.
std::uint64_t entry_bytes(const LogEntry& entry);

bool is_robot(const LogEntry& entry, const RobotPairs& robot_pairs,
              const CleaningConfig& config);

// Empty when the entry is kept.
std::optional<RemovalRule> removal_rule(const LogEntry& entry, const RobotPairs& robot_pairs,
                                        const CleaningConfig& config);

// Cleaning pass 1: pairs that requested ROBOT_FILE (empty when
// robots_txt_rule is off).
RobotPairs collect_robot_pairs(std::span<const LogEntry> entries, const CleaningConfig& config);

// Cleaning pass 2 on a buffer: kept entries are compacted to the front in
// their original order, the rest erased. Returns the counts for this buffer.
CleaningReport filter_entries(std::vector<LogEntry>& entries, const RobotPairs& robot_pairs,
                              const CleaningConfig& config);

struct CleanResult {
  JointLog log;
  CleaningReport report;
};

// Both passes over an in-memory joint log.
CleanResult clean(const JointLog& joint, const CleaningConfig& config);

namespace serial {
RobotPairs collect_robot_pairs(std::span<const LogEntry> entries, const CleaningConfig& config);
CleaningReport filter_entries(std::vector<LogEntry>& entries, const RobotPairs& robot_pairs,
                              const CleaningConfig& config);
CleanResult clean(const JointLog& joint, const CleaningConfig& config);
}  // namespace serial

}  // namespace weblog
