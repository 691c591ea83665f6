#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weblog/cleaner.hpp"
#include "weblog/identity.hpp"
#include "weblog/logmodel.hpp"
#include "weblog/sessionizer.hpp"

namespace weblog {

struct SessionStats {
  std::uint64_t session_id = 0;
  UserId user_id = 0;
  Instant start{};
  Instant end{};
  std::int64_t length_seconds = 0;
  std::uint64_t page_views = 0;
};

// Throws PreconditionError for an empty history.
SessionStats session_stats(const SessionHistory& session);

enum class Granularity { Hour, Day, Week, Month };

std::string_view to_string(Granularity granularity);
std::optional<Granularity> parse_granularity(std::string_view text);

// Start of the UTC interval containing t. Weeks start Monday 00:00 UTC.
Instant bucket_start(Instant t, Granularity granularity);

struct PeriodBucket {
  Granularity granularity = Granularity::Day;
  Instant bucket_start{};
  std::uint64_t unique_visitors = 0;
  std::uint64_t unique_agents = 0;  // an absent agent counts as one value
  std::uint64_t visits = 0;         // sessions whose first request is in the bucket
  std::uint64_t requests = 0;
};

// One bucket per interval holding at least one request, in time order.
std::vector<PeriodBucket> period_stats(std::span<const LogEntry> entries,
                                       std::span<const UserId> user_of,
                                       std::span<const SessionHistory> sessions,
                                       Granularity granularity);

// server_name -> percentage of requests.
std::map<std::string, double> server_shares(std::span<const LogEntry> entries);

struct Totals {
  std::uint64_t users = 0;
  std::uint64_t sessions = 0;
  std::uint64_t requests = 0;
};

struct AggregateReport {
  std::vector<SessionStats> session_stats;
  std::map<Granularity, std::vector<PeriodBucket>> period_buckets;
  std::map<std::string, double> server_shares;
  CleaningReport cleaning;
  Totals totals;
};

AggregateReport build_report(std::span<const LogEntry> entries, std::span<const UserId> user_of,
                             std::span<const UserRecord> users,
                             std::span<const SessionHistory> sessions,
                             const CleaningReport& cleaning,
                             const std::set<Granularity>& granularities);

}  // namespace weblog
