#include "weblog/summarizer.hpp"

#include <unordered_set>

#include "weblog/error.hpp"

namespace weblog {

using namespace std::chrono;

SessionStats session_stats(const SessionHistory& session) {
  if (session.requests.empty()) {
    throw PreconditionError("session_stats: session " + std::to_string(session.session_id) +
                            " is empty");
  }
  SessionStats stats;
  stats.session_id = session.session_id;
  stats.user_id = session.user_id;
  stats.start = session.requests.front().time;
  stats.end = session.requests.front().time;
  for (const SessionRequest& r : session.requests) {
    stats.start = std::min(stats.start, r.time);
    stats.end = std::max(stats.end, r.time);
  }
  stats.length_seconds = (stats.end - stats.start).count();
  stats.page_views = session.requests.size();
  return stats;
}

std::string_view to_string(Granularity granularity) {
  switch (granularity) {
    case Granularity::Hour:
      return "HOUR";
    case Granularity::Day:
      return "DAY";
    case Granularity::Week:
      return "WEEK";
    case Granularity::Month:
      return "MONTH";
  }
  return "DAY";
}

std::optional<Granularity> parse_granularity(std::string_view text) {
  for (Granularity g : {Granularity::Hour, Granularity::Day, Granularity::Week,
                        Granularity::Month}) {
    if (to_string(g) == text) return g;
  }
  return std::nullopt;
}

Instant bucket_start(Instant t, Granularity granularity) {
  const sys_days day = floor<days>(t);
  switch (granularity) {
    case Granularity::Hour:
      return floor<hours>(t);
    case Granularity::Day:
      return day;
    case Granularity::Week: {
      const unsigned iso = weekday{day}.iso_encoding();  // Monday = 1
      return day - days{iso - 1};
    }
    case Granularity::Month: {
      const year_month_day ymd{day};
      return sys_days{ymd.year() / ymd.month() / 1};
    }
  }
  return day;
}

std::vector<PeriodBucket> period_stats(std::span<const LogEntry> entries,
                                       std::span<const UserId> user_of,
                                       std::span<const SessionHistory> sessions,
                                       Granularity granularity) {
  struct Accumulator {
    std::unordered_set<UserId> visitors;
    std::unordered_set<std::string> agents;
    bool absent_agent = false;
    std::uint64_t visits = 0;
    std::uint64_t requests = 0;
  };
  std::map<Instant, Accumulator> buckets;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Accumulator& acc = buckets[bucket_start(entries[i].timestamp_utc, granularity)];
    ++acc.requests;
    acc.visitors.insert(user_of[i]);
    if (entries[i].user_agent) {
      acc.agents.insert(*entries[i].user_agent);
    } else {
      acc.absent_agent = true;
    }
  }
  for (const SessionHistory& s : sessions) {
    if (s.requests.empty()) continue;
    ++buckets[bucket_start(s.start(), granularity)].visits;
  }

  std::vector<PeriodBucket> out;
  out.reserve(buckets.size());
  for (const auto& [start, acc] : buckets) {
    out.push_back({granularity, start, acc.visitors.size(),
                   acc.agents.size() + (acc.absent_agent ? 1u : 0u), acc.visits, acc.requests});
  }
  return out;
}

std::map<std::string, double> server_shares(std::span<const LogEntry> entries) {
  std::map<std::string, std::uint64_t> counts;
  for (const LogEntry& e : entries) ++counts[e.server_name];
  std::map<std::string, double> shares;
  for (const auto& [server, count] : counts) {
    shares[server] = 100.0 * static_cast<double>(count) / static_cast<double>(entries.size());
  }
  return shares;
}

AggregateReport build_report(std::span<const LogEntry> entries, std::span<const UserId> user_of,
                             std::span<const UserRecord> users,
                             std::span<const SessionHistory> sessions,
                             const CleaningReport& cleaning,
                             const std::set<Granularity>& granularities) {
  AggregateReport report;
  report.session_stats.reserve(sessions.size());
  for (const SessionHistory& s : sessions) report.session_stats.push_back(session_stats(s));
  for (Granularity g : granularities) {
    report.period_buckets[g] = period_stats(entries, user_of, sessions, g);
  }
  report.server_shares = server_shares(entries);
  report.cleaning = cleaning;
  report.totals = {users.size(), sessions.size(), entries.size()};
  return report;
}

}  // namespace weblog
