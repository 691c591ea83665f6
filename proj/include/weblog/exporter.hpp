#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weblog/identity.hpp"
#include "weblog/logmodel.hpp"
#include "weblog/parser.hpp"
#include "weblog/sessionizer.hpp"
#include "weblog/summarizer.hpp"

namespace weblog {

inline constexpr std::string_view kRequestsFile = "requests.tsv";
inline constexpr std::string_view kSessionsFile = "sessions.tsv";
inline constexpr std::string_view kUsersFile = "users.tsv";
inline constexpr std::string_view kSourcesFile = "sources.tsv";
inline constexpr std::string_view kReportFile = "report.json";

inline constexpr std::string_view kRequestsHeader =
    "session_id\tuser_id\tserver_name\tremote_host\tidentd\tauth_login\ttimestamp_utc\t"
    "original_offset\tmethod\tpath\tquery\tprotocol\tstatus\tbytes\treferrer\tuser_agent\t"
    "line_number";
inline constexpr std::string_view kSessionsHeader = "session_id\tip_address\tdatetime\turl_accessed";
inline constexpr std::string_view kUsersHeader =
    "user_id\tkey_kind\tkey_value\tfirst_seen\tlast_seen\trequest_count";
inline constexpr std::string_view kSourcesHeader =
    "server_name\tfile_path\tformat\tclock_skew_seconds\ttotal_lines\tparsed\tmalformed\t"
    "kept_requests";

// Control characters (0x00-0x1F, 0x7F) become %XX. A '%' that would read as
// one of those codes (or as %25) is itself written %25, so unescape_field is
// an exact inverse. Everything else is copied through.
std::string escape_field(std::string_view text);
std::string unescape_field(std::string_view text);

// Per-source line accounting for sources.tsv and the report.
struct SourceSummary {
  LogSource source;  // format already resolved
  ParseStats parse;
  std::uint64_t kept_requests = 0;
};

// One row per kept request, in joint-log order.
void write_requests_table(std::ostream& out, std::span<const LogEntry> entries,
                          std::span<const UserId> user_of,
                          std::span<const std::uint64_t> session_of);

// One row per request, ordered by (session_id, datetime).
void write_sessions_table(std::ostream& out, std::span<const LogEntry> entries,
                          std::span<const SessionHistory> sessions);

void write_users_table(std::ostream& out, std::span<const UserRecord> users);

void write_sources_table(std::ostream& out, std::span<const SourceSummary> sources);

// JSON report document (trailing newline included).
std::string report_document(const AggregateReport& report,
                            std::span<const SourceSummary> sources);

void write_report(std::ostream& out, const AggregateReport& report,
                  std::span<const SourceSummary> sources);

struct BundleContents {
  std::span<const LogEntry> entries;
  std::span<const UserId> user_of;
  std::span<const UserRecord> users;
  std::span<const SessionHistory> sessions;
  std::span<const SourceSummary> sources;
  const AggregateReport* report = nullptr;
};

// Writes the five bundle files into an existing directory. Files are staged
// under temporary names and renamed at the end; on failure nothing from this
// call is left behind and IoError is thrown.
void write_bundle(const std::filesystem::path& dir, const BundleContents& bundle);

}  // namespace weblog
