#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace weblog {

// One-second resolution UTC instant; CLF has no sub-second field.
using Instant = std::chrono::sys_seconds;

enum class LogFormat { Clf, Eclf, Auto };

std::string_view to_string(LogFormat format);
std::optional<LogFormat> parse_log_format(std::string_view text);

enum class MethodKind { Get, Post, Head, Other };

// Request method. Verbs outside GET/POST/HEAD keep their text in `other`.
struct Method {
  MethodKind kind = MethodKind::Get;
  std::string other;

  static Method from_text(std::string_view verb);
  std::string_view text() const;

  bool operator==(const Method&) const = default;
};

// One parsed request record.
struct LogEntry {
  std::string server_name;
  std::string remote_host;
  std::string identd = "-";
  std::optional<std::string> auth_login;
  Instant timestamp_utc{};
  int original_offset_minutes = 0;
  Method method;
  std::string path;
  std::optional<std::string> query;
  std::string protocol = "HTTP/1.0";
  int status = 200;
  std::optional<std::uint64_t> bytes;
  std::optional<std::string> referrer;
  std::optional<std::string> user_agent;
  std::uint64_t line_number = 1;
  // Layout of the line this entry came from; never Auto.
  LogFormat format = LogFormat::Clf;

  // path, plus "?query" when a query is present.
  std::string target() const;

  bool operator==(const LogEntry&) const = default;
};

struct LogSource {
  std::string server_name;
  std::string file_path;
  LogFormat format = LogFormat::Auto;
  std::int64_t clock_skew_seconds = 0;
};

enum class ResourceClass { Page, Image, Multimedia, Style, Script, RobotFile, Other };

std::string_view to_string(ResourceClass cls);
std::optional<ResourceClass> parse_resource_class(std::string_view text);

// Lowercase extensions (without the dot) per non-page class. Anything not
// listed is a PAGE.
struct ExtensionTable {
  std::set<std::string, std::less<>> image;
  std::set<std::string, std::less<>> multimedia;
  std::set<std::string, std::less<>> style;
  std::set<std::string, std::less<>> script;
  std::set<std::string, std::less<>> other;

  static const ExtensionTable& defaults();
};

// Pure function of the path's lowercase extension; any query string or
// fragment is ignored. "/robots.txt" (case-insensitive) is ROBOT_FILE.
ResourceClass classify_resource(std::string_view path);
ResourceClass classify_resource(std::string_view path, const ExtensionTable& table);

struct LocalDateTime {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;
  unsigned hour = 0;
  unsigned minute = 0;
  unsigned second = 0;
};

// local_time - offset - clock_skew as a UTC instant. Empty when the calendar
// date or clock time is invalid, or the offset is outside [-1440, 1440].
std::optional<Instant> normalize_time(const LocalDateTime& local_time, int offset_minutes,
                                      std::int64_t clock_skew_seconds);

// "1995-07-22T01:16:58Z"
std::string format_iso8601(Instant t);

// Parses the format produced by format_iso8601.
std::optional<Instant> parse_iso8601(std::string_view text);

// "+0200", "-0400"
std::string format_offset(int offset_minutes);

std::string to_lower(std::string_view text);

}  // namespace weblog
