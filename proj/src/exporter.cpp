#include "weblog/exporter.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "weblog/error.hpp"

namespace weblog {

namespace fs = std::filesystem;

namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

// Code of a "%XX" sequence at text[i], or -1.
int percent_code(std::string_view text, std::size_t i) {
  if (text[i] != '%' || i + 2 >= text.size()) return -1;
  const int hi = hex_digit(text[i + 1]);
  const int lo = hex_digit(text[i + 2]);
  return hi < 0 || lo < 0 ? -1 : hi * 16 + lo;
}

bool is_control(int u) { return u < 0x20 || u == 0x7f; }

// Sequences unescape_field decodes: control characters and the escaped '%'.
bool decodable(int code) { return code >= 0 && (is_control(code) || code == 0x25); }

}  // namespace

std::string escape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto u = static_cast<unsigned char>(text[i]);
    // A literal '%' is escaped only where it would otherwise read as a code.
    if (is_control(u) || (u == '%' && decodable(percent_code(text, i)))) {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", u);
      out.append(buf);
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

std::string unescape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const int code = percent_code(text, i);
    if (decodable(code)) {
      out.push_back(static_cast<char>(code));
      i += 2;
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

namespace {

std::string optional_field(const std::optional<std::string>& value) {
  return value ? escape_field(*value) : std::string("-");
}

void check(std::ostream& out, std::string_view what) {
  if (!out) throw IoError("failed writing " + std::string(what));
}

}  // namespace

void write_requests_table(std::ostream& out, std::span<const LogEntry> entries,
                          std::span<const UserId> user_of,
                          std::span<const std::uint64_t> session_of) {
  out << kRequestsHeader << '\n';
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const LogEntry& e = entries[i];
    out << session_of[i] << '\t' << user_of[i] << '\t' << escape_field(e.server_name) << '\t'
        << escape_field(e.remote_host) << '\t' << escape_field(e.identd) << '\t'
        << optional_field(e.auth_login) << '\t' << format_iso8601(e.timestamp_utc) << '\t'
        << format_offset(e.original_offset_minutes) << '\t' << escape_field(e.method.text())
        << '\t' << escape_field(e.path) << '\t' << optional_field(e.query) << '\t'
        << escape_field(e.protocol) << '\t' << e.status << '\t'
        << (e.bytes ? std::to_string(*e.bytes) : std::string("-")) << '\t'
        << optional_field(e.referrer) << '\t' << optional_field(e.user_agent) << '\t'
        << e.line_number << '\n';
  }
  check(out, kRequestsFile);
}

void write_sessions_table(std::ostream& out, std::span<const LogEntry> entries,
                          std::span<const SessionHistory> sessions) {
  std::vector<const SessionHistory*> ordered;
  ordered.reserve(sessions.size());
  for (const SessionHistory& s : sessions) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->session_id < b->session_id; });

  out << kSessionsHeader << '\n';
  for (const SessionHistory* s : ordered) {
    std::vector<SessionRequest> requests = s->requests;
    std::stable_sort(requests.begin(), requests.end(),
                     [](const auto& a, const auto& b) { return a.time < b.time; });
    for (const SessionRequest& r : requests) {
      const LogEntry& e = entries[r.entry];
      out << s->session_id << '\t' << escape_field(e.remote_host) << '\t'
          << format_iso8601(e.timestamp_utc) << '\t' << escape_field(e.target()) << '\n';
    }
  }
  check(out, kSessionsFile);
}

void write_users_table(std::ostream& out, std::span<const UserRecord> users) {
  out << kUsersHeader << '\n';
  for (const UserRecord& u : users) {
    out << u.user_id << '\t' << to_string(u.key.kind) << '\t' << escape_field(u.key.value)
        << '\t' << format_iso8601(u.first_seen) << '\t' << format_iso8601(u.last_seen) << '\t'
        << u.request_count << '\n';
  }
  check(out, kUsersFile);
}

void write_sources_table(std::ostream& out, std::span<const SourceSummary> sources) {
  out << kSourcesHeader << '\n';
  for (const SourceSummary& s : sources) {
    out << escape_field(s.source.server_name) << '\t' << escape_field(s.source.file_path) << '\t'
        << to_string(s.source.format) << '\t' << s.source.clock_skew_seconds << '\t'
        << s.parse.total_lines << '\t' << s.parse.parsed << '\t' << s.parse.malformed << '\t'
        << s.kept_requests << '\n';
  }
  check(out, kSourcesFile);
}

std::string report_document(const AggregateReport& report,
                            std::span<const SourceSummary> sources) {
  using nlohmann::ordered_json;
  const CleaningReport& c = report.cleaning;

  ordered_json doc;
  doc["input_entries"] = c.input_count;
  doc["kept_entries"] = c.kept_count;
  doc["input_bytes"] = c.input_bytes;
  doc["kept_bytes"] = c.kept_bytes;
  doc["reduction_percent_entries"] = c.reduction_percent();
  doc["reduction_percent_bytes"] = c.byte_reduction_percent();
  ordered_json removed = ordered_json::object();
  for (RemovalRule rule : kAllRemovalRules) {
    const auto it = c.removed_by_rule.find(std::string(to_string(rule)));
    removed[std::string(to_string(rule))] = it == c.removed_by_rule.end() ? 0 : it->second;
  }
  doc["removed_by_rule"] = removed;

  std::uint64_t malformed = 0;
  for (const SourceSummary& s : sources) malformed += s.parse.malformed;
  doc["malformed_lines"] = malformed;

  doc["totals"] = {{"users", report.totals.users},
                   {"sessions", report.totals.sessions},
                   {"requests", report.totals.requests}};

  ordered_json shares = ordered_json::object();
  for (const auto& [server, share] : report.server_shares) shares[server] = share;
  doc["server_shares"] = shares;

  std::int64_t max_length = 0;
  std::uint64_t max_views = 0;
  double sum_length = 0.0;
  double sum_views = 0.0;
  for (const SessionStats& s : report.session_stats) {
    max_length = std::max(max_length, s.length_seconds);
    max_views = std::max(max_views, s.page_views);
    sum_length += static_cast<double>(s.length_seconds);
    sum_views += static_cast<double>(s.page_views);
  }
  const auto n = static_cast<double>(report.session_stats.size());
  doc["sessions"] = {{"count", report.session_stats.size()},
                     {"mean_length_seconds", n > 0 ? sum_length / n : 0.0},
                     {"max_length_seconds", max_length},
                     {"mean_page_views", n > 0 ? sum_views / n : 0.0},
                     {"max_page_views", max_views}};

  ordered_json periods = ordered_json::object();
  for (const auto& [granularity, buckets] : report.period_buckets) {
    ordered_json rows = ordered_json::array();
    for (const PeriodBucket& b : buckets) {
      rows.push_back({{"bucket_start", format_iso8601(b.bucket_start)},
                      {"unique_visitors", b.unique_visitors},
                      {"unique_agents", b.unique_agents},
                      {"visits", b.visits},
                      {"requests", b.requests}});
    }
    periods[to_lower(to_string(granularity))] = rows;
  }
  doc["periods"] = periods;

  ordered_json source_rows = ordered_json::array();
  for (const SourceSummary& s : sources) {
    source_rows.push_back({{"server_name", s.source.server_name},
                           {"format", to_string(s.source.format)},
                           {"total_lines", s.parse.total_lines},
                           {"parsed", s.parse.parsed},
                           {"malformed", s.parse.malformed},
                           {"kept_requests", s.kept_requests}});
  }
  doc["sources"] = source_rows;
  return doc.dump(2) + "\n";
}

void write_report(std::ostream& out, const AggregateReport& report,
                  std::span<const SourceSummary> sources) {
  out << report_document(report, sources);
  check(out, kReportFile);
}

void write_bundle(const fs::path& dir, const BundleContents& bundle) {
  if (bundle.report == nullptr) throw IoError("write_bundle: no report");
  const std::vector<std::uint64_t> session_of =
      session_of_entries(bundle.sessions, bundle.entries.size());

  struct Staged {
    fs::path temp;
    fs::path final_path;
  };
  std::vector<Staged> staged;
  std::vector<fs::path> renamed;
  auto cleanup = [&] {
    std::error_code ec;
    for (const Staged& s : staged) fs::remove(s.temp, ec);
    for (const fs::path& p : renamed) fs::remove(p, ec);
  };

  auto stage = [&](std::string_view name, auto&& writer) {
    const fs::path final_path = dir / name;
    fs::path temp = final_path;
    temp += ".tmp";
    staged.push_back({temp, final_path});
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + temp.string());
    writer(out);
    out.close();
    if (!out) throw IoError("failed writing " + temp.string());
  };

  try {
    stage(kRequestsFile, [&](std::ostream& out) {
      write_requests_table(out, bundle.entries, bundle.user_of, session_of);
    });
    stage(kSessionsFile,
          [&](std::ostream& out) { write_sessions_table(out, bundle.entries, bundle.sessions); });
    stage(kUsersFile, [&](std::ostream& out) { write_users_table(out, bundle.users); });
    stage(kSourcesFile, [&](std::ostream& out) { write_sources_table(out, bundle.sources); });
    stage(kReportFile,
          [&](std::ostream& out) { write_report(out, *bundle.report, bundle.sources); });
    for (const Staged& s : staged) {
      fs::rename(s.temp, s.final_path);
      renamed.push_back(s.final_path);
    }
  } catch (const fs::filesystem_error& e) {
    cleanup();
    throw IoError(e.what());
  } catch (...) {
    cleanup();
    throw;
  }
}

}  // namespace weblog
