#include "weblog/pipeline.hpp"

#include <cstdio>
#include <algorithm>
#include <ostream>

#include "weblog/error.hpp"
#include "weblog/merger.hpp"
#include "weblog/parser.hpp"

namespace weblog {

namespace fs = std::filesystem;

PipelineResult process(const PipelineConfig& config) {
  if (auto errors = check_config(config); !errors.empty()) throw ConfigError(errors.front());

  // Pass 1: robot pairs over every source, plus format resolution.
  RobotPairs pairs;
  std::vector<LogSource> resolved;
  std::vector<LogEntry> batch;
  for (const LogSource& source : config.sources) {
    LogReader reader(source);
    while (reader.next_batch(batch)) {
      if (config.cleaning.robots_txt_rule) pairs.merge(collect_robot_pairs(batch, config.cleaning));
    }
    resolved.push_back(reader.source());
  }

  // Pass 2: filter batch by batch, keeping survivors only.
  PipelineResult result;
  CleaningReport cleaning;
  std::vector<SourceLog> kept;
  for (const LogSource& source : resolved) {
    LogReader reader(source);
    SourceLog log{source, {}};
    while (reader.next_batch(batch)) {
      cleaning.add(filter_entries(batch, pairs, config.cleaning));
      std::move(batch.begin(), batch.end(), std::back_inserter(log.entries));
    }
    log.entries.shrink_to_fit();
    result.sources.push_back({source, reader.stats(), log.entries.size()});
    kept.push_back(std::move(log));
  }

  JointLog joint = merge(std::move(kept));
  result.entries = std::move(joint.entries);
  result.users = assign_users(result.entries, config.identity_policy);
  result.sessions = sessionize_all(result.entries, result.users.user_of, config.sessionizer);
  result.report = build_report(result.entries, result.users.user_of, result.users.users,
                               result.sessions, cleaning, config.granularities);
  check_invariants(result);
  return result;
}

void check_invariants(const PipelineResult& result) {
  const auto fail = [](const std::string& what) { throw InvariantError(what); };
  const std::size_t n = result.entries.size();
  const CleaningReport& cleaning = result.report.cleaning;
  if (cleaning.kept_count != n) fail("kept count differs from the number of kept entries");
  if (cleaning.kept_count + cleaning.removed_count() != cleaning.input_count) {
    fail("kept and removed counts do not add up to the input count");
  }
  std::uint64_t parsed = 0;
  std::uint64_t kept_by_source = 0;
  for (const SourceSummary& s : result.sources) {
    parsed += s.parse.parsed;
    kept_by_source += s.kept_requests;
    if (s.parse.parsed + s.parse.malformed != s.parse.total_lines) {
      fail("line counts of source '" + s.source.server_name + "' do not reconcile");
    }
  }
  if (parsed != cleaning.input_count) fail("parsed entries differ from the cleaning input");
  if (kept_by_source != n) fail("per-source kept counts do not sum to the total");
  if (!is_merge_sorted(result.entries)) fail("joint log is not sorted");
  if (result.users.user_of.size() != n) fail("user assignment is incomplete");

  std::vector<bool> covered(n, false);
  std::uint64_t page_views = 0;
  for (std::size_t i = 0; i < result.sessions.size(); ++i) {
    const SessionHistory& s = result.sessions[i];
    if (s.session_id != i + 1) fail("session ids are not dense");
    for (const SessionRequest& r : s.requests) {
      if (r.entry >= n || covered[r.entry]) fail("a request belongs to zero or two sessions");
      covered[r.entry] = true;
      if (result.users.user_of[r.entry] != s.user_id) fail("a session mixes users");
    }
  }
  for (const SessionStats& st : result.report.session_stats) page_views += st.page_views;
  if (page_views != n) fail("session page views do not sum to the kept count");
  if (std::find(covered.begin(), covered.end(), false) != covered.end()) {
    fail("a request belongs to no session");
  }
}

RunSummary run_pipeline(const PipelineConfig& config) {
  const fs::path& dir = config.output_dir;
  std::error_code ec;
  const bool existed = fs::exists(dir, ec);
  try {
    PipelineResult result = process(config);
    if (!existed) {
      fs::create_directories(dir, ec);
      if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    } else if (!fs::is_directory(dir)) {
      throw IoError("output path '" + dir.string() + "' is not a directory");
    }
    BundleContents bundle{result.entries, result.users.user_of, result.users.users,
                          result.sessions, result.sources, &result.report};
    write_bundle(dir, bundle);

    RunSummary summary;
    const CleaningReport& c = result.report.cleaning;
    summary.input_entries = c.input_count;
    summary.kept_entries = c.kept_count;
    for (const SourceSummary& s : result.sources) summary.malformed_lines += s.parse.malformed;
    summary.reduction_percent = c.reduction_percent();
    summary.users = result.users.users.size();
    summary.sessions = result.sessions.size();
    return summary;
  } catch (...) {
    if (!existed) fs::remove_all(dir, ec);
    throw;
  }
}

void print_summary(std::ostream& out, const PipelineConfig& config, const RunSummary& s) {
  char pct[32];
  std::snprintf(pct, sizeof pct, "%.2f", s.reduction_percent);
  out << "sources:          " << config.sources.size() << '\n'
      << "entries in:       " << s.input_entries << '\n'
      << "malformed lines:  " << s.malformed_lines << '\n'
      << "entries kept:     " << s.kept_entries << '\n'
      << "reduction:        " << pct << "%\n"
      << "users:            " << s.users << '\n'
      << "sessions:         " << s.sessions << '\n'
      << "output:           " << config.output_dir.string() << '\n';
}

}  // namespace weblog
