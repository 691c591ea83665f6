#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "weblog/cleaner.hpp"
#include "weblog/config.hpp"
#include "weblog/exporter.hpp"
#include "weblog/identity.hpp"
#include "weblog/sessionizer.hpp"
#include "weblog/summarizer.hpp"

namespace weblog {

// Everything the export stage needs, held in memory after cleaning.
struct PipelineResult {
  std::vector<LogEntry> entries;  // kept entries in joint-log order
  UserAssignment users;
  std::vector<SessionHistory> sessions;
  std::vector<SourceSummary> sources;
  AggregateReport report;
};

// Parse -> merge -> clean -> identify -> sessionize -> summarize. Each file is
// streamed twice (robot pairs first, then filtering) so only kept entries are
// ever held. Throws IoError, FormatDetectionError, ConfigError, or
// InvariantError when the result fails its consistency checks.
PipelineResult process(const PipelineConfig& config);

// Consistency checks between the stages' outputs; throws InvariantError.
void check_invariants(const PipelineResult& result);

struct RunSummary {
  std::uint64_t input_entries = 0;
  std::uint64_t kept_entries = 0;
  std::uint64_t malformed_lines = 0;
  double reduction_percent = 0.0;
  std::uint64_t users = 0;
  std::uint64_t sessions = 0;
};

// process() plus the bundle write. An output directory created by this call
// is removed again if the run fails.
RunSummary run_pipeline(const PipelineConfig& config);

void print_summary(std::ostream& out, const PipelineConfig& config, const RunSummary& summary);

}  // namespace weblog
