#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "weblog/logmodel.hpp"

namespace weblog {

enum class MalformedReason { BadFieldCount, BadDate, BadStatus, BadRequestLine, Empty };

std::string_view to_string(MalformedReason reason);

struct Malformed {
  std::uint64_t line_number = 0;
  MalformedReason reason = MalformedReason::Empty;

  bool operator==(const Malformed&) const = default;
};

using ParseOutcome = std::variant<LogEntry, Malformed>;

struct ParseStats {
  std::uint64_t total_lines = 0;
  std::uint64_t parsed = 0;
  std::uint64_t malformed = 0;
  LogFormat detected_format = LogFormat::Clf;
};

inline constexpr std::size_t kMaxLineBytes = 64 * 1024;
inline constexpr std::size_t kDetectionSampleLines = 100;

// ECLF iff a strict majority of the well-formed sample lines carry the
// referrer and agent fields. Throws FormatDetectionError when no sample line
// is well-formed in either layout.
LogFormat detect_format(std::span<const std::string> sample_lines);

// Never throws on bad input; grammar violations come back as Malformed.
// A trailing '\r' is ignored.
ParseOutcome parse_line(std::string_view line, LogFormat format, const LogSource& source,
                        std::uint64_t line_number);

// Canonical single-line rendering. The timestamp is re-rendered in the
// entry's original offset, shifted back by clock_skew_seconds so that parsing
// with the same source skew reproduces the entry.
std::string serialize_entry(const LogEntry& entry, LogFormat format,
                            std::int64_t clock_skew_seconds = 0);

// Parses a batch of consecutive lines; element i is line first_line_number + i.
// OpenMP-parallel over lines.
std::vector<ParseOutcome> parse_lines(std::span<const std::string> lines,
                                      std::uint64_t first_line_number, LogFormat format,
                                      const LogSource& source);

namespace serial {
std::vector<ParseOutcome> parse_lines(std::span<const std::string> lines,
                                      std::uint64_t first_line_number, LogFormat format,
                                      const LogSource& source);
}  // namespace serial

// Reads LF or CRLF lines with a per-line cap: the stored text of a line
// longer than kMaxLineBytes is dropped and the line is flagged oversized.
class LineReader {
 public:
  explicit LineReader(const std::string& path);

  bool next(std::string& line, bool& oversized);

 private:
  bool fill();

  std::ifstream in_;
  std::vector<char> buffer_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
  bool eof_ = false;
};

// Streaming parser for one source: memory stays bounded by the batch size no
// matter how large the file is. Format AUTO is resolved from the first
// kDetectionSampleLines lines when the reader is opened.
class LogReader {
 public:
  static constexpr std::size_t kDefaultBatchLines = 4096;

  // Throws IoError when the file cannot be opened and FormatDetectionError
  // when AUTO detection fails.
  explicit LogReader(const LogSource& source, std::size_t batch_lines = kDefaultBatchLines);

  LogFormat format() const { return format_; }
  const ParseStats& stats() const { return stats_; }
  const LogSource& source() const { return source_; }

  // Replaces `out` with the well-formed entries of the next batch. Returns
  // false once the file is exhausted (out is then empty).
  bool next_batch(std::vector<LogEntry>& out);

 private:
  bool read_line(std::string& line, bool& oversized);

  LogSource source_;
  LogFormat format_ = LogFormat::Clf;
  std::size_t batch_lines_;
  std::unique_ptr<LineReader> reader_;
  std::vector<std::string> pending_;
  std::vector<bool> pending_oversized_;
  std::size_t pending_pos_ = 0;
  std::uint64_t next_line_number_ = 1;
  ParseStats stats_;
};

struct ParsedFile {
  std::vector<LogEntry> entries;
  ParseStats stats;
};

// Whole-file convenience over LogReader; entries in file order.
ParsedFile parse_file(const LogSource& source);

}  // namespace weblog
