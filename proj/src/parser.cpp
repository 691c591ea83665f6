#include "weblog/parser.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>

#include "weblog/error.hpp"

namespace weblog {

std::string_view to_string(MalformedReason reason) {
  switch (reason) {
    case MalformedReason::BadFieldCount:
      return "BAD_FIELD_COUNT";
    case MalformedReason::BadDate:
      return "BAD_DATE";
    case MalformedReason::BadStatus:
      return "BAD_STATUS";
    case MalformedReason::BadRequestLine:
      return "BAD_REQUEST_LINE";
    case MalformedReason::Empty:
      return "EMPTY";
  }
  return "EMPTY";
}

namespace {

constexpr std::array<std::string_view, 12> kMonths = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                      "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

bool is_space(char c) { return c == ' ' || c == '\t'; }

template <typename T>
bool parse_number(std::string_view text, T& out) {
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

bool all_digits(std::string_view text) {
  return !text.empty() && std::all_of(text.begin(), text.end(),
                                      [](char c) { return c >= '0' && c <= '9'; });
}

// "18/Jun/2006:12:28:33 +0000"
bool parse_clf_date(std::string_view text, LocalDateTime& dt, int& offset_minutes) {
  if (text.size() != 26 || text[2] != '/' || text[6] != '/' || text[11] != ':' ||
      text[14] != ':' || text[17] != ':' || text[20] != ' ') {
    return false;
  }
  const auto month = std::find(kMonths.begin(), kMonths.end(), text.substr(3, 3));
  if (month == kMonths.end()) return false;
  dt.month = static_cast<unsigned>(month - kMonths.begin()) + 1;

  const std::string_view day = text.substr(0, 2), year = text.substr(7, 4),
                         hour = text.substr(12, 2), minute = text.substr(15, 2),
                         second = text.substr(18, 2), zone = text.substr(22, 4);
  for (std::string_view part : {day, year, hour, minute, second, zone}) {
    if (!all_digits(part)) return false;
  }
  if (text[21] != '+' && text[21] != '-') return false;
  parse_number(day, dt.day);
  parse_number(year, dt.year);
  parse_number(hour, dt.hour);
  parse_number(minute, dt.minute);
  parse_number(second, dt.second);
  int zh = 0, zm = 0;
  parse_number(zone.substr(0, 2), zh);
  parse_number(zone.substr(2, 2), zm);
  if (zm > 59) return false;
  offset_minutes = (text[21] == '-' ? -1 : 1) * (zh * 60 + zm);
  return true;
}

// Cursor over one log line.
class Fields {
 public:
  explicit Fields(std::string_view line) : line_(line) {}

  void skip_space() {
    while (pos_ < line_.size() && is_space(line_[pos_])) ++pos_;
  }

  bool at_end() {
    skip_space();
    return pos_ >= line_.size();
  }

  char peek() {
    skip_space();
    return pos_ < line_.size() ? line_[pos_] : '\0';
  }

  std::optional<std::string_view> token() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < line_.size() && !is_space(line_[pos_])) ++pos_;
    if (pos_ == start) return std::nullopt;
    return line_.substr(start, pos_ - start);
  }

  // [ ... ] without the brackets.
  std::optional<std::string_view> bracketed() {
    if (peek() != '[') return std::nullopt;
    const std::size_t close = line_.find(']', pos_ + 1);
    if (close == std::string_view::npos) return std::nullopt;
    const std::string_view inside = line_.substr(pos_ + 1, close - pos_ - 1);
    pos_ = close + 1;
    return inside;
  }

  // "..." with backslash escapes decoded: \" and \\ collapse, any other
  // backslash pair is kept verbatim.
  std::optional<std::string> quoted() {
    if (peek() != '"') return std::nullopt;
    std::string out;
    for (std::size_t i = pos_ + 1; i < line_.size(); ++i) {
      const char c = line_[i];
      if (c == '\\' && i + 1 < line_.size()) {
        const char next = line_[i + 1];
        if (next == '"' || next == '\\') {
          out.push_back(next);
        } else {
          out.push_back(c);
          out.push_back(next);
        }
        ++i;
      } else if (c == '"') {
        pos_ = i + 1;
        return out;
      } else {
        out.push_back(c);
      }
    }
    return std::nullopt;
  }

 private:
  std::string_view line_;
  std::size_t pos_ = 0;
};

std::optional<std::string> dash_to_absent(std::string value) {
  if (value == "-") return std::nullopt;
  return value;
}

std::vector<std::string_view> split_request(std::string_view request) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < request.size()) {
    while (i < request.size() && request[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < request.size() && request[i] != ' ') ++i;
    if (i > start) parts.push_back(request.substr(start, i - start));
  }
  return parts;
}

void append_quoted(std::string& out, std::string_view value) {
  out.push_back('"');
  for (char c : value) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

ParseOutcome parse_line(std::string_view line, LogFormat format, const LogSource& source,
                        std::uint64_t line_number) {
  auto malformed = [&](MalformedReason reason) -> ParseOutcome {
    return Malformed{line_number, reason};
  };
  while (!line.empty() && (line.back() == '\r' || is_space(line.back()))) line.remove_suffix(1);
  if (line.empty() || std::all_of(line.begin(), line.end(), is_space)) {
    return malformed(MalformedReason::Empty);
  }
  if (line.size() > kMaxLineBytes) return malformed(MalformedReason::BadFieldCount);

  Fields fields(line);
  const auto host = fields.token();
  const auto identd = fields.token();
  if (!host || !identd || fields.peek() == '[') return malformed(MalformedReason::BadFieldCount);
  const auto auth = fields.token();
  if (!auth) return malformed(MalformedReason::BadFieldCount);
  const auto date = fields.bracketed();
  if (!date) return malformed(MalformedReason::BadFieldCount);
  const auto request = fields.quoted();
  if (!request) return malformed(MalformedReason::BadFieldCount);
  const auto status_text = fields.token();
  const auto bytes_text = fields.token();
  if (!status_text || !bytes_text) return malformed(MalformedReason::BadFieldCount);

  std::optional<std::string> referrer;
  std::optional<std::string> agent;
  if (format == LogFormat::Eclf) {
    auto ref = fields.quoted();
    if (!ref) return malformed(MalformedReason::BadFieldCount);
    auto ua = fields.quoted();
    if (!ua) return malformed(MalformedReason::BadFieldCount);
    referrer = dash_to_absent(std::move(*ref));
    agent = dash_to_absent(std::move(*ua));
  }
  if (!fields.at_end()) return malformed(MalformedReason::BadFieldCount);

  LocalDateTime local;
  int offset = 0;
  if (!parse_clf_date(*date, local, offset)) return malformed(MalformedReason::BadDate);
  const auto utc = normalize_time(local, offset, source.clock_skew_seconds);
  if (!utc) return malformed(MalformedReason::BadDate);

  const std::vector<std::string_view> parts = split_request(*request);
  if (parts.size() != 3) return malformed(MalformedReason::BadRequestLine);
  const std::string_view target = parts[1];
  const std::size_t question = target.find('?');
  if (question == 0) return malformed(MalformedReason::BadRequestLine);

  int status = 0;
  if (status_text->size() != 3 || !parse_number(*status_text, status) || status < 100 ||
      status > 599) {
    return malformed(MalformedReason::BadStatus);
  }

  std::optional<std::uint64_t> bytes;
  if (*bytes_text != "-") {
    std::uint64_t value = 0;
    if (!all_digits(*bytes_text) || !parse_number(*bytes_text, value)) {
      return malformed(MalformedReason::BadFieldCount);
    }
    bytes = value;
  }

  LogEntry entry;
  entry.server_name = source.server_name;
  entry.remote_host = std::string(*host);
  entry.identd = std::string(*identd);
  entry.auth_login = dash_to_absent(std::string(*auth));
  entry.timestamp_utc = *utc;
  entry.original_offset_minutes = offset;
  entry.method = Method::from_text(parts[0]);
  if (question == std::string_view::npos) {
    entry.path = std::string(target);
  } else {
    entry.path = std::string(target.substr(0, question));
    entry.query = std::string(target.substr(question + 1));
  }
  entry.protocol = std::string(parts[2]);
  entry.status = status;
  entry.bytes = bytes;
  entry.referrer = std::move(referrer);
  entry.user_agent = std::move(agent);
  entry.line_number = line_number;
  entry.format = format == LogFormat::Eclf ? LogFormat::Eclf : LogFormat::Clf;
  return entry;
}

std::string serialize_entry(const LogEntry& entry, LogFormat format,
                            std::int64_t clock_skew_seconds) {
  using namespace std::chrono;
  const sys_seconds local = entry.timestamp_utc + minutes{entry.original_offset_minutes} +
                            seconds{clock_skew_seconds};
  const sys_days day_point = floor<days>(local);
  const year_month_day date{day_point};
  const hh_mm_ss<seconds> tod{local - day_point};

  char date_buf[48];
  std::snprintf(date_buf, sizeof date_buf, "[%02u/%s/%04d:%02d:%02d:%02d %s]",
                static_cast<unsigned>(date.day()),
                kMonths[static_cast<unsigned>(date.month()) - 1].data(),
                static_cast<int>(date.year()), static_cast<int>(tod.hours().count()),
                static_cast<int>(tod.minutes().count()), static_cast<int>(tod.seconds().count()),
                format_offset(entry.original_offset_minutes).c_str());

  std::string out;
  out.reserve(128 + entry.path.size() + (entry.user_agent ? entry.user_agent->size() : 0) +
              (entry.referrer ? entry.referrer->size() : 0));
  out.append(entry.remote_host).push_back(' ');
  out.append(entry.identd).push_back(' ');
  out.append(entry.auth_login ? *entry.auth_login : "-").push_back(' ');
  out.append(date_buf).push_back(' ');

  std::string request(entry.method.text());
  request.push_back(' ');
  request.append(entry.target()).push_back(' ');
  request.append(entry.protocol);
  append_quoted(out, request);

  out.push_back(' ');
  out.append(std::to_string(entry.status)).push_back(' ');
  out.append(entry.bytes ? std::to_string(*entry.bytes) : "-");

  if (format == LogFormat::Eclf) {
    out.push_back(' ');
    append_quoted(out, entry.referrer ? *entry.referrer : "-");
    out.push_back(' ');
    append_quoted(out, entry.user_agent ? *entry.user_agent : "-");
  }
  return out;
}

LogFormat detect_format(std::span<const std::string> sample_lines) {
  const LogSource probe{};
  std::size_t eclf = 0;
  std::size_t clf = 0;
  for (const std::string& line : sample_lines.first(std::min(sample_lines.size(),
                                                             kDetectionSampleLines))) {
    if (std::holds_alternative<LogEntry>(parse_line(line, LogFormat::Eclf, probe, 1))) {
      ++eclf;
    } else if (std::holds_alternative<LogEntry>(parse_line(line, LogFormat::Clf, probe, 1))) {
      ++clf;
    }
  }
  if (eclf + clf == 0) {
    throw FormatDetectionError("no well-formed CLF or ECLF line in the detection sample");
  }
  return eclf * 2 > eclf + clf ? LogFormat::Eclf : LogFormat::Clf;
}

std::vector<ParseOutcome> parse_lines(std::span<const std::string> lines,
                                      std::uint64_t first_line_number, LogFormat format,
                                      const LogSource& source) {
  std::vector<ParseOutcome> out(lines.size());
  const auto n = static_cast<std::ptrdiff_t>(lines.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = parse_line(lines[i], format, source, first_line_number + i);
  }
  return out;
}

namespace serial {

std::vector<ParseOutcome> parse_lines(std::span<const std::string> lines,
                                      std::uint64_t first_line_number, LogFormat format,
                                      const LogSource& source) {
  std::vector<ParseOutcome> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out.push_back(parse_line(lines[i], format, source, first_line_number + i));
  }
  return out;
}

}  // namespace serial

LineReader::LineReader(const std::string& path)
    : in_(path, std::ios::binary), buffer_(1 << 20) {
  if (!in_) throw IoError("cannot open log file '" + path + "'");
}

bool LineReader::fill() {
  if (eof_) return false;
  in_.read(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  end_ = static_cast<std::size_t>(in_.gcount());
  pos_ = 0;
  if (in_.bad()) throw IoError("read error");
  if (end_ == 0) {
    eof_ = true;
    return false;
  }
  return true;
}

bool LineReader::next(std::string& line, bool& oversized) {
  line.clear();
  oversized = false;
  bool started = false;
  for (;;) {
    if (pos_ == end_ && !fill()) break;
    started = true;
    const char* begin = buffer_.data() + pos_;
    const char* stop = buffer_.data() + end_;
    const char* newline = std::find(begin, stop, '\n');
    const std::size_t len = static_cast<std::size_t>(newline - begin);
    if (!oversized) {
      if (line.size() + len > kMaxLineBytes + 1) {
        oversized = true;
        line.clear();
      } else {
        line.append(begin, len);
      }
    }
    if (newline != stop) {
      pos_ += len + 1;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.size() > kMaxLineBytes) {
        oversized = true;
        line.clear();
      }
      return true;
    }
    pos_ = end_;
  }
  if (!started) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() > kMaxLineBytes) {
    oversized = true;
    line.clear();
  }
  return true;
}

LogReader::LogReader(const LogSource& source, std::size_t batch_lines)
    : source_(source),
      batch_lines_(std::max<std::size_t>(batch_lines, 1)),
      reader_(std::make_unique<LineReader>(source.file_path)) {
  if (source.format != LogFormat::Auto) {
    format_ = source.format;
  } else {
    std::string line;
    bool oversized = false;
    while (pending_.size() < kDetectionSampleLines && reader_->next(line, oversized)) {
      pending_.push_back(line);
      pending_oversized_.push_back(oversized);
    }
    std::vector<std::string> sample;
    for (std::size_t i = 0; i < pending_.size(); ++i) {
      const std::string& l = pending_[i];
      const bool blank = std::all_of(l.begin(), l.end(),
                                     [](char c) { return is_space(c) || c == '\r'; });
      if (!pending_oversized_[i] && !blank) sample.push_back(l);
    }
    if (sample.empty()) {
      format_ = LogFormat::Clf;
    } else {
      try {
        format_ = detect_format(sample);
      } catch (const FormatDetectionError& e) {
        throw FormatDetectionError("source '" + source.server_name + "' (" + source.file_path +
                                   "): " + e.what());
      }
    }
  }
  source_.format = format_;
  stats_.detected_format = format_;
}

bool LogReader::read_line(std::string& line, bool& oversized) {
  if (pending_pos_ < pending_.size()) {
    line = std::move(pending_[pending_pos_]);
    oversized = pending_oversized_[pending_pos_];
    if (++pending_pos_ == pending_.size()) {
      pending_.clear();
      pending_.shrink_to_fit();
      pending_oversized_.clear();
      pending_pos_ = 0;
    }
    return true;
  }
  return reader_->next(line, oversized);
}

bool LogReader::next_batch(std::vector<LogEntry>& out) {
  out.clear();
  std::vector<std::string> lines;
  std::vector<std::size_t> oversized_at;
  lines.reserve(batch_lines_);
  std::string line;
  bool oversized = false;
  while (lines.size() < batch_lines_ && read_line(line, oversized)) {
    if (oversized) oversized_at.push_back(lines.size());
    lines.push_back(std::move(line));
  }
  if (lines.empty()) return false;

  std::vector<ParseOutcome> outcomes = parse_lines(lines, next_line_number_, format_, source_);
  for (std::size_t i : oversized_at) {
    outcomes[i] = Malformed{next_line_number_ + i, MalformedReason::BadFieldCount};
  }
  next_line_number_ += lines.size();
  stats_.total_lines += lines.size();
  for (ParseOutcome& outcome : outcomes) {
    if (auto* entry = std::get_if<LogEntry>(&outcome)) {
      out.push_back(std::move(*entry));
      ++stats_.parsed;
    } else {
      ++stats_.malformed;
    }
  }
  return true;
}

ParsedFile parse_file(const LogSource& source) {
  LogReader reader(source);
  ParsedFile result;
  std::vector<LogEntry> batch;
  while (reader.next_batch(batch)) {
    std::move(batch.begin(), batch.end(), std::back_inserter(result.entries));
  }
  result.stats = reader.stats();
  return result;
}

}  // namespace weblog
