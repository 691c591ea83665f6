#include "weblog/logmodel.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>

namespace weblog {

using namespace std::chrono;

std::string_view to_string(LogFormat format) {
  switch (format) {
    case LogFormat::Clf:
      return "CLF";
    case LogFormat::Eclf:
      return "ECLF";
    case LogFormat::Auto:
      return "AUTO";
  }
  return "AUTO";
}

std::optional<LogFormat> parse_log_format(std::string_view text) {
  const std::string t = to_lower(text);
  if (t == "clf") return LogFormat::Clf;
  if (t == "eclf") return LogFormat::Eclf;
  if (t == "auto") return LogFormat::Auto;
  return std::nullopt;
}

Method Method::from_text(std::string_view verb) {
  if (verb == "GET") return {MethodKind::Get, {}};
  if (verb == "POST") return {MethodKind::Post, {}};
  if (verb == "HEAD") return {MethodKind::Head, {}};
  return {MethodKind::Other, std::string(verb)};
}

std::string_view Method::text() const {
  switch (kind) {
    case MethodKind::Get:
      return "GET";
    case MethodKind::Post:
      return "POST";
    case MethodKind::Head:
      return "HEAD";
    case MethodKind::Other:
      return other;
  }
  return other;
}

std::string LogEntry::target() const {
  if (!query) return path;
  std::string t;
  t.reserve(path.size() + 1 + query->size());
  t.append(path).push_back('?');
  t.append(*query);
  return t;
}

std::string_view to_string(ResourceClass cls) {
  switch (cls) {
    case ResourceClass::Page:
      return "PAGE";
    case ResourceClass::Image:
      return "IMAGE";
    case ResourceClass::Multimedia:
      return "MULTIMEDIA";
    case ResourceClass::Style:
      return "STYLE";
    case ResourceClass::Script:
      return "SCRIPT";
    case ResourceClass::RobotFile:
      return "ROBOT_FILE";
    case ResourceClass::Other:
      return "OTHER";
  }
  return "OTHER";
}

std::optional<ResourceClass> parse_resource_class(std::string_view text) {
  static constexpr std::array kAll = {ResourceClass::Page,   ResourceClass::Image,
                                      ResourceClass::Multimedia, ResourceClass::Style,
                                      ResourceClass::Script, ResourceClass::RobotFile,
                                      ResourceClass::Other};
  for (ResourceClass c : kAll) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

const ExtensionTable& ExtensionTable::defaults() {
  static const ExtensionTable table{
      {"gif", "jpg", "jpeg", "png", "bmp", "ico", "tif", "tiff", "svg", "webp"},
      {"mp3", "mp4", "avi", "mpg", "mpeg", "mov", "wav", "swf", "flv"},
      {"css"},
      {"js"},
      {},
  };
  return table;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

ResourceClass classify_resource(std::string_view path) {
  return classify_resource(path, ExtensionTable::defaults());
}

ResourceClass classify_resource(std::string_view path, const ExtensionTable& table) {
  path = path.substr(0, path.find_first_of("?#"));
  if (iequals(path, "/robots.txt")) return ResourceClass::RobotFile;

  const std::size_t slash = path.rfind('/');
  const std::string_view name = slash == std::string_view::npos ? path : path.substr(slash + 1);
  const std::size_t dot = name.rfind('.');
  if (dot == std::string_view::npos) return ResourceClass::Page;
  const std::string ext = to_lower(name.substr(dot + 1));

  if (table.image.contains(ext)) return ResourceClass::Image;
  if (table.multimedia.contains(ext)) return ResourceClass::Multimedia;
  if (table.style.contains(ext)) return ResourceClass::Style;
  if (table.script.contains(ext)) return ResourceClass::Script;
  if (table.other.contains(ext)) return ResourceClass::Other;
  return ResourceClass::Page;
}

std::optional<Instant> normalize_time(const LocalDateTime& local_time, int offset_minutes,
                                      std::int64_t clock_skew_seconds) {
  const year_month_day date{year{local_time.year}, month{local_time.month},
                            day{local_time.day}};
  if (!date.ok()) return std::nullopt;
  if (local_time.hour > 23 || local_time.minute > 59 || local_time.second > 59) {
    return std::nullopt;
  }
  if (offset_minutes < -1440 || offset_minutes > 1440) return std::nullopt;

  const sys_seconds local = sys_days{date} + hours{local_time.hour} +
                            minutes{local_time.minute} + seconds{local_time.second};
  return local - minutes{offset_minutes} - seconds{clock_skew_seconds};
}

std::string format_iso8601(Instant t) {
  const sys_days day_point = floor<days>(t);
  const year_month_day date{day_point};
  const hh_mm_ss<seconds> tod{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

std::optional<Instant> parse_iso8601(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SSZ
  if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
      text[13] != ':' || text[16] != ':' || text[19] != 'Z') {
    return std::nullopt;
  }
  auto field = [&](std::size_t pos, std::size_t len, auto& out) {
    const char* first = text.data() + pos;
    const auto [ptr, ec] = std::from_chars(first, first + len, out);
    return ec == std::errc{} && ptr == first + len;
  };
  LocalDateTime dt;
  if (!field(0, 4, dt.year) || !field(5, 2, dt.month) || !field(8, 2, dt.day) ||
      !field(11, 2, dt.hour) || !field(14, 2, dt.minute) || !field(17, 2, dt.second)) {
    return std::nullopt;
  }
  return normalize_time(dt, 0, 0);
}

std::string format_offset(int offset_minutes) {
  const char sign = offset_minutes < 0 ? '-' : '+';
  const int magnitude = offset_minutes < 0 ? -offset_minutes : offset_minutes;
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%02d%02d", sign, magnitude / 60, magnitude % 60);
  return buf;
}

}  // namespace weblog
