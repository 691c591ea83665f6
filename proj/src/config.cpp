#include "weblog/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

#include "weblog/error.hpp"

namespace weblog {

namespace fs = std::filesystem;

namespace {

// Minimal TOML subset: [table], [[sources]], key = value with basic and
// literal strings, integers, booleans and arrays of strings.
using Value = std::variant<std::string, long long, bool, std::vector<std::string>>;

struct Item {
  Value value;
  int line = 0;
};

using Table = std::map<std::string, Item, std::less<>>;

struct Document {
  Table root;
  std::map<std::string, Table, std::less<>> tables;
  std::vector<std::pair<int, Table>> sources;
};

class TomlReader {
 public:
  TomlReader(std::string_view text, std::vector<std::string>& errors)
      : text_(text), errors_(errors) {}

  Document read() {
    Document doc;
    Table* current = &doc.root;
    std::string pending;
    int pending_line = 0;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      std::size_t eol = text_.find('\n', pos);
      if (eol == std::string_view::npos) eol = text_.size();
      std::string line(text_.substr(pos, eol - pos));
      pos = eol + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      line = strip_comment(line);

      if (!pending.empty()) {
        pending += ' ';
        pending += line;
        if (!brackets_closed(pending)) continue;
        parse_assignment(pending, pending_line, *current);
        pending.clear();
        continue;
      }

      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      if (trimmed.starts_with("[[")) {
        if (!trimmed.ends_with("]]")) {
          error(line_no, "malformed array-table header");
          continue;
        }
        const std::string name = trim(trimmed.substr(2, trimmed.size() - 4));
        if (name != "sources") {
          error(line_no, "unknown array table [[" + name + "]]");
          current = &scratch_;
          scratch_.clear();
          continue;
        }
        doc.sources.emplace_back(line_no, Table{});
        current = &doc.sources.back().second;
      } else if (trimmed.starts_with("[")) {
        if (!trimmed.ends_with("]")) {
          error(line_no, "malformed table header");
          continue;
        }
        const std::string name = trim(trimmed.substr(1, trimmed.size() - 2));
        if (doc.tables.contains(name)) error(line_no, "table [" + name + "] defined twice");
        current = &doc.tables[name];
      } else if (!brackets_closed(trimmed)) {
        pending = trimmed;
        pending_line = line_no;
      } else {
        parse_assignment(trimmed, line_no, *current);
      }
    }
    if (!pending.empty()) error(pending_line, "unterminated array");
    return doc;
  }

 private:
  void error(int line, const std::string& message) {
    errors_.push_back("line " + std::to_string(line) + ": " + message);
  }

  static std::string trim(std::string_view s) {
    const std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const std::size_t e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
  }

  static std::string strip_comment(const std::string& line) {
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quote) {
        if (c == '\\' && quote == '"') {
          ++i;
        } else if (c == quote) {
          quote = 0;
        }
      } else if (c == '"' || c == '\'') {
        quote = c;
      } else if (c == '#') {
        return line.substr(0, i);
      }
    }
    return line;
  }

  static bool brackets_closed(std::string_view s) {
    int depth = 0;
    char quote = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const char c = s[i];
      if (quote) {
        if (c == '\\' && quote == '"') {
          ++i;
        } else if (c == quote) {
          quote = 0;
        }
      } else if (c == '"' || c == '\'') {
        quote = c;
      } else if (c == '[') {
        ++depth;
      } else if (c == ']') {
        --depth;
      }
    }
    // Only an assignment's value can open a multi-line array.
    const std::size_t eq = s.find('=');
    return depth <= 0 || eq == std::string_view::npos;
  }

  void parse_assignment(std::string_view text, int line, Table& table) {
    const std::size_t eq = text.find('=');
    if (eq == std::string_view::npos) {
      error(line, "expected key = value");
      return;
    }
    const std::string key = trim(text.substr(0, eq));
    if (key.empty() || key.find_first_not_of("abcdefghijklmnopqrstuvwxyz"
                                             "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
                           std::string::npos) {
      error(line, "invalid key '" + key + "'");
      return;
    }
    std::string_view rest = text.substr(eq + 1);
    std::size_t pos = 0;
    auto value = parse_value(rest, pos, line);
    if (!value) return;
    if (!trim(rest.substr(pos)).empty()) {
      error(line, "unexpected text after value of '" + key + "'");
      return;
    }
    if (table.contains(key)) {
      error(line, "duplicate key '" + key + "'");
      return;
    }
    table.emplace(key, Item{std::move(*value), line});
  }

  static void skip_ws(std::string_view s, std::size_t& pos) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }

  std::optional<std::string> parse_string(std::string_view s, std::size_t& pos, int line) {
    const char quote = s[pos++];
    std::string out;
    while (pos < s.size()) {
      const char c = s[pos++];
      if (c == quote) return out;
      if (c == '\\' && quote == '"') {
        if (pos >= s.size()) break;
        const char esc = s[pos++];
        switch (esc) {
          case 'n':
            out.push_back('\n');
            break;
          case 't':
            out.push_back('\t');
            break;
          case '"':
          case '\\':
            out.push_back(esc);
            break;
          default:
            error(line, std::string("unsupported escape \\") + esc);
            return std::nullopt;
        }
      } else {
        out.push_back(c);
      }
    }
    error(line, "unterminated string");
    return std::nullopt;
  }

  std::optional<Value> parse_value(std::string_view s, std::size_t& pos, int line) {
    skip_ws(s, pos);
    if (pos >= s.size()) {
      error(line, "missing value");
      return std::nullopt;
    }
    const char c = s[pos];
    if (c == '"' || c == '\'') {
      auto str = parse_string(s, pos, line);
      if (!str) return std::nullopt;
      return Value{std::move(*str)};
    }
    if (c == '[') {
      ++pos;
      std::vector<std::string> items;
      for (;;) {
        skip_ws(s, pos);
        if (pos >= s.size()) {
          error(line, "unterminated array");
          return std::nullopt;
        }
        if (s[pos] == ']') {
          ++pos;
          return Value{std::move(items)};
        }
        if (s[pos] != '"' && s[pos] != '\'') {
          error(line, "arrays may only hold strings");
          return std::nullopt;
        }
        auto str = parse_string(s, pos, line);
        if (!str) return std::nullopt;
        items.push_back(std::move(*str));
        skip_ws(s, pos);
        if (pos < s.size() && s[pos] == ',') ++pos;
      }
    }
    std::size_t end = pos;
    while (end < s.size() && s[end] != ' ' && s[end] != '\t') ++end;
    const std::string_view word = s.substr(pos, end - pos);
    pos = end;
    if (word == "true") return Value{true};
    if (word == "false") return Value{false};
    long long number = 0;
    const char* first = word.data() + (word.starts_with('+') ? 1 : 0);
    const auto [ptr, ec] = std::from_chars(first, word.data() + word.size(), number);
    if (ec == std::errc{} && ptr == word.data() + word.size() && first != ptr) {
      return Value{number};
    }
    error(line, "invalid value '" + std::string(word) + "'");
    return std::nullopt;
  }

  std::string_view text_;
  std::vector<std::string>& errors_;
  Table scratch_;
};

// Typed access to a table with unknown-key detection.
class TableView {
 public:
  TableView(const Table& table, std::string where, std::vector<std::string>& errors)
      : table_(table), where_(std::move(where)), errors_(errors) {}

  template <typename T>
  std::optional<T> get(std::string_view key) {
    seen_.insert(std::string(key));
    const auto it = table_.find(key);
    if (it == table_.end()) return std::nullopt;
    if (const T* v = std::get_if<T>(&it->second.value)) return *v;
    errors_.push_back("line " + std::to_string(it->second.line) + ": " + where_ + "." +
                      std::string(key) + " has the wrong type (expected " + type_name<T>() +
                      ")");
    return std::nullopt;
  }

  int line_of(std::string_view key) const {
    const auto it = table_.find(key);
    return it == table_.end() ? 0 : it->second.line;
  }

  void report_unknown() {
    for (const auto& [key, item] : table_) {
      if (!seen_.contains(key)) {
        errors_.push_back("line " + std::to_string(item.line) + ": unknown key " + where_ +
                          "." + key);
      }
    }
  }

 private:
  template <typename T>
  static std::string type_name() {
    if constexpr (std::is_same_v<T, std::string>) return "string";
    if constexpr (std::is_same_v<T, long long>) return "integer";
    if constexpr (std::is_same_v<T, bool>) return "boolean";
    return "array of strings";
  }

  const Table& table_;
  std::string where_;
  std::vector<std::string>& errors_;
  std::set<std::string, std::less<>> seen_;
};

fs::path resolve(const fs::path& base, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute() || base.empty()) return p;
  return base / p;
}

void apply_document(const Document& doc, const fs::path& base, PipelineConfig& config,
                    std::vector<std::string>& errors) {
  TableView root(doc.root, "root", errors);
  if (auto dir = root.get<std::string>("output_dir")) config.output_dir = resolve(base, *dir);
  if (auto policy = root.get<std::string>("identity_policy")) {
    if (auto p = parse_identity_policy(*policy)) {
      config.identity_policy = *p;
    } else {
      errors.push_back("line " + std::to_string(root.line_of("identity_policy")) +
                       ": unknown identity_policy '" + *policy + "'");
    }
  }
  if (auto grans = root.get<std::vector<std::string>>("granularities")) {
    config.granularities.clear();
    for (const std::string& g : *grans) {
      if (auto parsed = parse_granularity(g)) {
        config.granularities.insert(*parsed);
      } else {
        errors.push_back("line " + std::to_string(root.line_of("granularities")) +
                         ": unknown granularity '" + g + "'");
      }
    }
  }
  root.report_unknown();

  for (const auto& [name, table] : doc.tables) {
    if (name != "cleaning" && name != "sessionizer" && name != "classification") {
      errors.push_back("unknown table [" + name + "]");
    }
  }

  if (auto it = doc.tables.find("cleaning"); it != doc.tables.end()) {
    TableView t(it->second, "cleaning", errors);
    CleaningConfig& c = config.cleaning;
    if (auto classes = t.get<std::vector<std::string>>("remove_classes")) {
      c.remove_classes.clear();
      for (const std::string& name : *classes) {
        if (auto cls = parse_resource_class(name)) {
          c.remove_classes.insert(*cls);
        } else {
          errors.push_back("line " + std::to_string(t.line_of("remove_classes")) +
                           ": unknown resource class '" + name + "'");
        }
      }
    }
    if (auto policy = t.get<std::string>("status_policy")) {
      if (auto p = parse_status_policy(*policy)) {
        c.status_policy = *p;
      } else {
        errors.push_back("line " + std::to_string(t.line_of("status_policy")) +
                         ": unknown status_policy '" + *policy + "'");
      }
    }
    if (auto subs = t.get<std::vector<std::string>>("robot_agent_substrings")) {
      c.robot_agent_substrings = *subs;
    }
    if (auto rule = t.get<bool>("robots_txt_rule")) c.robots_txt_rule = *rule;
    if (auto methods = t.get<std::vector<std::string>>("methods_kept")) c.methods_kept = *methods;
    t.report_unknown();
  }

  if (auto it = doc.tables.find("classification"); it != doc.tables.end()) {
    TableView t(it->second, "classification", errors);
    ExtensionTable& ext = config.cleaning.extensions;
    auto load = [&](std::string_view key, std::set<std::string, std::less<>>& target) {
      if (auto list = t.get<std::vector<std::string>>(key)) {
        target.clear();
        for (const std::string& e : *list) {
          std::string norm = to_lower(e);
          if (norm.starts_with('.')) norm.erase(0, 1);
          target.insert(std::move(norm));
        }
      }
    };
    load("image", ext.image);
    load("multimedia", ext.multimedia);
    load("style", ext.style);
    load("script", ext.script);
    load("other", ext.other);
    t.report_unknown();
  }

  if (auto it = doc.tables.find("sessionizer"); it != doc.tables.end()) {
    TableView t(it->second, "sessionizer", errors);
    if (auto minutes = t.get<long long>("timeout_minutes")) {
      config.sessionizer.timeout = std::chrono::minutes{*minutes};
    }
    if (auto mode = t.get<std::string>("referrer_mode")) {
      if (auto m = parse_referrer_mode(*mode)) {
        config.sessionizer.referrer_mode = *m;
      } else {
        errors.push_back("line " + std::to_string(t.line_of("referrer_mode")) +
                         ": unknown referrer_mode '" + *mode + "'");
      }
    }
    t.report_unknown();
  }

  for (const auto& [line, table] : doc.sources) {
    TableView t(table, "sources", errors);
    LogSource source;
    const auto name = t.get<std::string>("name");
    const auto path = t.get<std::string>("path");
    if (!name) errors.push_back("line " + std::to_string(line) + ": source without a name");
    if (!path) errors.push_back("line " + std::to_string(line) + ": source without a path");
    if (name) source.server_name = *name;
    if (path) source.file_path = resolve(base, *path).string();
    if (auto format = t.get<std::string>("format")) {
      if (auto f = parse_log_format(*format)) {
        source.format = *f;
      } else {
        errors.push_back("line " + std::to_string(t.line_of("format")) + ": unknown format '" +
                         *format + "'");
      }
    }
    if (auto skew = t.get<long long>("clock_skew_seconds")) source.clock_skew_seconds = *skew;
    t.report_unknown();
    config.sources.push_back(std::move(source));
  }
}

}  // namespace

std::optional<LogSource> parse_source_spec(std::string_view spec, std::string& error) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t comma = spec.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? spec.size() : comma;
    parts.push_back(spec.substr(start, end - start));
    start = end + 1;
  }
  LogSource source;
  const std::size_t eq = parts[0].find('=');
  if (eq == std::string_view::npos || eq == 0 || eq + 1 == parts[0].size()) {
    error = "--source '" + std::string(spec) + "': expected name=path";
    return std::nullopt;
  }
  source.server_name = std::string(parts[0].substr(0, eq));
  source.file_path = std::string(parts[0].substr(eq + 1));
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const std::string_view part = parts[i];
    if (part.starts_with("skew=")) {
      const std::string_view v = part.substr(5);
      long long skew = 0;
      const char* first = v.data() + (v.starts_with('+') ? 1 : 0);
      const auto [ptr, ec] = std::from_chars(first, v.data() + v.size(), skew);
      if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
        error = "--source '" + std::string(spec) + "': invalid skew '" + std::string(v) + "'";
        return std::nullopt;
      }
      source.clock_skew_seconds = skew;
    } else if (part.starts_with("format=")) {
      const auto format = parse_log_format(part.substr(7));
      if (!format) {
        error = "--source '" + std::string(spec) + "': invalid format '" +
                std::string(part.substr(7)) + "'";
        return std::nullopt;
      }
      source.format = *format;
    } else {
      error = "--source '" + std::string(spec) + "': unknown option '" + std::string(part) + "'";
      return std::nullopt;
    }
  }
  return source;
}

std::vector<std::string> check_config(const PipelineConfig& config) {
  std::vector<std::string> errors;
  if (config.sources.empty()) errors.push_back("no sources");
  std::set<std::string, std::less<>> names;
  std::set<std::string, std::less<>> reported;
  for (const LogSource& s : config.sources) {
    if (s.server_name.empty()) errors.push_back("source with an empty server name");
    if (s.file_path.empty()) {
      errors.push_back("source '" + s.server_name + "' has an empty path");
    }
    if (!names.insert(s.server_name).second && reported.insert(s.server_name).second) {
      errors.push_back("duplicate server_name '" + s.server_name + "'");
    }
  }
  if (config.cleaning.remove_classes.contains(ResourceClass::Page)) {
    errors.push_back("cleaning.remove_classes must not contain PAGE");
  }
  if (config.sessionizer.timeout <= std::chrono::seconds::zero()) {
    errors.push_back("sessionizer.timeout_minutes must be positive");
  }
  if (config.output_dir.empty()) {
    errors.push_back("output_dir is empty");
  } else {
    std::error_code ec;
    const fs::path out = fs::weakly_canonical(config.output_dir, ec);
    for (const LogSource& s : config.sources) {
      if (s.file_path.empty()) continue;
      std::error_code ec2;
      if (fs::weakly_canonical(s.file_path, ec2) == out) {
        errors.push_back("output_dir is the same path as source '" + s.server_name + "'");
      }
    }
  }
  return errors;
}

ConfigResult validate_config(std::optional<std::string_view> text, const fs::path& base_dir,
                             const ConfigOverrides& overrides) {
  ConfigResult result;
  PipelineConfig config;
  if (text) {
    TomlReader reader(*text, result.errors);
    const Document doc = reader.read();
    apply_document(doc, base_dir, config, result.errors);
  }

  if (overrides.timeout_minutes) {
    config.sessionizer.timeout = std::chrono::minutes{*overrides.timeout_minutes};
  }
  if (overrides.strict_referrer) config.sessionizer.referrer_mode = ReferrerMode::Strict;
  if (overrides.keep_failed_status) config.cleaning.status_policy = StatusPolicy::KeepAll;
  if (overrides.output_dir) config.output_dir = *overrides.output_dir;
  for (const std::string& spec : overrides.sources) {
    std::string error;
    if (auto source = parse_source_spec(spec, error)) {
      config.sources.push_back(std::move(*source));
    } else {
      result.errors.push_back(error);
    }
  }

  for (std::string& e : check_config(config)) result.errors.push_back(std::move(e));
  if (result.errors.empty()) result.config = std::move(config);
  return result;
}

ConfigResult validate_config(std::string_view text, const fs::path& base_dir) {
  return validate_config(std::optional<std::string_view>(text), base_dir, ConfigOverrides{});
}

ConfigResult load_config(const fs::path& file, const ConfigOverrides& overrides) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + file.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  return validate_config(std::optional<std::string_view>(text), file.parent_path(), overrides);
}

}  // namespace weblog
