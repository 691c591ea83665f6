#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "weblog/cleaner.hpp"
#include "weblog/identity.hpp"
#include "weblog/logmodel.hpp"
#include "weblog/sessionizer.hpp"
#include "weblog/summarizer.hpp"

namespace weblog {

struct PipelineConfig {
  std::vector<LogSource> sources;
  CleaningConfig cleaning;
  IdentityPolicy identity_policy = IdentityPolicy::LoginThenIpAgent;
  SessionizerConfig sessionizer;
  std::filesystem::path output_dir = "weblog-out";
  std::set<Granularity> granularities{Granularity::Hour, Granularity::Day};
};

// Command-line flags layered over the config file.
struct ConfigOverrides {
  std::optional<long long> timeout_minutes;
  bool strict_referrer = false;
  bool keep_failed_status = false;
  std::optional<std::filesystem::path> output_dir;
  // "name=path[,skew=N][,format=CLF|ECLF|AUTO]", appended to the file's sources.
  std::vector<std::string> sources;
};

struct ConfigResult {
  std::optional<PipelineConfig> config;  // set iff errors is empty
  std::vector<std::string> errors;

  bool ok() const { return errors.empty(); }
};

// Parses and checks a config document, reporting every problem found rather
// than stopping at the first. Relative paths resolve against base_dir.
ConfigResult validate_config(std::string_view text,
                             const std::filesystem::path& base_dir = {});

// Same, with flag overrides applied before the checks. `text` may be empty
// when the run is configured by flags alone.
ConfigResult validate_config(std::optional<std::string_view> text,
                             const std::filesystem::path& base_dir,
                             const ConfigOverrides& overrides);

// Reads `file` and validates it; throws IoError when it cannot be read.
ConfigResult load_config(const std::filesystem::path& file, const ConfigOverrides& overrides);

// Parses one --source flag value. Error text goes to `error`.
std::optional<LogSource> parse_source_spec(std::string_view spec, std::string& error);

// Semantic checks on an assembled config (empty when valid).
std::vector<std::string> check_config(const PipelineConfig& config);

}  // namespace weblog
