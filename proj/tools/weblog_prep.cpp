#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "weblog/config.hpp"
#include "weblog/error.hpp"
#include "weblog/parallel.hpp"
#include "weblog/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;
constexpr int kExitInvariant = 3;

struct Options {
  std::string config_file;
  long long timeout_minutes = 0;
  bool strict_referrer = false;
  bool keep_failed_status = false;
  std::string output_dir;
  std::vector<std::string> sources;
};

void add_overrides(CLI::App& cmd, Options& opt) {
  cmd.add_option("--timeout-minutes", opt.timeout_minutes, "session timeout in minutes");
  cmd.add_flag("--strict-referrer", opt.strict_referrer, "use the STRICT referrer mode");
  cmd.add_flag("--keep-failed-status", opt.keep_failed_status,
               "keep requests with status >= 400");
  cmd.add_option("--output-dir", opt.output_dir, "bundle directory");
  cmd.add_option("--source", opt.sources, "extra source: name=path[,skew=N][,format=CLF|ECLF]");
}

weblog::ConfigResult resolve(const Options& opt, const CLI::App& cmd) {
  weblog::ConfigOverrides overrides;
  if (cmd.count("--timeout-minutes") > 0) overrides.timeout_minutes = opt.timeout_minutes;
  overrides.strict_referrer = opt.strict_referrer;
  overrides.keep_failed_status = opt.keep_failed_status;
  if (!opt.output_dir.empty()) overrides.output_dir = opt.output_dir;
  overrides.sources = opt.sources;
  if (opt.config_file.empty()) return weblog::validate_config(std::nullopt, {}, overrides);
  return weblog::load_config(opt.config_file, overrides);
}

int report_errors(const weblog::ConfigResult& result) {
  for (const std::string& e : result.errors) std::cerr << "config error: " << e << '\n';
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preprocess web server access logs into session tables and a report"};
  app.require_subcommand(1);

  Options opt;
  CLI::App* run = app.add_subcommand("run", "run the full pipeline and write the bundle");
  run->add_option("--config", opt.config_file, "pipeline config file");
  add_overrides(*run, opt);

  CLI::App* validate = app.add_subcommand("validate", "check a config file and report every problem");
  validate->add_option("--config", opt.config_file, "pipeline config file")->required();
  add_overrides(*validate, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (const char* env = std::getenv("WEBLOG_PREP_THREADS"); env != nullptr && *env != '\0') {
    const auto threads = weblog::parse_thread_count(env);
    if (!threads) {
      std::cerr << "config error: WEBLOG_PREP_THREADS must be a non-negative integer\n";
      return kExitConfig;
    }
    weblog::set_parallelism(*threads);
  }

  try {
    if (*validate) {
      const weblog::ConfigResult result = resolve(opt, *validate);
      if (!result.ok()) return report_errors(result);
      std::cout << "config ok: " << result.config->sources.size() << " source(s)\n";
      return kExitOk;
    }
    const weblog::ConfigResult result = resolve(opt, *run);
    if (!result.ok()) return report_errors(result);
    const weblog::RunSummary summary = weblog::run_pipeline(*result.config);
    weblog::print_summary(std::cout, *result.config, summary);
    return kExitOk;
  } catch (const weblog::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const weblog::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const weblog::FormatDetectionError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kExitIo;
  } catch (const weblog::InvariantError& e) {
    std::cerr << "invariant failure: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInvariant;
  }
}
