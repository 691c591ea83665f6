#include "doctest.h"
#include "support/corpora.hpp"
#include "support/generators.hpp"
#include "support/threads.hpp"
#include "weblog/cleaner.hpp"
#include "weblog/parser.hpp"

using namespace weblog;

namespace {

JointLog joint_of(std::vector<LogEntry> entries) {
  JointLog j;
  for (const auto& e : entries) ++j.source_counts[e.server_name];
  j.entries = std::move(entries);
  return j;
}

std::vector<LogEntry> fig2_entries() {
  const LogSource src{"web", "", LogFormat::Eclf, 0};
  std::vector<LogEntry> out;
  const auto lines = testdata::crawler_lines();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out.push_back(std::get<LogEntry>(parse_line(lines[i], LogFormat::Eclf, src, i + 1)));
  }
  return out;
}

void check_reconciles(const CleaningReport& r) {
  CHECK(r.input_count == r.kept_count + r.removed_count());
  CHECK(r.kept_bytes <= r.input_bytes);
  if (r.input_count == 0) {
    CHECK(r.reduction_percent() == 0.0);
  } else {
    CHECK(r.reduction_percent() ==
          doctest::Approx(100.0 * double(r.input_count - r.kept_count) / double(r.input_count)).epsilon(1e-12));
  }
  CHECK(r.removed_by_rule.size() == std::size(kAllRemovalRules));
}

gen::RawLogOptions raw(std::size_t lines) {
  gen::RawLogOptions o;
  o.lines = lines;
  o.garbage = 0;
  return o;
}

}  // namespace

TEST_CASE("is_robot") {
  const auto e = fig2_entries();
  const CleaningConfig cfg;
  RobotPairs none;
  CHECK(is_robot(e[0], none, cfg));
  CHECK_FALSE(is_robot(e[2], none, cfg));
  RobotPairs pairs;
  pairs.insert(e[2].remote_host, *e[2].user_agent);
  CHECK(is_robot(e[2], pairs, cfg));
  LogEntry other_agent = e[2];
  other_agent.user_agent = "Opera";
  CHECK_FALSE(is_robot(other_agent, pairs, cfg));
  LogEntry shouty = e[2];
  shouty.user_agent = "MEGASPIDER 2";
  CHECK(is_robot(shouty, none, cfg));
  LogEntry no_agent = e[2];
  no_agent.user_agent.reset();
  CHECK_FALSE(is_robot(no_agent, none, cfg));
}

TEST_CASE("the crawler excerpt keeps only its page") {
  const auto result = clean(joint_of(fig2_entries()), CleaningConfig{});
  REQUIRE(result.log.entries.size() == 1);
  CHECK(result.log.entries[0].path == testdata::kCrawlerPagePath);
  const CleaningReport& r = result.report;
  CHECK(r.input_count == 5);
  CHECK(r.kept_count == 1);
  CHECK(r.removed_by_rule.at("robot") == 1);
  CHECK(r.removed_by_rule.at("style") == 1);
  CHECK(r.removed_by_rule.at("image") == 2);
  CHECK(r.removed_count() == 4);
  CHECK(r.reduction_percent() == 80.0);
  CHECK(result.log.source_counts.at("web") == 1);
  // bytes are the serialized line lengths plus a newline
  std::uint64_t total = 0;
  for (const auto& line : testdata::crawler_lines()) total += line.size() + 1;
  CHECK(r.input_bytes == total);
  CHECK(r.kept_bytes == testdata::crawler_lines()[2].size() + 1);
  check_reconciles(r);
}

TEST_CASE("empty and all-kept inputs") {
  const auto empty = clean(JointLog{}, CleaningConfig{});
  CHECK(empty.log.entries.empty());
  CHECK(empty.report.input_count == 0);
  CHECK(empty.report.reduction_percent() == 0.0);
  check_reconciles(empty.report);

  std::vector<LogEntry> pages;
  for (int i = 0; i < 10; ++i) {
    LogEntry e;
    e.server_name = "web";
    e.remote_host = "10.0.0." + std::to_string(i);
    e.path = "/p" + std::to_string(i) + ".html";
    e.user_agent = "Mozilla/5.0";
    e.format = LogFormat::Eclf;
    pages.push_back(e);
  }
  const auto kept = clean(joint_of(pages), CleaningConfig{});
  CHECK(kept.log.entries == pages);
  CHECK(kept.report.reduction_percent() == 0.0);
}

TEST_CASE("rule order and individual rules") {
  const CleaningConfig cfg;
  RobotPairs none;
  LogEntry e;
  e.path = "/x.gif";
  e.status = 404;
  e.method = Method::from_text("PUT");
  e.user_agent = "somebot";
  CHECK(removal_rule(e, none, cfg) == RemovalRule::Robot);
  e.user_agent = "Mozilla";
  CHECK(removal_rule(e, none, cfg) == RemovalRule::Image);
  e.path = "/x.html";
  CHECK(removal_rule(e, none, cfg) == RemovalRule::Status);
  e.status = 302;
  CHECK(removal_rule(e, none, cfg) == RemovalRule::Method);
  e.method = Method::from_text("HEAD");
  CHECK_FALSE(removal_rule(e, none, cfg));
  e.path = "/robots.txt";
  CHECK(removal_rule(e, none, cfg) == RemovalRule::Robot);

  CleaningConfig keep_all = cfg;
  keep_all.status_policy = StatusPolicy::KeepAll;
  e.path = "/x.html";
  e.status = 500;
  CHECK_FALSE(removal_rule(e, none, keep_all));
  CHECK(removal_rule(e, none, cfg) == RemovalRule::Status);
  e.status = 399;
  CHECK_FALSE(removal_rule(e, none, cfg));

  CleaningConfig other = cfg;
  other.extensions.other.insert("pdf");
  other.remove_classes.insert(ResourceClass::Other);
  e.path = "/doc.pdf";
  CHECK(removal_rule(e, none, other) == RemovalRule::Other);
  CHECK_FALSE(removal_rule(e, none, cfg));
}

TEST_CASE("robots.txt fetchers are robots for the whole run, in either direction of time") {
  std::vector<LogEntry> log;
  auto add = [&](std::string host, std::string agent, std::string path) {
    LogEntry e;
    e.server_name = "web";
    e.remote_host = std::move(host);
    e.user_agent = std::move(agent);
    e.path = std::move(path);
    e.format = LogFormat::Eclf;
    e.line_number = log.size() + 1;
    log.push_back(e);
  };
  add("1.1.1.1", "Fetcher", "/a.html");
  add("1.1.1.1", "Fetcher", "/robots.txt");
  add("1.1.1.1", "Fetcher", "/b.html");
  add("1.1.1.1", "Human", "/c.html");
  add("2.2.2.2", "Fetcher", "/d.html");
  const auto r = clean(joint_of(log), CleaningConfig{});
  REQUIRE(r.log.entries.size() == 2);
  CHECK(r.log.entries[0].path == "/c.html");
  CHECK(r.log.entries[1].path == "/d.html");
  CHECK(r.report.removed_by_rule.at("robot") == 3);

  CleaningConfig off;
  off.robots_txt_rule = false;
  const auto r2 = clean(joint_of(log), off);
  CHECK(r2.log.entries.size() == 4);
  CHECK(r2.report.removed_by_rule.at("robot") == 1);
}

TEST_CASE("cleaning properties on random logs") {
  gen::Rng rng(31);
  for (int c = 0; c < 200; ++c) {
    const auto entries = gen::random_parsed_log(rng, raw(static_cast<std::size_t>(gen::uniform(rng, 0, 300))));
    const JointLog joint = joint_of(entries);
    const auto once = clean(joint, CleaningConfig{});
    check_reconciles(once.report);
    CHECK(once.report.input_count == entries.size());
    CHECK(once.report.kept_count == once.log.entries.size());

    // order preserved: kept entries are a subsequence of the input
    std::size_t k = 0;
    for (const auto& e : entries) {
      if (k < once.log.entries.size() && once.log.entries[k] == e) ++k;
    }
    CHECK(k == once.log.entries.size());

    const auto twice = clean(once.log, CleaningConfig{});
    CHECK(twice.log.entries == once.log.entries);
    CHECK(twice.report.removed_count() == 0);

    CleaningConfig fewer;
    fewer.remove_classes = {ResourceClass::Image};
    CleaningConfig more = fewer;
    more.remove_classes.insert(ResourceClass::Style);
    more.remove_classes.insert(ResourceClass::Script);
    more.remove_classes.insert(ResourceClass::Multimedia);
    more.remove_classes.insert(ResourceClass::Other);
    CHECK(clean(joint, more).report.kept_count <= clean(joint, fewer).report.kept_count);
  }
}

TEST_CASE("parallel kernels match the serial reference") {
  gen::Rng rng(8);
  const auto entries = gen::random_parsed_log(rng, raw(5000));
  const JointLog joint = joint_of(entries);
  const CleaningConfig cfg;
  const auto expected = serial::clean(joint, cfg);
  const RobotPairs expected_pairs = serial::collect_robot_pairs(entries, cfg);
  for (int threads : {1, 4}) {
    testdata::with_threads(threads, [&] {
      const RobotPairs pairs = collect_robot_pairs(entries, cfg);
      CHECK(pairs.size() == expected_pairs.size());
      for (const auto& e : entries) {
        const std::string agent = e.user_agent.value_or("");
        CHECK(pairs.contains(e.remote_host, agent) == expected_pairs.contains(e.remote_host, agent));
      }
      const auto got = clean(joint, cfg);
      CHECK(got.log.entries == expected.log.entries);
      CHECK(got.log.source_counts == expected.log.source_counts);
      CHECK(got.report.removed_by_rule == expected.report.removed_by_rule);
      CHECK(got.report.input_bytes == expected.report.input_bytes);
      CHECK(got.report.kept_bytes == expected.report.kept_bytes);
      return 0;
    });
  }
}

TEST_CASE("batch-wise filtering with global robot pairs equals one whole-log clean") {
  gen::Rng rng(9);
  const auto entries = gen::random_parsed_log(rng, raw(2000));
  const CleaningConfig cfg;
  const auto whole = clean(joint_of(entries), cfg);
  const RobotPairs pairs = collect_robot_pairs(entries, cfg);
  CleaningReport total;
  std::vector<LogEntry> kept;
  for (std::size_t at = 0; at < entries.size(); at += 97) {
    std::vector<LogEntry> batch(entries.begin() + at, entries.begin() + std::min(entries.size(), at + 97));
    total.add(filter_entries(batch, pairs, cfg));
    kept.insert(kept.end(), batch.begin(), batch.end());
  }
  CHECK(kept == whole.log.entries);
  CHECK(total.removed_by_rule == whole.report.removed_by_rule);
  CHECK(total.input_bytes == whole.report.input_bytes);
}
