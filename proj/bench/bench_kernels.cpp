// Serial reference vs OpenMP kernels on a synthetic joint log.
// usage: bench_kernels [lines=200000] [repeats=3]
// Exits nonzero if any parallel result differs from its serial reference.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "support/generators.hpp"
#include "weblog/cleaner.hpp"
#include "weblog/identity.hpp"
#include "weblog/merger.hpp"
#include "weblog/parallel.hpp"
#include "weblog/parser.hpp"
#include "weblog/sessionizer.hpp"

using namespace weblog;

namespace {

template <class F>
double best_ms(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

bool all_ok = true;

void row(const char* kernel, double serial_ms, double parallel_ms, bool equal) {
  all_ok = all_ok && equal;
  std::printf("%-22s %10.1f %10.1f %8.2fx  %s\n", kernel, serial_ms, parallel_ms, serial_ms / parallel_ms,
              equal ? "equal" : "MISMATCH");
}

std::vector<std::vector<std::size_t>> shape(const std::vector<SessionHistory>& hs) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& h : hs) {
    out.emplace_back();
    for (const auto& r : h.requests) out.back().push_back(r.entry);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t lines = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 200000;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 3;

  gen::Rng rng(77);
  gen::RawLogOptions opt;
  opt.lines = lines;
  opt.hosts = std::max<std::size_t>(lines / 50, 1);
  const auto raw = gen::random_raw_log(rng, opt);
  const LogSource source{"bench", "", LogFormat::Eclf};
  std::printf("%zu lines, %d OpenMP threads available\n", raw.size(), omp_get_max_threads());
  std::printf("%-22s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

  std::vector<ParseOutcome> ps, pp;
  const double parse_s = best_ms(repeats, [&] { ps = serial::parse_lines(raw, 1, LogFormat::Eclf, source); });
  const double parse_p = best_ms(repeats, [&] { pp = parse_lines(raw, 1, LogFormat::Eclf, source); });
  row("parse_lines", parse_s, parse_p, ps == pp);

  std::vector<LogEntry> entries;
  for (auto& o : ps)
    if (auto* e = std::get_if<LogEntry>(&o)) entries.push_back(std::move(*e));
  const JointLog joint = merge({SourceLog{source, std::move(entries)}});
  const CleaningConfig cleaning;

  RobotPairs rs, rp;
  const double pairs_s = best_ms(repeats, [&] { rs = serial::collect_robot_pairs(joint.entries, cleaning); });
  const double pairs_p = best_ms(repeats, [&] { rp = collect_robot_pairs(joint.entries, cleaning); });
  row("collect_robot_pairs", pairs_s, pairs_p, rs == rp);

  std::vector<LogEntry> fs_entries, fp_entries;
  CleaningReport frs, frp;
  const double filter_s = best_ms(repeats, [&] {
    fs_entries = joint.entries;
    frs = serial::filter_entries(fs_entries, rs, cleaning);
  });
  const double filter_p = best_ms(repeats, [&] {
    fp_entries = joint.entries;
    frp = filter_entries(fp_entries, rp, cleaning);
  });
  row("filter_entries (+copy)", filter_s, filter_p,
      fs_entries == fp_entries && frs.removed_by_rule == frp.removed_by_rule && frs.kept_count == frp.kept_count);

  CleanResult cs, cp;
  const double clean_s = best_ms(repeats, [&] { cs = serial::clean(joint, cleaning); });
  const double clean_p = best_ms(repeats, [&] { cp = clean(joint, cleaning); });
  row("clean", clean_s, clean_p, cs.log.entries == cp.log.entries);

  const auto users = assign_users(cs.log.entries, IdentityPolicy::LoginThenIp);
  const SessionizerConfig sessionizer;
  std::vector<SessionHistory> ss, sp;
  const double sess_s = best_ms(repeats, [&] { ss = serial::sessionize_all(cs.log.entries, users.user_of, sessionizer); });
  const double sess_p = best_ms(repeats, [&] { sp = sessionize_all(cs.log.entries, users.user_of, sessionizer); });
  row("sessionize_all", sess_s, sess_p, shape(ss) == shape(sp));

  return all_ok ? 0 : 1;
}
