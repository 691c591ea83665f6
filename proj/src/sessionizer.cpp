#include "weblog/sessionizer.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <tuple>

#include "weblog/error.hpp"

namespace weblog {

std::string_view to_string(ReferrerMode mode) {
  return mode == ReferrerMode::Strict ? "STRICT" : "LENIENT";
}

std::optional<ReferrerMode> parse_referrer_mode(std::string_view text) {
  if (text == "STRICT") return ReferrerMode::Strict;
  if (text == "LENIENT") return ReferrerMode::Lenient;
  return std::nullopt;
}

std::string referrer_path(std::string_view referrer) {
  std::string_view rest = referrer;
  const std::size_t scheme_end = referrer.find("://");
  const bool has_scheme =
      scheme_end != std::string_view::npos && scheme_end > 0 &&
      std::all_of(referrer.begin(), referrer.begin() + static_cast<std::ptrdiff_t>(scheme_end),
                  [](char c) {
                    return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
                           c == '.';
                  });
  if (has_scheme || rest.starts_with("//")) {
    rest = has_scheme ? rest.substr(scheme_end + 3) : rest.substr(2);
    const std::size_t slash = rest.find_first_of("/?#");
    rest = slash == std::string_view::npos || rest[slash] != '/' ? std::string_view("/")
                                                                 : rest.substr(slash);
  }
  return std::string(rest.substr(0, rest.find_first_of("?#")));
}

std::optional<std::size_t> distance(std::span<const SessionHistory> histories,
                                    std::string_view path) {
  std::optional<std::size_t> best;
  Instant best_time{};
  const std::string key(path);
  for (std::size_t i = 0; i < histories.size(); ++i) {
    const auto it = histories[i].last_access.find(key);
    if (it == histories[i].last_access.end()) continue;
    if (!best || it->second >= best_time) {
      best = i;
      best_time = it->second;
    }
  }
  return best;
}

namespace {

// Session_Gen over one partition. `latest` mirrors distance() over all
// histories so that each lookup is O(1): since requests arrive in time order,
// a new access to a path is never older than the stored one.
std::vector<SessionHistory> generate(std::span<const LogEntry> entries,
                                     std::span<const std::size_t> partition, UserId user,
                                     const SessionizerConfig& config) {
  struct Latest {
    Instant time;
    std::size_t history;
  };
  std::vector<SessionHistory> histories;
  std::unordered_map<std::string, Latest> latest;
  std::size_t current = 0;
  Instant previous{};

  for (std::size_t k = 0; k < partition.size(); ++k) {
    const std::size_t index = partition[k];
    const LogEntry& entry = entries[index];
    const Instant t = entry.timestamp_utc;
    if (k > 0 && t < previous) {
      throw PreconditionError("session_gen: entries of user " + std::to_string(user) +
                              " are not sorted by time");
    }

    std::optional<std::size_t> target;
    if (k > 0 && t - previous <= config.timeout) {
      if (entry.format == LogFormat::Clf) {
        target = current;
      } else if (!entry.referrer) {
        if (config.referrer_mode == ReferrerMode::Lenient) target = current;
      } else {
        const auto it = latest.find(referrer_path(*entry.referrer));
        if (it != latest.end()) target = it->second.history;
      }
    }
    if (!target) {
      histories.emplace_back();
      histories.back().session_id = histories.size();
      histories.back().user_id = user;
      target = histories.size() - 1;
    }

    SessionHistory& history = histories[*target];
    history.requests.push_back({index, t});
    history.last_access[entry.path] = t;
    auto [it, inserted] = latest.try_emplace(entry.path, Latest{t, *target});
    if (!inserted && (t > it->second.time || *target > it->second.history)) {
      it->second = {t, *target};
    }
    current = *target;
    previous = t;
  }
  return histories;
}

struct Partitions {
  std::vector<UserId> users;
  std::vector<std::vector<std::size_t>> indices;
};

Partitions partition_by_user(std::span<const LogEntry> entries, std::span<const UserId> user_of) {
  if (entries.size() != user_of.size()) {
    throw PreconditionError("sessionize_all: entries and user ids differ in length");
  }
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].timestamp_utc < entries[i - 1].timestamp_utc) {
      throw PreconditionError("sessionize_all: entries are not sorted by time");
    }
  }
  std::map<UserId, std::size_t> slot;
  Partitions parts;
  for (std::size_t i = 0; i < entries.size(); ++i) slot.try_emplace(user_of[i], 0);
  for (auto& [user, s] : slot) {
    s = parts.users.size();
    parts.users.push_back(user);
  }
  parts.indices.resize(parts.users.size());
  for (std::size_t i = 0; i < entries.size(); ++i) parts.indices[slot[user_of[i]]].push_back(i);
  return parts;
}

std::vector<SessionHistory> number_sessions(std::vector<std::vector<SessionHistory>> per_user) {
  std::vector<SessionHistory> all;
  std::size_t total = 0;
  for (const auto& list : per_user) total += list.size();
  all.reserve(total);
  for (auto& list : per_user) {
    std::move(list.begin(), list.end(), std::back_inserter(all));
  }
  // Within a user, creation order (the local id) breaks start-time ties.
  std::stable_sort(all.begin(), all.end(), [](const SessionHistory& a, const SessionHistory& b) {
    return std::tuple(a.start(), a.user_id, a.session_id) <
           std::tuple(b.start(), b.user_id, b.session_id);
  });
  for (std::size_t i = 0; i < all.size(); ++i) all[i].session_id = i + 1;
  return all;
}

}  // namespace

std::vector<SessionHistory> session_gen(std::span<const LogEntry> entries, UserId user,
                                        const SessionizerConfig& config) {
  std::vector<std::size_t> all(entries.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return generate(entries, all, user, config);
}

std::vector<SessionHistory> sessionize_all(std::span<const LogEntry> entries,
                                           std::span<const UserId> user_of,
                                           const SessionizerConfig& config) {
  const Partitions parts = partition_by_user(entries, user_of);
  std::vector<std::vector<SessionHistory>> per_user(parts.users.size());
  const auto n = static_cast<std::ptrdiff_t>(parts.users.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    per_user[p] = generate(entries, parts.indices[p], parts.users[p], config);
  }
  return number_sessions(std::move(per_user));
}

namespace serial {

std::vector<SessionHistory> sessionize_all(std::span<const LogEntry> entries,
                                           std::span<const UserId> user_of,
                                           const SessionizerConfig& config) {
  const Partitions parts = partition_by_user(entries, user_of);
  std::vector<std::vector<SessionHistory>> per_user;
  per_user.reserve(parts.users.size());
  for (std::size_t p = 0; p < parts.users.size(); ++p) {
    per_user.push_back(generate(entries, parts.indices[p], parts.users[p], config));
  }
  return number_sessions(std::move(per_user));
}

}  // namespace serial

std::vector<std::uint64_t> session_of_entries(std::span<const SessionHistory> sessions,
                                              std::size_t entry_count) {
  std::vector<std::uint64_t> out(entry_count, 0);
  for (const SessionHistory& s : sessions) {
    for (const SessionRequest& r : s.requests) out.at(r.entry) = s.session_id;
  }
  return out;
}

}  // namespace weblog
