#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "weblog/identity.hpp"
#include "weblog/logmodel.hpp"

namespace weblog {

enum class ReferrerMode {
  // A request whose referrer is absent, or was never served in any of the
  // user's histories, always opens a new history.
  Strict,
  // As Strict, except an absent referrer inside the timeout continues the
  // most recently active history.
  Lenient,
};

std::string_view to_string(ReferrerMode mode);
std::optional<ReferrerMode> parse_referrer_mode(std::string_view text);

struct SessionizerConfig {
  std::chrono::seconds timeout = std::chrono::minutes{30};
  ReferrerMode referrer_mode = ReferrerMode::Lenient;
};

struct SessionRequest {
  std::size_t entry = 0;  // index into the entries the sessionizer was given
  Instant time{};

  bool operator==(const SessionRequest&) const = default;
};

// One time-ordered session history.
struct SessionHistory {
  std::uint64_t session_id = 0;
  UserId user_id = 0;
  std::vector<SessionRequest> requests;
  // path -> most recent request time of that path within this history
  std::unordered_map<std::string, Instant> last_access;

  Instant start() const { return requests.front().time; }
  Instant end() const { return requests.back().time; }
};

// Path component of a referrer: scheme and authority of an absolute URL are
// dropped, as are any query and fragment.
std::string referrer_path(std::string_view referrer);

// Index of the history that most recently accessed `path`; on equal access
// times the later history wins. Empty when no history contains the path.
std::optional<std::size_t> distance(std::span<const SessionHistory> histories,
                                    std::string_view path);

// Sessionizes one user's time-sorted requests. Request indices in the result
// refer to `entries`; session ids are 1..n in creation order. CLF entries
// skip the referrer test (timeout only). Throws PreconditionError when the
// entries are not sorted by time.
std::vector<SessionHistory> session_gen(std::span<const LogEntry> entries, UserId user,
                                        const SessionizerConfig& config);

// Partitions by user and sessionizes each partition (OpenMP-parallel over
// users). Session ids are global, ordered by (start, user_id); the result is
// sorted by session id.
std::vector<SessionHistory> sessionize_all(std::span<const LogEntry> entries,
                                           std::span<const UserId> user_of,
                                           const SessionizerConfig& config);

namespace serial {
std::vector<SessionHistory> sessionize_all(std::span<const LogEntry> entries,
                                           std::span<const UserId> user_of,
                                           const SessionizerConfig& config);
}  // namespace serial

// Session id of every entry, parallel to the entries the sessions index.
std::vector<std::uint64_t> session_of_entries(std::span<const SessionHistory> sessions,
                                              std::size_t entry_count);

}  // namespace weblog
