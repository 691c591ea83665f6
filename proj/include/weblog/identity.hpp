#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weblog/logmodel.hpp"

namespace weblog {

enum class IdentityPolicy { LoginThenIp, LoginThenIpAgent };

std::string_view to_string(IdentityPolicy policy);
std::optional<IdentityPolicy> parse_identity_policy(std::string_view text);

enum class UserKeyKind { Login, Ip, IpAgent };

std::string_view to_string(UserKeyKind kind);

inline constexpr char kUserKeySeparator = '\x01';

// value is the login, the host, or host + '\x01' + agent.
struct UserKey {
  UserKeyKind kind = UserKeyKind::Ip;
  std::string value;

  bool operator==(const UserKey&) const = default;
};

struct UserKeyHash {
  std::size_t operator()(const UserKey& key) const noexcept;
};

using UserId = std::uint32_t;

struct UserRecord {
  UserId user_id = 0;
  UserKey key;
  Instant first_seen{};
  Instant last_seen{};
  std::uint64_t request_count = 0;
};

// Login when present; otherwise host (LoginThenIp) or host+agent
// (LoginThenIpAgent), an absent agent counting as "".
UserKey identify_user(const LogEntry& entry, IdentityPolicy policy);

struct UserAssignment {
  std::vector<UserId> user_of;  // parallel to the input entries
  std::vector<UserRecord> users;  // users[id - 1]
};

// Ids are dense from 1 in order of first appearance.
UserAssignment assign_users(std::span<const LogEntry> entries, IdentityPolicy policy);

}  // namespace weblog
