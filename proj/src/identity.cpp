#include "weblog/identity.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

namespace weblog {

std::string_view to_string(IdentityPolicy policy) {
  return policy == IdentityPolicy::LoginThenIp ? "LOGIN_THEN_IP" : "LOGIN_THEN_IP_AGENT";
}

std::optional<IdentityPolicy> parse_identity_policy(std::string_view text) {
  if (text == "LOGIN_THEN_IP") return IdentityPolicy::LoginThenIp;
  if (text == "LOGIN_THEN_IP_AGENT") return IdentityPolicy::LoginThenIpAgent;
  return std::nullopt;
}

std::string_view to_string(UserKeyKind kind) {
  switch (kind) {
    case UserKeyKind::Login:
      return "LOGIN";
    case UserKeyKind::Ip:
      return "IP";
    case UserKeyKind::IpAgent:
      return "IP_AGENT";
  }
  return "IP";
}

std::size_t UserKeyHash::operator()(const UserKey& key) const noexcept {
  return std::hash<std::string>{}(key.value) * 31 + static_cast<std::size_t>(key.kind);
}

UserKey identify_user(const LogEntry& entry, IdentityPolicy policy) {
  if (entry.auth_login) return {UserKeyKind::Login, *entry.auth_login};
  if (policy == IdentityPolicy::LoginThenIp) return {UserKeyKind::Ip, entry.remote_host};
  std::string value = entry.remote_host;
  value.push_back(kUserKeySeparator);
  if (entry.user_agent) value.append(*entry.user_agent);
  return {UserKeyKind::IpAgent, std::move(value)};
}

UserAssignment assign_users(std::span<const LogEntry> entries, IdentityPolicy policy) {
  UserAssignment out;
  out.user_of.reserve(entries.size());
  std::unordered_map<UserKey, UserId, UserKeyHash> ids;
  for (const LogEntry& entry : entries) {
    UserKey key = identify_user(entry, policy);
    auto [it, inserted] = ids.try_emplace(key, static_cast<UserId>(out.users.size() + 1));
    if (inserted) {
      out.users.push_back({it->second, std::move(key), entry.timestamp_utc, entry.timestamp_utc, 0});
    }
    UserRecord& user = out.users[it->second - 1];
    user.first_seen = std::min(user.first_seen, entry.timestamp_utc);
    user.last_seen = std::max(user.last_seen, entry.timestamp_utc);
    ++user.request_count;
    out.user_of.push_back(it->second);
  }
  return out;
}

}  // namespace weblog
