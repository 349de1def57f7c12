#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "socketstore/action.hpp"

namespace socketstore::store {

struct LogFilter {
  std::optional<std::string> actor;
  std::optional<SimTime> from;  // inclusive
  std::optional<SimTime> to;    // inclusive
};

/// Append-only audit trail. Timestamps never decrease: an entry stamped
/// earlier than its predecessor is clamped forward.
class ActionLog {
 public:
  const ActionLogEntry& append(ActionLogEntry entry);
  std::vector<ActionLogEntry> read(const LogFilter& filter = {}) const;
  const std::vector<ActionLogEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  SimTime last_ts() const { return entries_.empty() ? SimTime{0} : entries_.back().ts; }

 private:
  std::vector<ActionLogEntry> entries_;
};

/// Short stable identifier for a secret, safe to write to logs.
std::string fingerprint(std::string_view secret);

nlohmann::json to_json(const ActionLogEntry& entry);
ActionLogEntry log_entry_from_json(const nlohmann::json& doc);

}  // namespace socketstore::store
