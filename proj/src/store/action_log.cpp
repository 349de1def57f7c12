#include "socketstore/store/action_log.hpp"

#include <cstdint>
#include <cstdio>

#include "socketstore/error.hpp"

namespace socketstore::store {

using nlohmann::json;

const ActionLogEntry& ActionLog::append(ActionLogEntry entry) {
  if (!entries_.empty() && entry.ts < entries_.back().ts) entry.ts = entries_.back().ts;
  entries_.push_back(std::move(entry));
  return entries_.back();
}

std::vector<ActionLogEntry> ActionLog::read(const LogFilter& filter) const {
  std::vector<ActionLogEntry> out;
  for (const auto& e : entries_) {
    if (filter.actor && e.actor != *filter.actor) continue;
    if (filter.from && e.ts < *filter.from) continue;
    if (filter.to && e.ts > *filter.to) continue;
    out.push_back(e);
  }
  return out;
}

std::string fingerprint(std::string_view secret) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : secret) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 8);
}

json to_json(const ActionLogEntry& e) {
  return json{{"ts_ns", e.ts.count()},
              {"actor", e.actor},
              {"action", e.action},
              {"outcome", e.outcome == Outcome::ok ? "ok" : "error"},
              {"detail", e.detail}};
}

ActionLogEntry log_entry_from_json(const json& doc) {
  try {
    ActionLogEntry e;
    e.ts = SimTime{doc.at("ts_ns").get<std::int64_t>()};
    e.actor = doc.at("actor").get<std::string>();
    e.action = doc.at("action").get<std::string>();
    e.outcome = doc.at("outcome").get<std::string>() == "ok" ? Outcome::ok : Outcome::error;
    e.detail = doc.value("detail", json::object());
    return e;
  } catch (const json::exception& ex) {
    throw Error(Errc::malformed_document, std::string("malformed log entry: ") + ex.what());
  }
}

}  // namespace socketstore::store
