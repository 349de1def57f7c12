#pragma once

#include <json.hpp>
#include <string>

#include "socketstore/sim_time.hpp"

namespace socketstore {

enum class Outcome { ok, error };

/// One audit-trail record. `actor` is "store", "agent:<id>" or "instance:<id>".
struct ActionLogEntry {
  SimTime ts{0};
  std::string actor;
  std::string action;
  Outcome outcome = Outcome::ok;
  nlohmann::json detail = nlohmann::json::object();
};

}  // namespace socketstore
