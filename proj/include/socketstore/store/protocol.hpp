#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "socketstore/store/store.hpp"

namespace socketstore::store {

/// Server side of the DSA<->store wire protocol for one client session.
/// Messages are JSON objects, one per line, with a string "kind":
///
///   HELLO{app_id}                       -> HELLO_OK
///   AUTH{token, module_id}              -> AUTH_OK | AUTH_DENY{reason}
///   BIND{alias, device_id, connectivity} -> BIND_OK | BIND_FAIL{reason}
///   RESOLVE{alias}                      -> RESOLVE_OK{connectivity} | RESOLVE_FAIL{reason}
///   INSTANTIATE{module_id, inputs}      -> INSTANTIATE_OK{instance_id, allocation}
///                                        | INSTANTIATE_FAIL{reason, max_feasible_k}
///   COST{instance_id}                   -> COST_REPORT{instance_id, usage, raw_total, weighted_total}
///   TEARDOWN{instance_id}               -> TEARDOWN_OK
///
/// INSTANTIATE uses the token of the session's AUTH_OK for that module
/// unless the message carries its own "token". Anything else is answered
/// with PROTOCOL_ERROR{reason}.
class ProtocolSession {
 public:
  explicit ProtocolSession(Store& store) : store_(store) {}

  nlohmann::json handle(const nlohmann::json& request);
  /// Parses one line; malformed JSON yields PROTOCOL_ERROR.
  std::string handle_line(const std::string& line);

  const std::string& app_id() const { return app_id_; }

 private:
  Store& store_;
  std::string app_id_;
  std::map<std::string, std::string> tokens_;  // module_id -> authorized token
};

nlohmann::json protocol_error(const std::string& reason);

}  // namespace socketstore::store
