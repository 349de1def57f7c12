#include "socketstore/store/protocol.hpp"

#include "socketstore/error.hpp"

namespace socketstore::store {

using nlohmann::json;

json protocol_error(const std::string& reason) { return {{"kind", "PROTOCOL_ERROR"}, {"reason", reason}}; }

json ProtocolSession::handle(const json& req) {
  if (!req.is_object() || !req.contains("kind") || !req["kind"].is_string()) {
    return protocol_error("message must be an object with a string kind");
  }
  const std::string kind = req["kind"];
  try {
    if (kind == "HELLO") {
      app_id_ = req.at("app_id").get<std::string>();
      return {{"kind", "HELLO_OK"}};
    }
    if (kind == "AUTH") {
      const auto token = req.at("token").get<std::string>();
      const auto module_id = req.at("module_id").get<std::string>();
      if (!store_.authorize(token, module_id)) return {{"kind", "AUTH_DENY"}, {"reason", "authorization denied"}};
      tokens_[module_id] = token;
      return {{"kind", "AUTH_OK"}};
    }
    if (kind == "BIND") {
      std::vector<Endpoint> eps;
      for (const auto& e : req.at("connectivity")) eps.push_back(parse_endpoint(e.get<std::string>()));
      try {
        store_.bind_alias(req.at("alias").get<std::string>(), req.at("device_id").get<std::string>(), eps);
      } catch (const Error& e) {
        return {{"kind", "BIND_FAIL"}, {"reason", e.what()}};
      }
      return {{"kind", "BIND_OK"}};
    }
    if (kind == "RESOLVE") {
      const auto alias = req.at("alias").get<std::string>();
      auto eps = store_.resolve_alias(alias);
      if (!eps) return {{"kind", "RESOLVE_FAIL"}, {"reason", "unknown alias: " + alias}};
      json out = json::array();
      for (const auto& e : *eps) out.push_back(to_string(e));
      return {{"kind", "RESOLVE_OK"}, {"connectivity", out}};
    }
    if (kind == "INSTANTIATE") {
      const auto module_id = req.at("module_id").get<std::string>();
      std::string token = req.value("token", "");
      if (token.empty()) {
        auto it = tokens_.find(module_id);
        if (it != tokens_.end()) token = it->second;
      }
      const auto inputs = req.value("inputs", std::map<std::string, std::string>{});
      try {
        const InstantiateResult r = store_.instantiate(token, module_id, inputs);
        if (!r.ok) {
          return {{"kind", "INSTANTIATE_FAIL"}, {"reason", r.reason}, {"max_feasible_k", r.max_feasible_k}};
        }
        return {{"kind", "INSTANTIATE_OK"}, {"instance_id", r.instance_id}, {"allocation", r.allocation}};
      } catch (const Error& e) {
        return {{"kind", "INSTANTIATE_FAIL"}, {"reason", e.what()}, {"max_feasible_k", 0}};
      }
    }
    if (kind == "COST") {
      json report = to_json(store_.cost(req.at("instance_id").get<std::string>()));
      report["kind"] = "COST_REPORT";
      return report;
    }
    if (kind == "TEARDOWN") {
      const auto id = req.at("instance_id").get<std::string>();
      store_.teardown(id);
      return {{"kind", "TEARDOWN_OK"}, {"instance_id", id}};
    }
  } catch (const json::exception& e) {
    return protocol_error(kind + ": " + e.what());
  } catch (const Error& e) {
    return protocol_error(kind + ": " + e.what());
  }
  return protocol_error("unknown message kind: " + kind);
}

std::string ProtocolSession::handle_line(const std::string& line) {
  json req;
  try {
    req = json::parse(line);
  } catch (const json::exception&) {
    return protocol_error("malformed message").dump();
  }
  return handle(req).dump();
}

}  // namespace socketstore::store
