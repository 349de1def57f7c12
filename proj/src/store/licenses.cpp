#include "socketstore/store/licenses.hpp"

#include <cstdio>
#include <random>

#include "socketstore/error.hpp"

namespace socketstore::store {

using nlohmann::json;

std::string LicenseServer::fresh_token() const {
  std::random_device rd;
  for (;;) {
    std::string token;
    for (int i = 0; i < 4; ++i) {
      char buf[9];
      std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(rd()));
      token += buf;
    }
    if (!by_token_.contains(token)) return token;
  }
}

const License& LicenseServer::issue(const std::string& app_id, const std::string& module_id, SimTime now) {
  for (const License& l : licenses_) {
    if (!l.revoked && l.app_id == app_id && l.module_id == module_id) return l;
  }
  licenses_.push_back(License{app_id, module_id, now, fresh_token(), false});
  by_token_[licenses_.back().token] = licenses_.size() - 1;
  return licenses_.back();
}

bool LicenseServer::revoke(const std::string& token) {
  auto it = by_token_.find(token);
  if (it == by_token_.end() || licenses_[it->second].revoked) return false;
  licenses_[it->second].revoked = true;
  return true;
}

bool LicenseServer::verify(const std::string& token, const std::string& module_id) const {
  const License* l = find(token);
  return l != nullptr && !l->revoked && l->module_id == module_id;
}

const License* LicenseServer::find(const std::string& token) const {
  auto it = by_token_.find(token);
  return it == by_token_.end() ? nullptr : &licenses_[it->second];
}

const License* LicenseServer::find(const std::string& app_id, const std::string& module_id) const {
  for (const License& l : licenses_) {
    if (!l.revoked && l.app_id == app_id && l.module_id == module_id) return &l;
  }
  return nullptr;
}

json LicenseServer::to_json() const {
  json out = json::array();
  for (const License& l : licenses_) {
    out.push_back({{"app_id", l.app_id},
                   {"module_id", l.module_id},
                   {"issued_at_ns", l.issued_at.count()},
                   {"token", l.token},
                   {"revoked", l.revoked}});
  }
  return out;
}

LicenseServer LicenseServer::from_json(const json& doc) {
  LicenseServer s;
  try {
    for (const json& l : doc) {
      s.licenses_.push_back(License{l.at("app_id").get<std::string>(), l.at("module_id").get<std::string>(),
                                    SimTime{l.at("issued_at_ns").get<std::int64_t>()},
                                    l.at("token").get<std::string>(), l.at("revoked").get<bool>()});
      s.by_token_[s.licenses_.back().token] = s.licenses_.size() - 1;
    }
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_document, std::string("malformed license record: ") + e.what());
  }
  return s;
}

}  // namespace socketstore::store
