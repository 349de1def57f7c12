#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "socketstore/sim_time.hpp"

namespace socketstore::store {

struct License {
  std::string app_id;
  std::string module_id;
  SimTime issued_at{0};
  std::string token;
  bool revoked = false;

  bool operator==(const License&) const = default;
};

/// Built-in license-server stub. Tokens are 128 random bits in hex and are
/// never reissued, even after revocation.
class LicenseServer {
 public:
  /// Returns the live license of (app, module), issuing one if none exists.
  const License& issue(const std::string& app_id, const std::string& module_id, SimTime now);
  /// False when the token is unknown or already revoked.
  bool revoke(const std::string& token);
  /// True iff an unrevoked license binds the token to the module.
  bool verify(const std::string& token, const std::string& module_id) const;
  const License* find(const std::string& token) const;
  const License* find(const std::string& app_id, const std::string& module_id) const;
  const std::vector<License>& all() const { return licenses_; }

  nlohmann::json to_json() const;
  static LicenseServer from_json(const nlohmann::json& doc);

 private:
  std::string fresh_token() const;

  std::vector<License> licenses_;
  std::map<std::string, std::size_t> by_token_;
};

}  // namespace socketstore::store
