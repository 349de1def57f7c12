#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "socketstore/moduledef/manifest.hpp"

namespace socketstore::store {

enum class ReviewDecision { accept, revise };

/// Module records and their lifecycle. Every state change goes through
/// transition(), which admits only the legal edges of the state machine.
class Repository {
 public:
  void add_specialist(const std::string& id);
  bool is_specialist(const std::string& id) const { return specialists_.contains(id); }
  const std::set<std::string>& specialists() const { return specialists_; }

  /// Stores a validated manifest in state submitted. Throws
  /// Error(anonymous_author) or Error(duplicate_version).
  const moduledef::ModuleManifest& add(moduledef::ModuleManifest manifest);
  /// Replaces the manifest of a module awaiting revision and moves it back
  /// to in_review. Throws illegal_transition, access_denied (different
  /// author) or duplicate_version (version not increased).
  const moduledef::ModuleManifest& replace(moduledef::ModuleManifest revised);
  /// Throws Error(illegal_transition).
  void transition(const std::string& module_id, moduledef::ModuleState to);

  /// Throws Error(unknown_module).
  const moduledef::ModuleManifest& at(const std::string& module_id) const;
  const moduledef::ModuleManifest* find(const std::string& module_id) const;
  std::vector<moduledef::ModuleManifest> all() const;

  nlohmann::json to_json() const;
  static Repository from_json(const nlohmann::json& doc);

 private:
  moduledef::ModuleManifest& mutable_at(const std::string& module_id);

  std::set<std::string> specialists_;
  std::map<std::string, moduledef::ModuleManifest> modules_;
};

}  // namespace socketstore::store
