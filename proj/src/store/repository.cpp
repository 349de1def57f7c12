#include "socketstore/store/repository.hpp"

#include "socketstore/error.hpp"

namespace socketstore::store {

using moduledef::ModuleManifest;
using moduledef::ModuleState;
using nlohmann::json;

void Repository::add_specialist(const std::string& id) {
  if (id.empty()) throw Error(Errc::anonymous_author, "specialist id must not be empty");
  specialists_.insert(id);
}

const ModuleManifest& Repository::add(ModuleManifest m) {
  if (!is_specialist(m.author)) {
    throw Error(Errc::anonymous_author, "author '" + m.author + "' is not a registered specialist");
  }
  for (const auto& [id, other] : modules_) {
    if (other.name == m.name && other.version == m.version) {
      throw Error(Errc::duplicate_version, "duplicate version: " + m.name + " v" + std::to_string(m.version));
    }
  }
  if (modules_.contains(m.module_id)) {
    throw Error(Errc::duplicate_id, "module " + m.module_id + " exists; submit a revision instead");
  }
  m.state = ModuleState::submitted;
  const std::string id = m.module_id;
  return modules_[id] = std::move(m);
}

const ModuleManifest& Repository::replace(ModuleManifest revised) {
  ModuleManifest& current = mutable_at(revised.module_id);
  if (current.state != ModuleState::revision_requested) {
    throw Error(Errc::illegal_transition, std::string("illegal transition: module is ") + to_string(current.state));
  }
  if (revised.author != current.author) {
    throw Error(Errc::access_denied, "revisions must come from the original author " + current.author);
  }
  if (revised.version <= current.version) {
    throw Error(Errc::duplicate_version, "duplicate version: revision must increase the version beyond " +
                                             std::to_string(current.version));
  }
  revised.state = ModuleState::revision_requested;
  current = std::move(revised);
  transition(current.module_id, ModuleState::in_review);
  return current;
}

void Repository::transition(const std::string& module_id, ModuleState to) {
  ModuleManifest& m = mutable_at(module_id);
  if (!moduledef::is_legal_transition(m.state, to)) {
    throw Error(Errc::illegal_transition,
                std::string("illegal transition: ") + to_string(m.state) + " -> " + to_string(to));
  }
  m.state = to;
}

const ModuleManifest* Repository::find(const std::string& module_id) const {
  auto it = modules_.find(module_id);
  return it == modules_.end() ? nullptr : &it->second;
}

const ModuleManifest& Repository::at(const std::string& module_id) const {
  if (const auto* m = find(module_id)) return *m;
  throw Error(Errc::unknown_module, "unknown module: " + module_id);
}

ModuleManifest& Repository::mutable_at(const std::string& module_id) {
  return const_cast<ModuleManifest&>(at(module_id));
}

std::vector<ModuleManifest> Repository::all() const {
  std::vector<ModuleManifest> out;
  for (const auto& [_, m] : modules_) out.push_back(m);
  return out;
}

json Repository::to_json() const {
  json modules = json::array();
  for (const auto& [_, m] : modules_) modules.push_back(moduledef::to_json(m));
  return json{{"specialists", specialists_}, {"modules", modules}};
}

Repository Repository::from_json(const json& doc) {
  Repository r;
  try {
    for (const auto& s : doc.at("specialists")) r.specialists_.insert(s.get<std::string>());
    for (const auto& m : doc.at("modules")) {
      ModuleManifest manifest = moduledef::manifest_from_json(m);
      const std::string id = manifest.module_id;
      r.modules_[id] = std::move(manifest);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_document, std::string("malformed repository: ") + e.what());
  }
  return r;
}

}  // namespace socketstore::store
