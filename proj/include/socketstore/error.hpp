#pragma once

#include <stdexcept>
#include <string>

namespace socketstore {

enum class Errc {
  invalid_argument,
  empty_topology,
  duplicate_id,
  unknown_endpoint,
  non_positive_capacity,
  unknown_node,
  unknown_link,
  non_contiguous_path,
  path_endpoint_mismatch,
  non_incident_link,
  capacity_exceeded,
  inverted_window,
  non_positive_injection,
  unknown_type,
  schema_violation,
  binding_failure,
  unknown_agent,
  unknown_environment,
  message_rejected,
  malformed_document,
  unknown_agent_type,
  duplicate_directive,
  wiring_cycle,
  unresolved_reference,
  validation_failed,
  anonymous_author,
  duplicate_version,
  illegal_transition,
  self_review,
  unknown_module,
  not_published,
  access_denied,
  missing_input,
  spawn_failure,
  unknown_instance,
  alias_conflict,
  connection_closed,
  protocol_error,
  unknown_scenario,
  config_error,
  io_error,
};

const char* to_string(Errc code) noexcept;

/// Error raised by every socketstore module. The code identifies the failure
/// class; what() carries a human-readable reason line.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace socketstore
