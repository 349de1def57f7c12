#include <cstdlib>
#include <numeric>

#include "socketstore/cost.hpp"
#include "socketstore/error.hpp"
#include "socketstore/sim_time.hpp"

namespace socketstore {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::empty_topology: return "empty topology";
    case Errc::duplicate_id: return "duplicate id";
    case Errc::unknown_endpoint: return "unknown endpoint";
    case Errc::non_positive_capacity: return "non-positive capacity";
    case Errc::unknown_node: return "unknown node";
    case Errc::unknown_link: return "unknown link";
    case Errc::non_contiguous_path: return "non-contiguous path";
    case Errc::path_endpoint_mismatch: return "path endpoint mismatch";
    case Errc::non_incident_link: return "non-incident link";
    case Errc::capacity_exceeded: return "capacity exceeded";
    case Errc::inverted_window: return "inverted window";
    case Errc::non_positive_injection: return "non-positive injection";
    case Errc::unknown_type: return "unknown type";
    case Errc::schema_violation: return "schema violation";
    case Errc::binding_failure: return "resource binding failure";
    case Errc::unknown_agent: return "unknown agent";
    case Errc::unknown_environment: return "unknown environment";
    case Errc::message_rejected: return "message rejected";
    case Errc::malformed_document: return "malformed document";
    case Errc::unknown_agent_type: return "unknown agent type";
    case Errc::duplicate_directive: return "duplicate directive_id";
    case Errc::wiring_cycle: return "wiring cycle";
    case Errc::unresolved_reference: return "unresolved reference";
    case Errc::validation_failed: return "validation failed";
    case Errc::anonymous_author: return "anonymous author";
    case Errc::duplicate_version: return "duplicate version";
    case Errc::illegal_transition: return "illegal transition";
    case Errc::self_review: return "self-review";
    case Errc::unknown_module: return "unknown module";
    case Errc::not_published: return "not published";
    case Errc::access_denied: return "access denied";
    case Errc::missing_input: return "missing input";
    case Errc::spawn_failure: return "spawn failure";
    case Errc::unknown_instance: return "unknown instance";
    case Errc::alias_conflict: return "alias conflict";
    case Errc::connection_closed: return "connection closed";
    case Errc::protocol_error: return "protocol error";
    case Errc::unknown_scenario: return "unknown scenario";
    case Errc::config_error: return "config error";
    case Errc::io_error: return "io error";
  }
  return "unknown error";
}

std::string format_ms(SimDuration d) {
  std::int64_t ns = d.count();
  std::string sign;
  if (ns < 0) {
    sign = "-";
    ns = -ns;
  }
  std::string frac = std::to_string(ns % 1'000'000);
  frac.insert(0, 6 - frac.size(), '0');
  return sign + std::to_string(ns / 1'000'000) + "." + frac;
}

double raw_total(std::span<const UsageLine> usage) {
  return std::accumulate(usage.begin(), usage.end(), 0.0,
                         [](double acc, const UsageLine& line) { return acc + line.amount(); });
}

WeightFunction make_weight_function(const std::string& name) {
  if (name.empty() || name == "identity") {
    return [](std::span<const UsageLine> usage) { return raw_total(usage); };
  }
  constexpr std::string_view scale_prefix = "scale:";
  if (name.starts_with(scale_prefix)) {
    const std::string arg = name.substr(scale_prefix.size());
    char* end = nullptr;
    const double factor = std::strtod(arg.c_str(), &end);
    if (arg.empty() || end != arg.c_str() + arg.size() || factor < 0) {
      throw Error(Errc::config_error, "bad weight factor: " + arg);
    }
    return [factor](std::span<const UsageLine> usage) { return factor * raw_total(usage); };
  }
  throw Error(Errc::config_error, "unknown weight function: " + name);
}

}  // namespace socketstore
