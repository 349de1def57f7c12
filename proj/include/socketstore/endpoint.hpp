#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace socketstore {

/// A device network attachment: host identifier, port and NIC index.
/// Text form: "address:port" or "address:port/nic".
struct Endpoint {
  std::string address;
  int port = 0;
  int nic = 0;

  auto operator<=>(const Endpoint&) const = default;
};

/// Throws Error(invalid_argument) on a malformed endpoint or a port outside [1, 65535].
Endpoint parse_endpoint(std::string_view text);
std::string to_string(const Endpoint& endpoint);

}  // namespace socketstore
