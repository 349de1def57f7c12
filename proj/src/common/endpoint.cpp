#include "socketstore/endpoint.hpp"

#include <charconv>

#include "socketstore/error.hpp"

namespace socketstore {

namespace {

int parse_int(std::string_view text, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(Errc::invalid_argument, "malformed endpoint: " + std::string(whole));
  }
  return value;
}

}  // namespace

Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(Errc::invalid_argument, "malformed endpoint: " + std::string(text));
  }
  Endpoint ep;
  ep.address = std::string(text.substr(0, colon));
  std::string_view rest = text.substr(colon + 1);
  if (const auto slash = rest.find('/'); slash != std::string_view::npos) {
    ep.nic = parse_int(rest.substr(slash + 1), text);
    rest = rest.substr(0, slash);
  }
  ep.port = parse_int(rest, text);
  if (ep.port < 1 || ep.port > 65535) {
    throw Error(Errc::invalid_argument, "port out of range: " + std::string(text));
  }
  if (ep.nic < 0) {
    throw Error(Errc::invalid_argument, "negative nic: " + std::string(text));
  }
  return ep;
}

std::string to_string(const Endpoint& endpoint) {
  std::string out = endpoint.address + ":" + std::to_string(endpoint.port);
  if (endpoint.nic != 0) out += "/" + std::to_string(endpoint.nic);
  return out;
}

}  // namespace socketstore
