#pragma once

#include <string>

#include "socketstore/dsa/dsa.hpp"
#include "store_fixture.hpp"

namespace testfix {

inline socketstore::dsa::DeviceConfig device(const std::string& host, int port, const std::string& app = "demo") {
  socketstore::dsa::DeviceConfig c;
  c.device_id = "dev-" + host;
  c.app_id = app;
  c.connectivity = {{host, port, 0}, {host, port, 1}};
  c.static_hosts = {{"Device_B", {"B", 6000, 0}}};
  return c;
}

/// Store with flash-delivery published and purchased; device B bound as
/// "Device_B"; device A ready to connect.
struct DsaWorld : StoreWorld {
  DsaWorld() : channel(*store), a(device("A", 5000), channel, sim), b(device("B", 6000), channel, sim) {
    publish("flash-delivery");
    token = store->purchase("demo", "flash-delivery").token;
    b.bind("Device_B");
  }

  socketstore::dsa::ConnectOptions opts(int k) const {
    socketstore::dsa::ConnectOptions o;
    o.k = k;
    return o;
  }

  socketstore::dsa::LocalChannel channel;
  socketstore::dsa::Dsa a;
  socketstore::dsa::Dsa b;
  std::string token;
};

}  // namespace testfix
