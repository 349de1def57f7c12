#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "socketstore/agents/runtime.hpp"
#include "socketstore/endpoint.hpp"
#include "socketstore/kmflash/mirror.hpp"

namespace socketstore::kmflash {

struct KMParams {
  Endpoint endpoint_a;
  Endpoint endpoint_b;
  int k = 1;
  double rate_mbps = 0.0;
  SimDuration max_latency{0};
  SimDuration epsilon = from_ms(1.0);

  /// Parses and checks K >= 1, rate > 0, max_latency > 0.
  /// Throws Error(schema_violation).
  static KMParams from_params(const agents::ParamMap& params);
  AllocationRequest request() const;
};

/// K-paths mirroring adapter. Allocation and deployment happen on the
/// "activate" message; the outcome is replied to the sender as "activated"
/// or "activation_failed". After activation the agent composes a
/// SwitchAgent per traversed switch and a LinkAgent per traversed link.
class KMirrorAgent final : public agents::Agent {
 public:
  static constexpr const char* kTypeName = "KMirror";
  static agents::AgentTypeSchema schema();

  explicit KMirrorAgent(KMParams params) : params_(std::move(params)) {}

  void start(agents::AgentContext& ctx) override;
  void stop(agents::AgentContext& ctx) override;
  void on_message(agents::AgentContext& ctx, const agents::Message& msg) override;
  std::vector<UsageLine> usage(SimTime now) const override;
  std::vector<agents::AgentId> composed() const override { return children_; }

  const KMParams& params() const { return params_; }
  bool active() const { return handles_ && handles_->live(); }
  const std::optional<MirrorHandles>& handles() const { return handles_; }
  const std::optional<AllocationFailure>& failure() const { return failure_; }

  /// Mirrors one payload across the live paths, resolving `on_copy` per copy.
  /// Throws Error(connection_closed) when not active.
  void post(std::uint64_t seq, std::string payload, SimDuration deadline, netsim::DeliveryCallback on_copy);

 private:
  nlohmann::json activate(agents::AgentContext& ctx);

  KMParams params_;
  netsim::Simulator* network_ = nullptr;
  RateCard rates_;
  std::string tag_;
  std::optional<MirrorHandles> handles_;
  std::optional<AllocationFailure> failure_;
  std::vector<agents::AgentId> children_;
};

void register_kmirror_agent(agents::AgentCatalog& catalog);

nlohmann::json to_json(const Path& path);

}  // namespace socketstore::kmflash
