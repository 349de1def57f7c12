#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace socketstore {

/// One provider resource consumed by a module instance, accrued to date.
struct UsageLine {
  std::string resource;
  double quantity = 0.0;
  std::string unit;
  double unit_price = 0.0;

  double amount() const { return quantity * unit_price; }
};

/// Unit prices per simulated resource type.
struct RateCard {
  double link_mbps_second = 0.001;   // reserved Mbps x seconds on a path
  double switch_rule_second = 0.0001;  // directly written table entry x seconds
};

using WeightFunction = std::function<double(std::span<const UsageLine>)>;

/// Resolves a weight function by name: "identity" or "scale:<factor>".
/// Throws Error(config_error) for anything else.
WeightFunction make_weight_function(const std::string& name);

double raw_total(std::span<const UsageLine> usage);

}  // namespace socketstore
