#pragma once

#include <cstdint>
#include <vector>

namespace socketstore::dsa {

/// Sliding window of seen sequence numbers. Accepts the first arrival of a
/// seq; rejects duplicates and seqs that fell out of the window.
class DedupWindow {
 public:
  static constexpr std::uint64_t kDefaultSize = 1u << 16;

  explicit DedupWindow(std::uint64_t size = kDefaultSize);

  bool accept(std::uint64_t seq);
  std::uint64_t size() const { return slots_.size(); }

 private:
  std::vector<bool> slots_;
  std::uint64_t highest_ = 0;
  bool any_ = false;
};

}  // namespace socketstore::dsa
