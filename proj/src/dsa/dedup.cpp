#include "socketstore/dsa/dedup.hpp"

#include <algorithm>

#include "socketstore/error.hpp"

namespace socketstore::dsa {

DedupWindow::DedupWindow(std::uint64_t size) {
  if (size == 0) throw Error(Errc::invalid_argument, "dedup window size must be positive");
  slots_.assign(size, false);
}

bool DedupWindow::accept(std::uint64_t seq) {
  const std::uint64_t w = slots_.size();
  if (!any_) {
    any_ = true;
    highest_ = seq;
    slots_[seq % w] = true;
    return true;
  }
  if (seq > highest_) {
    const std::uint64_t steps = std::min(seq - highest_, w);
    for (std::uint64_t i = 1; i <= steps; ++i) slots_[(highest_ + i) % w] = false;
    highest_ = seq;
    slots_[seq % w] = true;
    return true;
  }
  if (highest_ - seq >= w) return false;
  if (slots_[seq % w]) return false;
  slots_[seq % w] = true;
  return true;
}

}  // namespace socketstore::dsa
