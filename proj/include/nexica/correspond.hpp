#pragma once

#include "nexica/ingest.hpp"

#include <cstdint>
#include <vector>

namespace nexica {

struct EventSeries;

inline constexpr int kDefaultMaxLag = 8;

// Sorted event positions plus a bitset over the same slots, so counting can
// walk the sparser series and probe the denser one in O(1).
class EventIndex {
public:
  EventIndex() = default;
  explicit EventIndex(const Mask& events);

  std::size_t length() const { return length_; }
  const std::vector<std::uint32_t>& positions() const { return positions_; }
  bool test(std::size_t slot) const { return (bits_[slot >> 6] >> (slot & 63)) & 1U; }
  // Number of events at positions in [lo, hi).
  std::size_t count_in(std::size_t lo, std::size_t hi) const;

private:
  std::size_t length_ = 0;
  std::vector<std::uint32_t> positions_;
  std::vector<std::uint64_t> bits_;
};

struct CorrespondenceCounts {
  std::int64_t a00 = 0;  // neither fires
  std::int64_t a01 = 0;  // effect only
  std::int64_t a10 = 0;  // cause only
  std::int64_t a11 = 0;  // cause and effect
  int lag = 0;
  int tau = 0;
  std::int64_t window = 0;  // compared slot pairs; equals the sum of the four counts

  std::int64_t total() const { return a00 + a01 + a10 + a11; }
  bool operator==(const CorrespondenceCounts&) const = default;
};

// Counts over cause slots t in [0, M - lag - tau). With tau = 0 a pair is
// (cause[t], effect[t + lag]). With tau > 0 each cause event claims the
// earliest unclaimed effect event in [t + lag, t + lag + tau]; effect events
// at t + lag left unclaimed count as a01.
CorrespondenceCounts count_correspondences(const EventIndex& cause, const EventIndex& effect, int lag, int tau,
                                           int max_lag = kDefaultMaxLag);

CorrespondenceCounts count_correspondences(const EventSeries& cause, const EventSeries& effect, int lag, int tau,
                                           int max_lag = kDefaultMaxLag);

} // namespace nexica
