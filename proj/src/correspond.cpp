#include "nexica/correspond.hpp"

#include "nexica/error.hpp"
#include "nexica/events.hpp"

#include <algorithm>
#include <string>

namespace nexica {

EventIndex::EventIndex(const Mask& events) : length_(events.size()), bits_((events.size() + 63) / 64, 0) {
  for (std::size_t k = 0; k < events.size(); ++k) {
    if (events[k]) {
      positions_.push_back(static_cast<std::uint32_t>(k));
      bits_[k >> 6] |= std::uint64_t{1} << (k & 63);
    }
  }
}

std::size_t EventIndex::count_in(std::size_t lo, std::size_t hi) const {
  if (hi <= lo) return 0;
  const auto b = std::lower_bound(positions_.begin(), positions_.end(), lo);
  const auto e = std::lower_bound(b, positions_.end(), hi);
  return static_cast<std::size_t>(e - b);
}

CorrespondenceCounts count_correspondences(const EventIndex& cause, const EventIndex& effect, int lag, int tau,
                                           int max_lag) {
  if (cause.length() != effect.length()) {
    throw ConsistencyError("cause and effect series differ in length (" + std::to_string(cause.length()) + " vs " +
                           std::to_string(effect.length()) + ")");
  }
  if (lag < 1 || lag > max_lag) {
    throw ParameterError("lag " + std::to_string(lag) + " outside [1, " + std::to_string(max_lag) + "]");
  }
  if (tau < 0) throw ParameterError("tau must be >= 0");
  const std::size_t m = cause.length();
  const auto reach = static_cast<std::size_t>(lag) + static_cast<std::size_t>(tau);
  if (reach >= m) throw ParameterError("lag + tau must be smaller than the series length");

  const std::size_t window = m - reach;
  const auto ulag = static_cast<std::size_t>(lag);

  CorrespondenceCounts c;
  c.lag = lag;
  c.tau = tau;
  c.window = static_cast<std::int64_t>(window);

  const auto& cpos = cause.positions();
  const auto& epos = effect.positions();
  const auto cause_end = std::lower_bound(cpos.begin(), cpos.end(), window);
  const auto n_cause = static_cast<std::int64_t>(cause_end - cpos.begin());
  const auto n_effect = static_cast<std::int64_t>(effect.count_in(ulag, ulag + window));

  if (tau == 0) {
    std::int64_t both = 0;
    if (n_cause <= n_effect) {
      for (auto it = cpos.begin(); it != cause_end; ++it) both += effect.test(*it + ulag);
    } else {
      const auto b = std::lower_bound(epos.begin(), epos.end(), ulag);
      const auto e = std::lower_bound(b, epos.end(), ulag + window);
      for (auto it = b; it != e; ++it) both += cause.test(*it - ulag);
    }
    c.a11 = both;
    c.a10 = n_cause - both;
    c.a01 = n_effect - both;
  } else {
    // Causes ascend, so the earliest unclaimed effect is always at or after
    // the cursor: everything before it is either claimed or too early.
    auto cursor = std::lower_bound(epos.begin(), epos.end(), ulag);
    std::int64_t matched = 0;
    std::int64_t matched_at_exact_range = 0;
    for (auto it = cpos.begin(); it != cause_end; ++it) {
      const std::size_t lo = *it + ulag;
      const std::size_t hi = lo + static_cast<std::size_t>(tau);
      while (cursor != epos.end() && *cursor < lo) ++cursor;
      if (cursor != epos.end() && *cursor <= hi) {
        ++matched;
        if (*cursor < ulag + window) ++matched_at_exact_range;
        ++cursor;
      }
    }
    c.a11 = matched;
    c.a10 = n_cause - matched;
    c.a01 = n_effect - matched_at_exact_range;
  }
  c.a00 = c.window - c.a11 - c.a10 - c.a01;
  return c;
}

CorrespondenceCounts count_correspondences(const EventSeries& cause, const EventSeries& effect, int lag, int tau,
                                           int max_lag) {
  return count_correspondences(EventIndex(cause.events), EventIndex(effect.events), lag, tau, max_lag);
}

} // namespace nexica
