#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace nexica {

inline constexpr int kSlotMinutes = 5;
inline constexpr int kSlotsPerDay = 24 * 60 / kSlotMinutes;  // 288
inline constexpr int kSlotsPerWeek = 7 * kSlotsPerDay;       // 2016

struct Timestamp {
  std::int64_t civil_minutes = 0;  // wall-clock minutes since 1970-01-01T00:00 as written
  int seconds = 0;
  std::optional<int> utc_offset_minutes;  // set when the text carried Z or +hh:mm

  std::int64_t utc_minutes() const { return civil_minutes - utc_offset_minutes.value_or(0); }
};

// Accepts "YYYY-MM-DDTHH:MM[:SS][Z|+HH:MM|-HH:MM]", the same with a space
// separator, and the PeMS "MM/DD/YYYY HH:MM:SS" form. Returns nullopt on
// malformed text.
std::optional<Timestamp> parse_timestamp(std::string_view text);

// ISO 8601 text for a slot given in the dataset's local clock.
std::string format_timestamp(std::int64_t local_minutes, int utc_offset_minutes);

// Monday-anchored position of a local slot within the week, in [0, 2016).
int week_slot(std::int64_t local_slot);

} // namespace nexica
