#pragma once

#include "nexica/ingest.hpp"
#include "nexica/timeparse.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace nexica {

// Per-week-slot median speed of one station. Week-slots with no
// non-imputed sample hold NaN ("undefined").
struct WeekProfile {
  std::string station_id;
  std::vector<double> medians = std::vector<double>(kSlotsPerWeek, std::nan(""));

  bool defined(int week_slot) const { return !std::isnan(medians[static_cast<std::size_t>(week_slot)]); }
};

struct EventSeries {
  std::string station_id;
  Mask events;          // leading edges of slowdowns
  Mask slowdown_mask;   // every slot below the threshold
  double alpha = 0.0;

  std::size_t size() const { return events.size(); }
};

// Lower median of the non-imputed samples observed at each week-slot.
WeekProfile median_week_profile(const SpeedSeries& series);

// u[j] is set iff slot j is not imputed, its profile value is defined and
// positive, and (s - p) / p < -alpha.
Mask detect_slowdowns(const SpeedSeries& series, const WeekProfile& profile, double alpha);

// v[0] = u[0]; v[j] = u[j] && !u[j-1].
Mask leading_edges(const Mask& slowdowns);

EventSeries extract_events(const SpeedSeries& series, const WeekProfile& profile, double alpha);

struct StationEvents {
  std::vector<WeekProfile> profiles;
  std::vector<EventSeries> events;
};

// Profiles and events for every station; stations run in parallel.
StationEvents extract_all_events(const SpeedDataset& data, double alpha);

// Rows "station_id,slot_index,event". Sparse output keeps every event row and
// the final slot of each station so the series length survives a round trip.
void write_events_csv(const std::string& path, const std::vector<EventSeries>& events, bool dense = false);
std::vector<EventSeries> load_events_csv(const std::string& path);

// Rows "station_id,week_slot,median"; undefined medians are left empty.
void write_profile_csv(const std::string& path, const std::vector<WeekProfile>& profiles);

} // namespace nexica
