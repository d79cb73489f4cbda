#include "nexica/events.hpp"

#include "nexica/csv.hpp"
#include "nexica/error.hpp"

#include <algorithm>
#include <unordered_map>

namespace nexica {

WeekProfile median_week_profile(const SpeedSeries& series) {
  WeekProfile profile;
  profile.station_id = series.station_id;

  std::vector<std::vector<double>> samples(kSlotsPerWeek);
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (series.imputed[k]) continue;
    samples[static_cast<std::size_t>(week_slot(series.start_slot + static_cast<std::int64_t>(k)))].push_back(
        series.speeds[k]);
  }
  for (std::size_t w = 0; w < samples.size(); ++w) {
    auto& v = samples[w];
    if (v.empty()) continue;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
    std::nth_element(v.begin(), mid, v.end());
    profile.medians[w] = *mid;
  }
  return profile;
}

Mask detect_slowdowns(const SpeedSeries& series, const WeekProfile& profile, double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("alpha must be > 0");
  if (profile.medians.size() != static_cast<std::size_t>(kSlotsPerWeek)) {
    throw ParameterError("week profile must have 2016 slots");
  }
  Mask u(series.size(), 0);
  int ws = week_slot(series.start_slot);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double predicted = profile.medians[static_cast<std::size_t>(ws)];
    if (!series.imputed[k] && predicted > 0.0) {  // NaN compares false
      u[k] = (series.speeds[k] - predicted) / predicted < -alpha ? 1 : 0;
    }
    if (++ws == kSlotsPerWeek) ws = 0;
  }
  return u;
}

Mask leading_edges(const Mask& u) {
  Mask v(u.size(), 0);
  if (u.empty()) return v;
  v[0] = u[0] ? 1 : 0;
  for (std::size_t j = 1; j < u.size(); ++j) v[j] = (u[j] && !u[j - 1]) ? 1 : 0;
  return v;
}

EventSeries extract_events(const SpeedSeries& series, const WeekProfile& profile, double alpha) {
  EventSeries e;
  e.station_id = series.station_id;
  e.alpha = alpha;
  e.slowdown_mask = detect_slowdowns(series, profile, alpha);
  e.events = leading_edges(e.slowdown_mask);
  return e;
}

StationEvents extract_all_events(const SpeedDataset& data, double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("alpha must be > 0");
  const auto n = static_cast<std::ptrdiff_t>(data.series.size());
  StationEvents out;
  out.profiles.resize(data.series.size());
  out.events.resize(data.series.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& s = data.series[static_cast<std::size_t>(i)];
    out.profiles[static_cast<std::size_t>(i)] = median_week_profile(s);
    out.events[static_cast<std::size_t>(i)] = extract_events(s, out.profiles[static_cast<std::size_t>(i)], alpha);
  }
  return out;
}

void write_events_csv(const std::string& path, const std::vector<EventSeries>& events, bool dense) {
  auto out = csv::open_output(path);
  out << "station_id,slot_index,event\n";
  for (const auto& e : events) {
    const std::size_t m = e.size();
    for (std::size_t k = 0; k < m; ++k) {
      if (dense || e.events[k] || k + 1 == m) out << e.station_id << ',' << k << ',' << (e.events[k] ? 1 : 0) << '\n';
    }
  }
}

std::vector<EventSeries> load_events_csv(const std::string& path) {
  csv::Reader reader(path);
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::pair<std::int64_t, bool>>> rows;
  bool first = true;
  std::int64_t m = 0;
  while (reader.next()) {
    const auto& f = reader.fields();
    if (first && !f.empty() && f[0] == "station_id") {
      first = false;
      continue;
    }
    first = false;
    reader.expect_columns(3);
    const auto slot = reader.field_int(1);
    const auto flag = reader.field_int(2);
    if (slot < 0) reader.fail("negative slot index");
    if (flag != 0 && flag != 1) reader.fail("event flag must be 0 or 1");
    auto [it, inserted] = rows.try_emplace(f[0]);
    if (inserted) order.push_back(f[0]);
    it->second.emplace_back(slot, flag == 1);
    m = std::max(m, slot + 1);
  }
  std::vector<EventSeries> out;
  out.reserve(order.size());
  for (const auto& id : order) {
    EventSeries e;
    e.station_id = id;
    e.events.assign(static_cast<std::size_t>(m), 0);
    for (const auto& [slot, flag] : rows[id]) e.events[static_cast<std::size_t>(slot)] = flag ? 1 : 0;
    e.slowdown_mask = e.events;
    out.push_back(std::move(e));
  }
  return out;
}

void write_profile_csv(const std::string& path, const std::vector<WeekProfile>& profiles) {
  auto out = csv::open_output(path);
  out << "station_id,week_slot,median\n";
  for (const auto& p : profiles) {
    for (int w = 0; w < kSlotsPerWeek; ++w) {
      out << p.station_id << ',' << w << ',';
      if (p.defined(w)) out << csv::format_double(p.medians[static_cast<std::size_t>(w)]);
      out << '\n';
    }
  }
}

} // namespace nexica
