#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nexica {

using Mask = std::vector<std::uint8_t>;

enum class Direction { N, S, E, W };

std::optional<Direction> parse_direction(const std::string& text);
char direction_code(Direction d);

struct StationMeta {
  std::string station_id;
  std::string road;                    // e.g. "I-105"; empty when unknown
  std::optional<Direction> direction;  // unset when unknown
  double latitude = 0.0;
  double longitude = 0.0;
  std::string sensor_type;

  bool has_road_direction() const { return !road.empty() && direction.has_value(); }
};

// One station's 5-minute mean speeds. Slots are contiguous; slots missing
// from the source file appear with imputed=1.
struct SpeedSeries {
  std::string station_id;
  std::int64_t start_slot = 0;  // index of slot 0 on the dataset's local clock (minutes / 5)
  std::vector<double> speeds;
  Mask imputed;

  std::size_t size() const { return speeds.size(); }
};

// Stations aligned to a common slot range, so every series has the same
// start_slot and length.
struct SpeedDataset {
  int utc_offset_minutes = 0;
  std::vector<SpeedSeries> series;

  std::size_t slot_count() const { return series.empty() ? 0 : series.front().size(); }
  std::int64_t start_slot() const { return series.empty() ? 0 : series.front().start_slot; }
};

class DriveTimeMatrix {
public:
  DriveTimeMatrix() = default;
  // Validates: square, finite, non-negative, zero diagonal.
  DriveTimeMatrix(std::vector<std::string> station_ids, std::vector<double> minutes);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& station_ids() const { return ids_; }
  double operator()(std::size_t from, std::size_t to) const { return minutes_[from * ids_.size() + to]; }
  std::optional<std::size_t> index_of(const std::string& id) const;

  // Sub-matrix over the given ids, in that order.
  DriveTimeMatrix restricted_to(const std::vector<std::string>& ids) const;

private:
  std::vector<std::string> ids_;
  std::vector<double> minutes_;
};

SpeedDataset load_speed_csv(const std::string& path);
void write_speed_csv(const std::string& path, const SpeedDataset& data);

std::vector<StationMeta> load_station_meta(const std::string& path);
void write_station_meta(const std::string& path, const std::vector<StationMeta>& meta);

DriveTimeMatrix load_drive_times(const std::string& path);
void write_drive_times(const std::string& path, const DriveTimeMatrix& d);

// Fraction of non-imputed slots.
double completeness(const SpeedSeries& series);

struct FilteredDataset {
  SpeedDataset speeds;
  std::vector<StationMeta> meta;  // same order as speeds.series
};

FilteredDataset filter_stations(const SpeedDataset& speeds, const std::vector<StationMeta>& meta,
                                double min_completeness);

} // namespace nexica
