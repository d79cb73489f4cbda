#include "nexica/ingest.hpp"

#include "nexica/csv.hpp"
#include "nexica/error.hpp"
#include "nexica/timeparse.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace nexica {

std::optional<Direction> parse_direction(const std::string& text) {
  if (text.empty()) return std::nullopt;
  switch (std::toupper(static_cast<unsigned char>(text.front()))) {
    case 'N': return Direction::N;
    case 'S': return Direction::S;
    case 'E': return Direction::E;
    case 'W': return Direction::W;
    default: return std::nullopt;
  }
}

char direction_code(Direction d) {
  switch (d) {
    case Direction::N: return 'N';
    case Direction::S: return 'S';
    case Direction::E: return 'E';
    case Direction::W: return 'W';
  }
  return '?';
}

// ---------------------------------------------------------------------------
// Speeds

namespace {

struct RawRow {
  std::int64_t slot;
  double speed;
  bool imputed;
  std::size_t line;
};

bool is_header(const std::vector<std::string>& f) { return !f.empty() && f.front() == "station_id"; }

} // namespace

SpeedDataset load_speed_csv(const std::string& path) {
  csv::Reader reader(path);
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<RawRow>> rows;
  std::optional<int> offset;
  bool first = true;

  while (reader.next()) {
    const auto& f = reader.fields();
    if (first && is_header(f)) {
      first = false;
      continue;
    }
    first = false;
    reader.expect_columns(4);
    const auto ts = parse_timestamp(f[1]);
    if (!ts) reader.fail("bad timestamp '" + f[1] + "'");
    if (!offset) offset = ts->utc_offset_minutes.value_or(0);
    const std::int64_t local = ts->utc_minutes() + *offset;
    if (ts->seconds != 0 || local % kSlotMinutes != 0) {
      throw FormatError(path + ":" + std::to_string(reader.line_number()) + ": timestamp '" + f[1] +
                        "' is not on a 5-minute boundary");
    }
    const double speed = reader.field_double(2);
    if (!(speed >= 0.0) || !std::isfinite(speed)) reader.fail("speed must be finite and >= 0");
    const auto flag = reader.field_int(3);
    if (flag != 0 && flag != 1) reader.fail("imputed flag must be 0 or 1");
    if (f[0].empty()) reader.fail("empty station_id");

    auto [it, inserted] = rows.try_emplace(f[0]);
    if (inserted) order.push_back(f[0]);
    it->second.push_back({local / kSlotMinutes, speed, flag == 1, reader.line_number()});
  }

  SpeedDataset data;
  data.utc_offset_minutes = offset.value_or(0);
  if (order.empty()) return data;

  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (const auto& [id, r] : rows) {
    for (const auto& row : r) {
      lo = std::min(lo, row.slot);
      hi = std::max(hi, row.slot);
    }
  }
  const auto m = static_cast<std::size_t>(hi - lo + 1);

  for (const auto& id : order) {
    SpeedSeries s;
    s.station_id = id;
    s.start_slot = lo;
    s.speeds.assign(m, 0.0);
    s.imputed.assign(m, 1);
    std::vector<std::uint8_t> present(m, 0);
    for (const auto& row : rows[id]) {
      const auto k = static_cast<std::size_t>(row.slot - lo);
      if (present[k]) {
        throw FormatError(path + ":" + std::to_string(row.line) + ": duplicate timestamp for station " + id);
      }
      present[k] = 1;
      s.speeds[k] = row.speed;
      s.imputed[k] = row.imputed ? 1 : 0;
    }

    // Gap slots copy the nearest non-imputed neighbour (earlier wins ties),
    // falling back to the nearest present row.
    auto fill = [&](auto usable) {
      std::vector<std::ptrdiff_t> left(m, -1), right(m, -1);
      std::ptrdiff_t last = -1;
      for (std::size_t k = 0; k < m; ++k) {
        if (usable(k)) last = static_cast<std::ptrdiff_t>(k);
        left[k] = last;
      }
      last = -1;
      for (std::size_t k = m; k-- > 0;) {
        if (usable(k)) last = static_cast<std::ptrdiff_t>(k);
        right[k] = last;
      }
      bool any = false;
      for (std::size_t k = 0; k < m; ++k) {
        if (present[k]) continue;
        const auto l = left[k], r = right[k];
        std::ptrdiff_t src = -1;
        if (l >= 0 && r >= 0) {
          src = (static_cast<std::ptrdiff_t>(k) - l <= r - static_cast<std::ptrdiff_t>(k)) ? l : r;
        } else {
          src = l >= 0 ? l : r;
        }
        if (src >= 0) {
          s.speeds[k] = s.speeds[static_cast<std::size_t>(src)];
          any = true;
        }
      }
      return any;
    };
    const bool has_real = std::any_of(s.imputed.begin(), s.imputed.end(), [](auto v) { return v == 0; });
    if (has_real) {
      fill([&](std::size_t k) { return present[k] && s.imputed[k] == 0; });
    } else {
      fill([&](std::size_t k) { return present[k] != 0; });
    }
    data.series.push_back(std::move(s));
  }
  return data;
}

void write_speed_csv(const std::string& path, const SpeedDataset& data) {
  auto out = csv::open_output(path);
  out << "station_id,timestamp_iso8601,mean_speed,imputed\n";
  for (const auto& s : data.series) {
    for (std::size_t k = 0; k < s.size(); ++k) {
      const std::int64_t local = (s.start_slot + static_cast<std::int64_t>(k)) * kSlotMinutes;
      out << s.station_id << ',' << format_timestamp(local, data.utc_offset_minutes) << ','
          << csv::format_double(s.speeds[k]) << ',' << (s.imputed[k] ? 1 : 0) << '\n';
    }
  }
}

double completeness(const SpeedSeries& series) {
  if (series.size() == 0) throw DomainError("completeness of an empty series is undefined");
  const auto real = std::count(series.imputed.begin(), series.imputed.end(), std::uint8_t{0});
  return static_cast<double>(real) / static_cast<double>(series.size());
}

FilteredDataset filter_stations(const SpeedDataset& speeds, const std::vector<StationMeta>& meta,
                                double min_completeness) {
  if (!(min_completeness >= 0.0 && min_completeness <= 1.0)) {
    throw ParameterError("min_completeness must lie in [0, 1]");
  }
  std::unordered_map<std::string, const StationMeta*> by_id;
  for (const auto& m : meta) by_id.emplace(m.station_id, &m);

  FilteredDataset out;
  out.speeds.utc_offset_minutes = speeds.utc_offset_minutes;
  for (const auto& s : speeds.series) {
    const auto it = by_id.find(s.station_id);
    if (it == by_id.end()) {
      throw ConsistencyError("station " + s.station_id + " has speeds but no metadata");
    }
    if (completeness(s) >= min_completeness) {
      out.speeds.series.push_back(s);
      out.meta.push_back(*it->second);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Station metadata

std::vector<StationMeta> load_station_meta(const std::string& path) {
  csv::Reader reader(path);
  std::vector<StationMeta> out;
  std::unordered_set<std::string> seen;
  bool first = true;
  while (reader.next()) {
    const auto& f = reader.fields();
    if (first && is_header(f)) {
      first = false;
      continue;
    }
    first = false;
    reader.expect_columns(6);
    StationMeta m;
    m.station_id = f[0];
    if (m.station_id.empty()) reader.fail("empty station_id");
    if (!seen.insert(m.station_id).second) reader.fail("duplicate station_id " + m.station_id);
    m.road = f[1];
    if (!f[2].empty()) {
      m.direction = parse_direction(f[2]);
      if (!m.direction) reader.fail("direction must be one of N, S, E, W");
    }
    m.latitude = reader.field_double(3);
    m.longitude = reader.field_double(4);
    m.sensor_type = f[5];
    out.push_back(std::move(m));
  }
  return out;
}

void write_station_meta(const std::string& path, const std::vector<StationMeta>& meta) {
  auto out = csv::open_output(path);
  out << "station_id,road,direction,lat,lon,type\n";
  for (const auto& m : meta) {
    out << m.station_id << ',' << m.road << ',';
    if (m.direction) out << direction_code(*m.direction);
    out << ',' << csv::format_double(m.latitude) << ',' << csv::format_double(m.longitude) << ','
        << m.sensor_type << '\n';
  }
}

// ---------------------------------------------------------------------------
// Drive times

DriveTimeMatrix::DriveTimeMatrix(std::vector<std::string> station_ids, std::vector<double> minutes)
    : ids_(std::move(station_ids)), minutes_(std::move(minutes)) {
  const std::size_t n = ids_.size();
  if (minutes_.size() != n * n) throw ValidationError("drive-time matrix is not square");
  std::unordered_set<std::string> seen;
  for (const auto& id : ids_) {
    if (!seen.insert(id).second) throw ValidationError("duplicate station id " + id + " in drive-time matrix");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = minutes_[i * n + j];
      if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError("drive time " + ids_[i] + "->" + ids_[j] + " must be finite and >= 0");
      }
      if (i == j && v != 0.0) throw ValidationError("drive time diagonal for " + ids_[i] + " must be 0");
    }
  }
}

std::optional<std::size_t> DriveTimeMatrix::index_of(const std::string& id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

DriveTimeMatrix DriveTimeMatrix::restricted_to(const std::vector<std::string>& ids) const {
  std::vector<std::size_t> idx;
  idx.reserve(ids.size());
  for (const auto& id : ids) {
    const auto k = index_of(id);
    if (!k) throw ConsistencyError("station " + id + " missing from drive-time matrix");
    idx.push_back(*k);
  }
  std::vector<double> m(ids.size() * ids.size());
  for (std::size_t a = 0; a < ids.size(); ++a) {
    for (std::size_t b = 0; b < ids.size(); ++b) m[a * ids.size() + b] = (*this)(idx[a], idx[b]);
  }
  return DriveTimeMatrix(ids, std::move(m));
}

DriveTimeMatrix load_drive_times(const std::string& path) {
  csv::Reader reader(path);
  if (!reader.next()) throw ValidationError(path + ": empty drive-time file");
  const std::vector<std::string> header(reader.fields().begin() + 1, reader.fields().end());
  const std::size_t n = header.size();
  std::map<std::string, std::size_t> column;
  for (std::size_t j = 0; j < n; ++j) {
    if (!column.emplace(header[j], j).second) reader.fail("duplicate column " + header[j]);
  }

  std::vector<double> minutes(n * n, 0.0);
  std::vector<std::uint8_t> filled(n, 0);
  std::size_t rows = 0;
  while (reader.next()) {
    const auto& f = reader.fields();
    if (f.size() != n + 1) throw ValidationError(path + ":" + std::to_string(reader.line_number()) + ": matrix is not square");
    const auto it = column.find(f[0]);
    if (it == column.end()) reader.fail("row station " + f[0] + " does not appear in the header");
    if (filled[it->second]) reader.fail("duplicate row for " + f[0]);
    filled[it->second] = 1;
    for (std::size_t j = 0; j < n; ++j) minutes[it->second * n + j] = reader.field_double(j + 1);
    ++rows;
  }
  if (rows != n) throw ValidationError(path + ": matrix is not square (" + std::to_string(rows) + " rows, " +
                                       std::to_string(n) + " columns)");
  return DriveTimeMatrix(header, std::move(minutes));
}

void write_drive_times(const std::string& path, const DriveTimeMatrix& d) {
  auto out = csv::open_output(path);
  out << "station_id";
  for (const auto& id : d.station_ids()) out << ',' << id;
  out << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    out << d.station_ids()[i];
    for (std::size_t j = 0; j < d.size(); ++j) out << ',' << csv::format_double(d(i, j));
    out << '\n';
  }
}

} // namespace nexica
