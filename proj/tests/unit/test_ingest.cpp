#include "nexica/error.hpp"
#include "nexica/ingest.hpp"
#include "nexica/timeparse.hpp"
#include "unit/scratch.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace nexica;

TEST_CASE("timestamps parse in ISO and PeMS forms") {
  const auto a = parse_timestamp("2024-01-01T00:05:00Z");
  REQUIRE(a);
  CHECK(a->utc_offset_minutes == 0);
  const auto b = parse_timestamp("01/01/2024 00:05:00");
  REQUIRE(b);
  CHECK(b->civil_minutes == a->civil_minutes);
  CHECK_FALSE(b->utc_offset_minutes);
  const auto c = parse_timestamp("2024-01-01 08:05-08:00");
  REQUIRE(c);
  CHECK(c->utc_minutes() == a->utc_minutes() + 16 * 60);
  CHECK_FALSE(parse_timestamp("2024-13-01T00:00"));
  CHECK_FALSE(parse_timestamp("yesterday"));
}

TEST_CASE("week slots are Monday-anchored") {
  const auto monday = parse_timestamp("2024-01-01T00:00");  // a Monday
  REQUIRE(monday);
  const auto slot = monday->civil_minutes / kSlotMinutes;
  CHECK(week_slot(slot) == 0);
  CHECK(week_slot(slot + 10 * 12) == 120);
  CHECK(week_slot(slot + kSlotsPerWeek) == 0);
  CHECK(week_slot(slot - 1) == kSlotsPerWeek - 1);
}

TEST_CASE("three contiguous rows make one series of length 3") {
  Scratch s("ingest");
  const auto p = s.write("speeds.csv",
                         "station_id,timestamp_iso8601,mean_speed,imputed\n"
                         "A,2024-01-01T00:00,60,0\n"
                         "A,2024-01-01T00:05,61.5,0\n"
                         "A,2024-01-01T00:10,59,1\n");
  const auto d = load_speed_csv(p);
  REQUIRE(d.series.size() == 1);
  CHECK(d.series[0].size() == 3);
  CHECK(d.series[0].speeds[1] == 61.5);
  CHECK(d.series[0].imputed == Mask{0, 0, 1});
}

TEST_CASE("a missing row becomes an imputed slot copying a neighbour") {
  Scratch s("ingest");
  const auto p = s.write("speeds.csv",
                         "station_id,timestamp_iso8601,mean_speed,imputed\n"
                         "A,2024-01-01T00:10,50,0\n"
                         "A,2024-01-01T00:00,60,0\n");
  const auto d = load_speed_csv(p);
  REQUIRE(d.series[0].size() == 3);
  CHECK(d.series[0].imputed == Mask{0, 1, 0});
  CHECK(d.series[0].speeds[1] == 60.0);
  CHECK(completeness(d.series[0]) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("stations are aligned to a common slot range") {
  Scratch s("ingest");
  const auto p = s.write("speeds.csv",
                         "station_id,timestamp_iso8601,mean_speed,imputed\n"
                         "A,2024-01-01T00:00,60,0\n"
                         "A,2024-01-01T00:05,60,0\n"
                         "B,2024-01-01T00:05,40,0\n"
                         "B,2024-01-01T00:10,40,0\n");
  const auto d = load_speed_csv(p);
  REQUIRE(d.series.size() == 2);
  CHECK(d.slot_count() == 3);
  CHECK(d.series[0].imputed == Mask{0, 0, 1});
  CHECK(d.series[1].imputed == Mask{1, 0, 0});
}

TEST_CASE("speed loader errors") {
  Scratch s("ingest");
  SUBCASE("off-grid timestamp is a format error") {
    const auto p = s.write("a.csv", "station_id,timestamp_iso8601,mean_speed,imputed\nA,2024-01-01T00:03,60,0\n");
    CHECK_THROWS_AS(load_speed_csv(p), FormatError);
  }
  SUBCASE("malformed row names its line") {
    const auto p = s.write("b.csv", "station_id,timestamp_iso8601,mean_speed,imputed\nA,2024-01-01T00:00,60,0\nA,x,1\n");
    try {
      load_speed_csv(p);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
  }
  SUBCASE("negative speed") {
    const auto p = s.write("c.csv", "station_id,timestamp_iso8601,mean_speed,imputed\nA,2024-01-01T00:00,-1,0\n");
    CHECK_THROWS_AS(load_speed_csv(p), ParseError);
  }
  SUBCASE("duplicate timestamp") {
    const auto p = s.write("d.csv",
                           "station_id,timestamp_iso8601,mean_speed,imputed\nA,2024-01-01T00:00,1,0\n"
                           "A,2024-01-01T00:00,2,0\n");
    CHECK_THROWS_AS(load_speed_csv(p), FormatError);
  }
}

TEST_CASE("speed CSV round-trips bit-exactly") {
  Scratch s("ingest");
  SpeedDataset d;
  d.utc_offset_minutes = -480;
  for (int k = 0; k < 3; ++k) {
    SpeedSeries ser;
    ser.station_id = "st" + std::to_string(k);
    ser.start_slot = 5000000 + 0;
    for (int t = 0; t < 50; ++t) {
      ser.speeds.push_back(0.1 * t + 1.0 / (k + 3.0));
      ser.imputed.push_back(static_cast<std::uint8_t>((t * 7 + k) % 5 == 0));
    }
    d.series.push_back(ser);
  }
  write_speed_csv(s.path("a.csv"), d);
  const auto back = load_speed_csv(s.path("a.csv"));
  REQUIRE(back.series.size() == 3);
  CHECK(back.utc_offset_minutes == -480);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(back.series[k].start_slot == d.series[k].start_slot);
    CHECK(back.series[k].speeds == d.series[k].speeds);
    CHECK(back.series[k].imputed == d.series[k].imputed);
  }
  write_speed_csv(s.path("b.csv"), back);
  CHECK(slurp(s.path("a.csv")) == slurp(s.path("b.csv")));
}

TEST_CASE("completeness") {
  SpeedSeries s;
  s.speeds.assign(10, 60.0);
  s.imputed.assign(10, 0);
  CHECK(completeness(s) == 1.0);
  s.imputed[3] = 1;
  CHECK(completeness(s) == doctest::Approx(0.9));
  CHECK_THROWS_AS(completeness(SpeedSeries{}), DomainError);
}

namespace {

SpeedDataset two_stations(double c0, double c1) {
  SpeedDataset d;
  for (auto [id, c] : {std::pair{"A", c0}, std::pair{"B", c1}}) {
    SpeedSeries s;
    s.station_id = id;
    s.speeds.assign(100, 50.0);
    s.imputed.assign(100, 0);
    std::fill(s.imputed.begin(), s.imputed.begin() + static_cast<long>((1.0 - c) * 100 + 0.5), 1);
    d.series.push_back(s);
  }
  return d;
}

std::vector<StationMeta> meta_for(std::initializer_list<const char*> ids) {
  std::vector<StationMeta> m;
  for (auto id : ids) m.push_back({id, "I-5", Direction::N, 0, 0, "ML"});
  return m;
}

} // namespace

TEST_CASE("filter_stations keeps exactly the complete-enough stations") {
  const auto d = two_stations(0.95, 0.85);
  const auto meta = meta_for({"A", "B"});
  CHECK(filter_stations(d, meta, 0.0).speeds.series.size() == 2);
  const auto f = filter_stations(d, meta, 0.9);
  REQUIRE(f.speeds.series.size() == 1);
  CHECK(f.speeds.series[0].station_id == "A");
  CHECK(f.meta[0].station_id == "A");
  CHECK_THROWS_AS(filter_stations(d, meta_for({"A"}), 0.5), ConsistencyError);
  CHECK_THROWS_AS(filter_stations(d, meta, 1.5), ParameterError);
}

TEST_CASE("filter_stations is monotone in the threshold") {
  const auto d = two_stations(0.93, 0.71);
  const auto meta = meta_for({"A", "B"});
  std::size_t prev = 3;
  for (double th = 0.0; th <= 1.0; th += 0.01) {
    const auto n = filter_stations(d, meta, th).speeds.series.size();
    CHECK(n <= prev);
    prev = n;
  }
}

TEST_CASE("station metadata round-trips and rejects bad directions") {
  Scratch s("ingest");
  std::vector<StationMeta> meta = {{"1", "I-105", Direction::E, 33.9, -118.2, "ML"},
                                   {"2", "", std::nullopt, 34.0, -118.1, "OR"}};
  write_station_meta(s.path("m.csv"), meta);
  const auto back = load_station_meta(s.path("m.csv"));
  REQUIRE(back.size() == 2);
  CHECK(back[0].has_road_direction());
  CHECK(back[0].direction == Direction::E);
  CHECK_FALSE(back[1].has_road_direction());
  const auto bad = s.write("bad.csv", "station_id,road,direction,lat,lon,type\n1,I-5,Q,0,0,ML\n");
  CHECK_THROWS_AS(load_station_meta(bad), ParseError);
}

TEST_CASE("drive-time matrix validation") {
  Scratch s("ingest");
  const auto ok = s.write("ok.csv", "station_id,a,b\na,0,10\nb,12,0\n");
  const auto d = load_drive_times(ok);
  CHECK(d(0, 1) == 10.0);
  CHECK(d(1, 0) == 12.0);
  CHECK_THROWS_AS(load_drive_times(s.write("diag.csv", "station_id,a,b\na,3,10\nb,12,0\n")), ValidationError);
  CHECK_THROWS_AS(load_drive_times(s.write("neg.csv", "station_id,a,b\na,0,-1\nb,12,0\n")), ValidationError);
  CHECK_THROWS((void)load_drive_times(s.write("ns.csv", "station_id,a,b\na,0,1\n")));

  const auto r = d.restricted_to({"b", "a"});
  CHECK(r(0, 1) == 12.0);
  CHECK_THROWS_AS((void)d.restricted_to({"c"}), ConsistencyError);
}

TEST_CASE("a nonzero diagonal is rejected under every row permutation") {
  Scratch s("ingest");
  std::vector<int> perm = {0, 1, 2};
  const double m[3][3] = {{0, 4, 5}, {6, 2, 7}, {8, 9, 0}};
  const char* ids[3] = {"x", "y", "z"};
  do {
    std::string text = "station_id,x,y,z\n";
    for (int r : perm) {
      text += ids[r];
      for (int c = 0; c < 3; ++c) text += "," + std::to_string(m[r][c]);
      text += "\n";
    }
    CHECK_THROWS_AS(load_drive_times(s.write("p.csv", text)), ValidationError);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("permuted drive-time rows are matched by id") {
  Scratch s("ingest");
  const auto d = load_drive_times(s.write("p.csv", "station_id,a,b,c\nc,7,8,0\na,0,1,2\nb,3,0,5\n"));
  CHECK(d(0, 2) == 2.0);
  CHECK(d(2, 0) == 7.0);
  CHECK(d(1, 2) == 5.0);
}
