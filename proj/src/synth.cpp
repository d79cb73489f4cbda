#include "nexica/synth.hpp"

#include "nexica/csv.hpp"
#include "nexica/error.hpp"
#include "nexica/rng.hpp"
#include "nexica/timeparse.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

namespace nexica {

namespace {

// Randomness streams under (seed, station, slot).
constexpr std::uint64_t kSpontaneous = 1;
constexpr std::uint64_t kStationRate = 2;
constexpr std::uint64_t kCausedBase = 0x100;

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

std::string synth_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "S%03zu", i);
  return buf;
}

// Kahn layering of the edge graph; empty when it has a cycle.
std::vector<std::vector<std::size_t>> topo_levels(std::size_t n, const std::vector<PlantedEdge>& edges) {
  std::vector<int> indeg(n, 0);
  std::vector<std::vector<std::size_t>> out(n);
  for (const auto& e : edges) {
    ++indeg[static_cast<std::size_t>(e.effect)];
    out[static_cast<std::size_t>(e.cause)].push_back(static_cast<std::size_t>(e.effect));
  }
  std::vector<std::vector<std::size_t>> levels;
  std::vector<std::size_t> frontier;
  for (std::size_t i = 0; i < n; ++i) {
    if (indeg[i] == 0) frontier.push_back(i);
  }
  std::size_t seen = 0;
  while (!frontier.empty()) {
    seen += frontier.size();
    std::vector<std::size_t> next;
    for (auto i : frontier) {
      for (auto j : out[i]) {
        if (--indeg[j] == 0) next.push_back(j);
      }
    }
    levels.push_back(std::move(frontier));
    frontier = std::move(next);
  }
  if (seen != n) return {};
  return levels;
}

} // namespace

void SynthSpec::validate() const {
  if (n_slots == 0) throw ParameterError("n_slots must be positive");
  if (n_stations == 0) throw ParameterError("n_stations must be positive");
  if (!is_probability(p_s)) throw ParameterError("p_s must lie in [0, 1]");
  if (!(p_s_spread >= 1.0) || !std::isfinite(p_s_spread)) throw ParameterError("p_s_spread must be >= 1");
  if (max_lag < 1) throw ParameterError("max_lag must be >= 1");
  std::set<std::pair<int, int>> seen;
  for (const auto& e : edges) {
    const std::string tag = "edge " + std::to_string(e.cause) + "->" + std::to_string(e.effect) + ": ";
    if (e.cause < 0 || e.effect < 0 || static_cast<std::size_t>(e.cause) >= n_stations ||
        static_cast<std::size_t>(e.effect) >= n_stations) {
      throw ParameterError(tag + "endpoint out of range");
    }
    if (e.cause == e.effect) throw ParameterError(tag + "self-edge rejected");
    if (e.lag < 1 || e.lag > max_lag) throw ParameterError(tag + "lag outside [1, max_lag]");
    if (!is_probability(e.p_c)) throw ParameterError(tag + "p_c must lie in [0, 1]");
    if (!seen.emplace(e.cause, e.effect).second) throw ParameterError(tag + "duplicate edge");
  }
}

std::vector<PlantedEdge> random_edges(std::size_t n_stations, std::size_t count, double p_c_min, double p_c_max,
                                      int max_lag, std::uint64_t seed) {
  if (n_stations < 2) throw ParameterError("random edges need at least two stations");
  if (count > n_stations * (n_stations - 1)) throw ParameterError("more edges requested than ordered pairs");
  if (!is_probability(p_c_min) || !is_probability(p_c_max) || p_c_min > p_c_max) {
    throw ParameterError("p_c range must satisfy 0 <= min <= max <= 1");
  }
  if (max_lag < 1) throw ParameterError("max_lag must be >= 1");
  SplitMix64 rng(stage_seed(seed, "edges"));
  std::set<std::pair<int, int>> used;
  std::vector<PlantedEdge> edges;
  while (edges.size() < count) {
    const int c = static_cast<int>(rng.below(n_stations));
    const int e = static_cast<int>(rng.below(n_stations));
    if (c == e || !used.emplace(c, e).second) continue;
    PlantedEdge edge;
    edge.cause = c;
    edge.effect = e;
    edge.lag = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_lag)));
    edge.p_c = p_c_min + (p_c_max - p_c_min) * rng.uniform();
    edges.push_back(edge);
  }
  return edges;
}

SynthNetwork generate_network(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_stations;
  const std::size_t m = spec.n_slots;

  SynthNetwork net;
  net.edges = spec.edges;
  net.station_ids.resize(n);
  net.station_p_s.resize(n);
  net.events.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    net.station_ids[i] = synth_id(i);
    double p = spec.p_s;
    if (spec.p_s_spread > 1.0) {
      const double u = 2.0 * to_unit(key_hash(spec.seed, i, ~0ULL, kStationRate)) - 1.0;
      p = std::min(1.0, spec.p_s * std::pow(spec.p_s_spread, u));
    }
    net.station_p_s[i] = p;
    net.events[i].station_id = net.station_ids[i];
    net.events[i].events.assign(m, 0);
  }

  std::vector<std::vector<std::size_t>> incoming(n);
  for (std::size_t k = 0; k < spec.edges.size(); ++k) incoming[static_cast<std::size_t>(spec.edges[k].effect)].push_back(k);

  auto fill_slot = [&](std::size_t s, std::size_t t) {
    bool fire = to_unit(key_hash(spec.seed, s, t, kSpontaneous)) < net.station_p_s[s];
    for (auto k : incoming[s]) {
      if (fire) break;
      const auto& e = spec.edges[k];
      const auto lag = static_cast<std::size_t>(e.lag);
      if (t < lag || !net.events[static_cast<std::size_t>(e.cause)].events[t - lag]) continue;
      fire = to_unit(key_hash(spec.seed, s, t, kCausedBase + k)) < e.p_c;
    }
    net.events[s].events[t] = fire ? 1 : 0;
  };

  const auto levels = topo_levels(n, spec.edges);
  if (!levels.empty()) {
    for (const auto& level : levels) {
#pragma omp parallel for schedule(dynamic, 1)
      for (std::size_t k = 0; k < level.size(); ++k) {
        for (std::size_t t = 0; t < m; ++t) fill_slot(level[k], t);
      }
    }
  } else {
    // Cycles across stations are fine because every lag is >= 1; walk time-major.
    for (std::size_t t = 0; t < m; ++t) {
      for (std::size_t s = 0; s < n; ++s) fill_slot(s, t);
    }
  }
  for (auto& ev : net.events) ev.slowdown_mask = ev.events;
  return net;
}

std::pair<EventSeries, EventSeries> generate_event_pair(double p_s, double p_c, int lag, std::size_t n_slots,
                                                        std::uint64_t seed) {
  SynthSpec spec;
  spec.n_slots = n_slots;
  spec.p_s = p_s;
  spec.n_stations = 2;
  spec.seed = seed;
  spec.max_lag = std::max(lag, 1);
  spec.edges.push_back({0, 1, lag, p_c});
  auto net = generate_network(spec);
  return {std::move(net.events[0]), std::move(net.events[1])};
}

SynthArtifacts render_network(const SynthNetwork& network, const SynthRenderOptions& options, std::uint64_t seed) {
  if (!(options.slowdown_factor > 0.0 && options.slowdown_factor < 1.0)) {
    throw ParameterError("slowdown_factor must lie in (0, 1)");
  }
  if (options.max_run < 1) throw ParameterError("max_run must be >= 1");
  if (!is_probability(options.imputed_fraction) || options.imputed_fraction >= 1.0) {
    throw ParameterError("imputed_fraction must lie in [0, 1)");
  }
  if (!(options.noise >= 0.0 && options.noise < 0.5)) throw ParameterError("noise must lie in [0, 0.5)");
  const auto ts = parse_timestamp(options.start);
  if (!ts || ts->seconds != 0 || ts->civil_minutes % kSlotMinutes != 0) {
    throw ParameterError("render start must be a timestamp on a 5-minute boundary");
  }

  const std::size_t n = network.events.size();
  const std::uint64_t rs = stage_seed(seed, "render");
  SynthArtifacts art;
  art.speeds.utc_offset_minutes = ts->utc_offset_minutes.value_or(0);
  art.speeds.series.resize(n);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ev = network.events[i].events;
    const std::size_t m = ev.size();
    auto& s = art.speeds.series[i];
    s.station_id = network.station_ids[i];
    s.start_slot = ts->civil_minutes / kSlotMinutes;
    s.speeds.resize(m);
    s.imputed.assign(m, 0);
    const double scale = 0.95 + 0.1 * to_unit(key_hash(rs, i, ~0ULL, 1));
    std::size_t slow_until = 0;
    for (std::size_t t = 0; t < m; ++t) {
      const int ws = week_slot(s.start_slot + static_cast<std::int64_t>(t));
      const int day = ws / kSlotsPerDay;
      const int minute = (ws % kSlotsPerDay) * kSlotMinutes;
      double base = options.free_flow_mph * scale;
      if (day < 5 && minute >= 7 * 60 && minute < 9 * 60) base *= 0.8;
      if (day < 5 && minute >= 16 * 60 && minute < 19 * 60) base *= 0.75;
      const double jitter = 1.0 + options.noise * (2.0 * to_unit(key_hash(rs, i, t, 2)) - 1.0);

      if (ev[t]) {
        // The run stops one slot short of the next event so its leading edge survives.
        std::size_t len = 1 + static_cast<std::size_t>(to_unit(key_hash(rs, i, t, 3)) * options.max_run);
        std::size_t end = t + std::min<std::size_t>(len, static_cast<std::size_t>(options.max_run));
        for (std::size_t u = t + 1; u <= end && u < m; ++u) {
          if (ev[u]) {
            end = std::max(t + 1, u - 1);
            break;
          }
        }
        slow_until = end;
      }
      const bool slow = t < slow_until;
      s.speeds[t] = base * jitter * (slow ? options.slowdown_factor : 1.0);
      if (!slow && options.imputed_fraction > 0.0 && to_unit(key_hash(rs, i, t, 4)) < options.imputed_fraction) {
        s.imputed[t] = 1;
      }
    }
  }

  const char dirs[] = {'N', 'S', 'E', 'W'};
  std::vector<double> x(n), y(n);
  art.meta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = options.area_km * to_unit(key_hash(rs, i, ~0ULL, 5));
    y[i] = options.area_km * to_unit(key_hash(rs, i, ~0ULL, 6));
    auto& meta = art.meta[i];
    meta.station_id = network.station_ids[i];
    meta.road = "SR-" + std::to_string(i % 4 + 1);
    meta.direction = parse_direction(std::string(1, dirs[i % 4]));
    meta.latitude = 34.0 + y[i] / 111.0;
    meta.longitude = -118.5 + x[i] / 92.0;
    meta.sensor_type = "ML";
  }
  std::vector<double> minutes(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double km = std::hypot(x[i] - x[j], y[i] - y[j]);
      minutes[i * n + j] = 0.5 + km / 100.0 * 60.0 * (1.0 + 0.05 * to_unit(key_hash(rs, i, j, 7)));
    }
  }
  art.drive_times = DriveTimeMatrix(network.station_ids, std::move(minutes));
  return art;
}

SynthConfig load_synth_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open synth spec: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  SynthConfig cfg;
  auto& s = cfg.spec;
  try {
    s.n_slots = j.value("n_slots", s.n_slots);
    s.p_s = j.value("p_s", s.p_s);
    s.n_stations = j.value("n_stations", s.n_stations);
    s.seed = j.value("seed", s.seed);
    s.p_s_spread = j.value("p_s_spread", s.p_s_spread);
    s.max_lag = j.value("max_lag", s.max_lag);
    if (j.contains("edges")) {
      for (const auto& e : j.at("edges")) {
        s.edges.push_back({e.at("cause").get<int>(), e.at("effect").get<int>(), e.at("lag").get<int>(),
                           e.at("p_c").get<double>()});
      }
    }
    if (j.contains("random_edges")) {
      const auto& r = j.at("random_edges");
      auto extra = random_edges(s.n_stations, r.at("count").get<std::size_t>(), r.value("p_c_min", 0.3),
                                r.value("p_c_max", 0.9), s.max_lag, s.seed);
      for (const auto& e : extra) {
        const bool clash = std::any_of(s.edges.begin(), s.edges.end(),
                                       [&](const PlantedEdge& o) { return o.cause == e.cause && o.effect == e.effect; });
        if (!clash) s.edges.push_back(e);
      }
    }
    if (j.contains("render")) {
      const auto& r = j.at("render");
      auto& o = cfg.render;
      o.start = r.value("start", o.start);
      o.free_flow_mph = r.value("free_flow_mph", o.free_flow_mph);
      o.slowdown_factor = r.value("slowdown_factor", o.slowdown_factor);
      o.max_run = r.value("max_run", o.max_run);
      o.noise = r.value("noise", o.noise);
      o.imputed_fraction = r.value("imputed_fraction", o.imputed_fraction);
      o.area_km = r.value("area_km", o.area_km);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  s.validate();
  return cfg;
}

void write_truth_csv(const std::string& path, const SynthNetwork& network) {
  auto out = csv::open_output(path);
  out << "cause,effect,lag,p_c\n";
  for (const auto& e : network.edges) {
    out << network.station_ids[static_cast<std::size_t>(e.cause)] << ','
        << network.station_ids[static_cast<std::size_t>(e.effect)] << ',' << e.lag << ','
        << csv::format_double(e.p_c) << '\n';
  }
}

std::vector<PlantedTuple> load_truth_csv(const std::string& path) {
  csv::Reader r(path);
  if (!r.next()) r.fail("missing header");
  if (r.fields().size() < 3 || r.fields()[0] != "cause" || r.fields()[1] != "effect" || r.fields()[2] != "lag") {
    r.fail("expected header cause,effect,lag[,p_c]");
  }
  std::vector<PlantedTuple> out;
  while (r.next()) {
    if (r.fields().size() < 3) r.fail("expected at least 3 columns");
    const auto lag = r.field_int(2);
    if (lag < 1) r.fail("lag must be >= 1");
    out.push_back({r.fields()[0], r.fields()[1], static_cast<int>(lag)});
  }
  return out;
}

void write_synth_outputs(const std::string& dir, const SynthNetwork& network, const SynthArtifacts& artifacts) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  write_speed_csv((d / "speeds.csv").string(), artifacts.speeds);
  write_station_meta((d / "meta.csv").string(), artifacts.meta);
  write_drive_times((d / "drive_times.csv").string(), artifacts.drive_times);
  write_events_csv((d / "events.csv").string(), network.events);
  write_truth_csv((d / "truth.csv").string(), network);
}

} // namespace nexica
