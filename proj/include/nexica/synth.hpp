#pragma once

#include "nexica/events.hpp"
#include "nexica/groundtruth.hpp"
#include "nexica/ingest.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace nexica {

struct PlantedEdge {
  int cause = 0;
  int effect = 0;
  int lag = 1;
  double p_c = 0.0;
};

struct SynthSpec {
  std::size_t n_slots = 52416;
  double p_s = 0.05;
  std::vector<PlantedEdge> edges;
  std::size_t n_stations = 2;
  std::uint64_t seed = 0;
  // Per-station spontaneous rates are p_s * spread^u with u uniform in
  // [-1, 1]; 1 gives every station exactly p_s.
  double p_s_spread = 1.0;
  int max_lag = 8;

  void validate() const;
};

// `count` distinct (cause, effect) edges with lags in [1, max_lag] and p_c
// uniform in [p_c_min, p_c_max].
std::vector<PlantedEdge> random_edges(std::size_t n_stations, std::size_t count, double p_c_min, double p_c_max,
                                      int max_lag, std::uint64_t seed);

struct SynthNetwork {
  std::vector<std::string> station_ids;
  std::vector<double> station_p_s;
  std::vector<EventSeries> events;
  std::vector<PlantedEdge> edges;
};

// Every slot of every station fires spontaneously with its rate; for each
// edge, an event at cause slot t also fires the effect at t + lag with
// probability p_c. Draws are keyed by (seed, station, slot, stream), so a
// seed fixes the output exactly.
SynthNetwork generate_network(const SynthSpec& spec);

// Two-station special case: station 0 causes station 1.
std::pair<EventSeries, EventSeries> generate_event_pair(double p_s, double p_c, int lag, std::size_t n_slots,
                                                        std::uint64_t seed);

struct SynthRenderOptions {
  std::string start = "2024-01-01T00:00";  // a Monday
  double free_flow_mph = 65.0;
  double slowdown_factor = 0.5;  // speed multiplier inside a slowdown run
  int max_run = 3;               // slowdown runs last 1..max_run slots
  double noise = 0.01;           // relative speed jitter
  double imputed_fraction = 0.0;
  double area_km = 60.0;
};

struct SynthArtifacts {
  SpeedDataset speeds;
  std::vector<StationMeta> meta;
  DriveTimeMatrix drive_times;
};

// Speeds with a weekly rhythm and a slowdown run starting at every event,
// plus station metadata and a drive-time matrix from random positions.
SynthArtifacts render_network(const SynthNetwork& network, const SynthRenderOptions& options, std::uint64_t seed);

// JSON: {"n_slots", "p_s", "n_stations", "seed", "p_s_spread", "max_lag",
//        "edges": [{"cause","effect","lag","p_c"}],
//        "random_edges": {"count","p_c_min","p_c_max"}, "render": {...}}
struct SynthConfig {
  SynthSpec spec;
  SynthRenderOptions render;
};
SynthConfig load_synth_config(const std::string& path);

// speeds.csv, meta.csv, drive_times.csv, events.csv, truth.csv
void write_synth_outputs(const std::string& dir, const SynthNetwork& network, const SynthArtifacts& artifacts);

// "cause,effect,lag,p_c" with station ids.
void write_truth_csv(const std::string& path, const SynthNetwork& network);
std::vector<PlantedTuple> load_truth_csv(const std::string& path);

} // namespace nexica
