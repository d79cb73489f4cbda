#pragma once

#include "nexica/ingest.hpp"

#include <string>
#include <vector>

namespace nexica {

enum class FlowDirection {
  FlowsIToJ,  // D_ij < D_ji: traffic runs i -> j, so slowdowns at j propagate back to i
  FlowsJToI,
  Ambiguous,
};

FlowDirection flow_direction(std::size_t i, std::size_t j, const DriveTimeMatrix& d);

struct DatasetSpec {
  int negatives_per_positive = 1;  // 1 => balanced 1:1
  int max_lag = 8;
  double propagation_kph = 20.0;   // upstream congestion propagation speed
  double free_flow_kph = 100.0;    // converts free-flow drive time to distance
  int soft_threshold = 1;          // extra lags accepted beyond the base lag

  void validate() const;
};

// Lags at which a slowdown is expected to arrive, given the free-flow drive
// time from the affected station to the cause. Base lag is the propagation
// time in slots, rounded half up; the set is {base, ..., base + soft} clipped
// to [1, max_lag], and empty once base exceeds max_lag.
std::vector<int> expected_lags(double drive_time_minutes, const DatasetSpec& spec);

enum class Label { Positive, Negative };

struct LabeledPair {
  std::string cause_id;
  std::string effect_id;
  int lag = 0;
  Label label = Label::Negative;
  std::string rule;
  double drive_time = 0.0;  // D[cause][effect], minutes
};

namespace rule {
inline constexpr const char* kPositive = "same_road_upstream_expected_lag";
inline constexpr const char* kCrossRoad = "cross_road_or_direction";
inline constexpr const char* kLagOutsideExpected = "lag_outside_expected";
inline constexpr const char* kDownstream = "downstream_propagation";
inline constexpr const char* kAmbiguous = "ambiguous_flow_direction";
inline constexpr const char* kTooFar = "beyond_max_lag";
inline constexpr const char* kPlanted = "planted_edge";
inline constexpr const char* kNotPlanted = "not_planted";
} // namespace rule

struct GroundTruth {
  std::vector<LabeledPair> positives;
  std::vector<LabeledPair> rule_negatives;  // labeled negative by an explicit rule
  // Every non-positive tuple (rule negatives included), sorted by drive time
  // descending; ties keep sweep order. Negatives for a dataset come from here.
  std::vector<LabeledPair> pool;
  std::vector<std::string> warnings;
  std::size_t candidates = 0;
};

// Stations lacking road or direction are excluded with a warning.
GroundTruth label_pairs(const std::vector<StationMeta>& stations, const DriveTimeMatrix& d, const DatasetSpec& spec);

struct PlantedTuple {
  std::string cause_id;
  std::string effect_id;
  int lag = 0;
};

// Ground truth from an explicit list of causal tuples (e.g. a synthetic
// network's truth file). Everything else goes to the pool.
GroundTruth label_from_truth(const std::vector<std::string>& station_ids, const DriveTimeMatrix& d,
                             const std::vector<PlantedTuple>& truth, int max_lag);

struct LabeledDataset {
  std::vector<LabeledPair> samples;  // positives first, then negatives
  std::size_t positives = 0;
  std::size_t negatives = 0;
  double min_negative_drive_time = 0.0;
  std::vector<std::string> warnings;
};

// All positives plus the first negatives_per_positive * |positives| pool
// entries (the farthest pairs).
LabeledDataset build_dataset(const GroundTruth& truth, int negatives_per_positive);

// All positives plus the whole pool.
LabeledDataset full_dataset(const GroundTruth& truth);

std::string to_string(Label l);

// "cause,effect,lag,label,rule,drive_time"
void write_labels_csv(const std::string& path, const std::vector<LabeledPair>& labels);
std::vector<LabeledPair> load_labels_csv(const std::string& path);

} // namespace nexica
