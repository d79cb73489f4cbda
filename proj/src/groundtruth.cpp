#include "nexica/groundtruth.hpp"

#include "nexica/csv.hpp"
#include "nexica/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

namespace nexica {

FlowDirection flow_direction(std::size_t i, std::size_t j, const DriveTimeMatrix& d) {
  if (d(i, j) < d(j, i)) return FlowDirection::FlowsIToJ;
  if (d(i, j) > d(j, i)) return FlowDirection::FlowsJToI;
  return FlowDirection::Ambiguous;
}

void DatasetSpec::validate() const {
  if (negatives_per_positive < 1) throw ParameterError("ratio must be at least 1:1");
  if (max_lag < 1) throw ParameterError("max_lag must be >= 1");
  if (!(propagation_kph > 0.0) || !(free_flow_kph > 0.0)) throw ParameterError("speeds must be > 0");
  if (soft_threshold < 0) throw ParameterError("soft_threshold must be >= 0");
}

std::vector<int> expected_lags(double drive_time_minutes, const DatasetSpec& spec) {
  if (!(drive_time_minutes >= 0.0)) throw ParameterError("drive time must be >= 0");
  const double distance_km = drive_time_minutes * spec.free_flow_kph / 60.0;
  const double propagation_minutes = distance_km / spec.propagation_kph * 60.0;
  const double base = std::floor(propagation_minutes / 5.0 + 0.5);
  std::vector<int> lags;
  if (base > spec.max_lag) return lags;
  const int b = static_cast<int>(base);
  for (int lag = b; lag <= b + spec.soft_threshold; ++lag) {
    if (lag >= 1 && lag <= spec.max_lag) lags.push_back(lag);
  }
  return lags;
}

namespace {

void sort_pool(std::vector<LabeledPair>& pool) {
  std::stable_sort(pool.begin(), pool.end(),
                   [](const LabeledPair& a, const LabeledPair& b) { return a.drive_time > b.drive_time; });
}

} // namespace

GroundTruth label_pairs(const std::vector<StationMeta>& stations, const DriveTimeMatrix& d, const DatasetSpec& spec) {
  spec.validate();
  GroundTruth gt;

  std::vector<const StationMeta*> usable;
  std::vector<std::size_t> column;
  for (const auto& s : stations) {
    const auto k = d.index_of(s.station_id);
    if (!k) throw ConsistencyError("station " + s.station_id + " missing from drive-time matrix");
    if (!s.has_road_direction()) {
      gt.warnings.push_back("station " + s.station_id + " lacks road/direction metadata; excluded");
      continue;
    }
    usable.push_back(&s);
    column.push_back(*k);
  }

  const std::size_t n = usable.size();
  gt.candidates = n < 2 ? 0 : n * (n - 1) * static_cast<std::size_t>(spec.max_lag);

  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const auto& cause = *usable[a];
      const auto& effect = *usable[b];
      const std::size_t ci = column[a], ei = column[b];
      const double forward = d(ci, ei);

      const bool same_road = cause.road == effect.road && cause.direction == effect.direction;
      const char* pair_rule = nullptr;
      std::vector<int> lags;
      if (!same_road) {
        pair_rule = rule::kCrossRoad;
      } else {
        // The cause must sit downstream: traffic flows effect -> cause.
        switch (flow_direction(ei, ci, d)) {
          case FlowDirection::FlowsIToJ:
            lags = expected_lags(d(ei, ci), spec);
            if (lags.empty()) pair_rule = rule::kTooFar;
            break;
          case FlowDirection::FlowsJToI: pair_rule = rule::kDownstream; break;
          case FlowDirection::Ambiguous: pair_rule = rule::kAmbiguous; break;
        }
      }

      for (int lag = 1; lag <= spec.max_lag; ++lag) {
        LabeledPair p{cause.station_id, effect.station_id, lag, Label::Negative, "", forward};
        if (pair_rule) {
          p.rule = pair_rule;
          if (pair_rule == rule::kCrossRoad) gt.rule_negatives.push_back(p);
          gt.pool.push_back(std::move(p));
        } else if (std::find(lags.begin(), lags.end(), lag) != lags.end()) {
          p.label = Label::Positive;
          p.rule = rule::kPositive;
          gt.positives.push_back(std::move(p));
        } else {
          p.rule = rule::kLagOutsideExpected;
          gt.rule_negatives.push_back(p);
          gt.pool.push_back(std::move(p));
        }
      }
    }
  }
  sort_pool(gt.pool);
  return gt;
}

GroundTruth label_from_truth(const std::vector<std::string>& station_ids, const DriveTimeMatrix& d,
                             const std::vector<PlantedTuple>& truth, int max_lag) {
  if (max_lag < 1) throw ParameterError("max_lag must be >= 1");
  std::set<std::tuple<std::string, std::string, int>> planted;
  for (const auto& t : truth) planted.emplace(t.cause_id, t.effect_id, t.lag);

  GroundTruth gt;
  std::vector<std::size_t> column;
  for (const auto& id : station_ids) {
    const auto k = d.index_of(id);
    if (!k) throw ConsistencyError("station " + id + " missing from drive-time matrix");
    column.push_back(*k);
  }
  const std::size_t n = station_ids.size();
  gt.candidates = n < 2 ? 0 : n * (n - 1) * static_cast<std::size_t>(max_lag);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      for (int lag = 1; lag <= max_lag; ++lag) {
        LabeledPair p{station_ids[a], station_ids[b], lag, Label::Negative, rule::kNotPlanted, d(column[a], column[b])};
        if (planted.count({p.cause_id, p.effect_id, lag})) {
          p.label = Label::Positive;
          p.rule = rule::kPlanted;
          gt.positives.push_back(std::move(p));
        } else {
          gt.pool.push_back(std::move(p));
        }
      }
    }
  }
  if (gt.positives.size() != planted.size()) {
    gt.warnings.push_back("some truth tuples name unknown stations or lags outside [1, max_lag]");
  }
  sort_pool(gt.pool);
  return gt;
}

namespace {

LabeledDataset assemble(const GroundTruth& truth, std::size_t take) {
  LabeledDataset ds;
  ds.samples = truth.positives;
  ds.positives = truth.positives.size();
  if (take > truth.pool.size()) {
    ds.warnings.push_back("negative pool holds " + std::to_string(truth.pool.size()) + " tuples, " +
                          std::to_string(take) + " requested; taking all");
    take = truth.pool.size();
  }
  ds.min_negative_drive_time = take ? std::numeric_limits<double>::infinity() : 0.0;
  for (std::size_t k = 0; k < take; ++k) {
    LabeledPair p = truth.pool[k];
    p.label = Label::Negative;
    ds.min_negative_drive_time = std::min(ds.min_negative_drive_time, p.drive_time);
    ds.samples.push_back(std::move(p));
  }
  ds.negatives = take;
  return ds;
}

} // namespace

LabeledDataset build_dataset(const GroundTruth& truth, int negatives_per_positive) {
  if (negatives_per_positive < 1) throw ParameterError("ratio must be at least 1:1");
  return assemble(truth, static_cast<std::size_t>(negatives_per_positive) * truth.positives.size());
}

LabeledDataset full_dataset(const GroundTruth& truth) { return assemble(truth, truth.pool.size()); }

std::string to_string(Label l) { return l == Label::Positive ? "positive" : "negative"; }

void write_labels_csv(const std::string& path, const std::vector<LabeledPair>& labels) {
  auto out = csv::open_output(path);
  out << "cause,effect,lag,label,rule,drive_time\n";
  for (const auto& p : labels) {
    out << p.cause_id << ',' << p.effect_id << ',' << p.lag << ',' << (p.label == Label::Positive ? 1 : 0) << ','
        << p.rule << ',' << csv::format_double(p.drive_time) << '\n';
  }
}

std::vector<LabeledPair> load_labels_csv(const std::string& path) {
  csv::Reader reader(path);
  std::vector<LabeledPair> out;
  bool first = true;
  while (reader.next()) {
    const auto& f = reader.fields();
    if (first && !f.empty() && f[0] == "cause") {
      first = false;
      continue;
    }
    first = false;
    reader.expect_columns(6);
    LabeledPair p;
    p.cause_id = f[0];
    p.effect_id = f[1];
    p.lag = static_cast<int>(reader.field_int(2));
    if (f[3] == "1" || f[3] == "positive") {
      p.label = Label::Positive;
    } else if (f[3] == "0" || f[3] == "negative") {
      p.label = Label::Negative;
    } else {
      reader.fail("label must be 0/1 or positive/negative");
    }
    p.rule = f[4];
    p.drive_time = reader.field_double(5);
    out.push_back(std::move(p));
  }
  return out;
}

} // namespace nexica
