#pragma once

#include "nexica/config.hpp"
#include "nexica/error.hpp"
#include "nexica/evaluate.hpp"
#include "nexica/forest.hpp"
#include "nexica/groundtruth.hpp"
#include "nexica/sweep.hpp"

#include <map>
#include <string>
#include <vector>

namespace nexica {

// A failure inside a named pipeline stage.
class StageError : public Error {
public:
  StageError(std::string stage, const std::string& what) : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

private:
  std::string stage_;
};

// Labelled samples joined to their sweep rows.
struct TrainingSet {
  std::vector<FeatureVector> features;
  std::vector<int> labels;
  std::vector<double> p_c;  // constrained estimate per sample
};

// Throws ConsistencyError naming the first labelled tuple absent from `records`.
TrainingSet join_features(const std::vector<PairRecord>& records, const std::vector<LabeledPair>& labels,
                          FeatureMask mask);

struct EvaluationSummary {
  bool evaluated = false;
  std::string skipped_reason;
  CrossValidation forest;
  RocResult pc_scalar;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

// Forest CV on the counts plus the scalar p_c baseline. Returns
// evaluated=false with a reason when either class is too small to split.
EvaluationSummary evaluate_dataset(const TrainingSet& data, const RunConfig& config);

std::map<std::string, int> case_tally(const std::vector<PairRecord>& records);

struct RunReport {
  std::size_t stations = 0;
  std::size_t tuples = 0;
  std::size_t events = 0;
  EvaluationSummary evaluation;
  std::map<std::string, double> timing;  // seconds per stage
  std::string metrics_path;
};

// events -> pairs -> mle -> labels -> evaluation -> model, writing every
// stage's artifact under config.out_dir. Errors are StageError.
RunReport run_pipeline(const RunConfig& config);

// Files every completed run directory holds.
std::vector<std::string> required_artifacts();

// Human-readable summary of a run directory. Throws Error listing missing
// artifacts when the run is incomplete.
std::string report(const std::string& run_dir, int top_k = 10);

struct GridRow {
  double alpha = 0.0;
  int tau = 0;
  double balanced_auc = 0.0;
  double full_auc = 0.0;
  double runtime_s = 0.0;
};

// Balanced and full-dataset CV AUC for every (alpha, tau) on the config's
// grid axes; also writes out_dir/grid.csv.
std::vector<GridRow> grid_search(const RunConfig& config);
void write_grid_csv(const std::string& path, const std::vector<GridRow>& rows);

} // namespace nexica
