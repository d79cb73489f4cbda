#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace nexica {

// Flat "key = value" run configuration. Lines starting with '#' are
// comments. Keys match the field names below.
struct RunConfig {
  std::string speeds;
  std::string meta;
  std::string drive_times;
  std::string truth;  // optional planted-edge file; replaces rule labelling
  std::string out_dir = "nexica_run";

  double alpha = 0.25;
  int tau = 0;
  int max_lag = 8;
  double min_completeness = 0.9;
  int ratio = 1;  // negatives per positive
  double propagation_kph = 20.0;
  double free_flow_kph = 100.0;
  int soft_threshold = 1;

  int n_trees = 1000;
  int max_depth = 0;
  int folds = 5;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: OpenMP default; NEXICA_THREADS overrides the file
  int top_k = 20;
  bool evaluate_full = false;  // also cross-validate on all labelled tuples

  // Grid search axes.
  std::vector<double> grid_alphas{0.05, 0.1, 0.15, 0.2, 0.25};
  std::vector<int> grid_taus{0, 1};

  // Throws ParameterError on out-of-range values, and Error naming each
  // input path that does not exist.
  void validate(bool check_paths = true) const;
};

// Sets one key from its text form; throws ParameterError on an unknown key
// or a malformed value.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

RunConfig load_run_config(const std::string& path);

// NEXICA_THREADS, when set, replaces config.threads.
void apply_environment(RunConfig& config);

// Key/value text of every field, in the file format.
std::map<std::string, std::string> config_entries(const RunConfig& config);
void write_run_config(const std::string& path, const RunConfig& config);

} // namespace nexica
