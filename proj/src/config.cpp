#include "nexica/config.hpp"

#include "nexica/csv.hpp"
#include "nexica/error.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace nexica {

namespace {

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  if (!csv::parse_double(csv::trim(v), out)) throw ParameterError("config key '" + key + "': not a number: " + v);
  return out;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  if (!csv::parse_int(csv::trim(v), out)) throw ParameterError("config key '" + key + "': not an integer: " + v);
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  const auto t = std::string(csv::trim(v));
  if (t == "1" || t == "true" || t == "yes") return true;
  if (t == "0" || t == "false" || t == "no") return false;
  throw ParameterError("config key '" + key + "': not a boolean: " + v);
}

template <typename T, typename F>
std::vector<T> to_list(const std::string& v, F convert) {
  std::vector<T> out;
  for (const auto& item : csv::split(v, ',')) {
    if (!csv::trim(item).empty()) out.push_back(static_cast<T>(convert(std::string(item))));
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += csv::format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

} // namespace

void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  const std::string v(csv::trim(value));
  if (key == "speeds") c.speeds = v;
  else if (key == "meta") c.meta = v;
  else if (key == "drive_times") c.drive_times = v;
  else if (key == "truth") c.truth = v;
  else if (key == "out_dir") c.out_dir = v;
  else if (key == "alpha") c.alpha = to_double(key, v);
  else if (key == "tau") c.tau = static_cast<int>(to_int(key, v));
  else if (key == "max_lag") c.max_lag = static_cast<int>(to_int(key, v));
  else if (key == "min_completeness") c.min_completeness = to_double(key, v);
  else if (key == "ratio") c.ratio = static_cast<int>(to_int(key, v));
  else if (key == "propagation_kph") c.propagation_kph = to_double(key, v);
  else if (key == "free_flow_kph") c.free_flow_kph = to_double(key, v);
  else if (key == "soft_threshold") c.soft_threshold = static_cast<int>(to_int(key, v));
  else if (key == "n_trees") c.n_trees = static_cast<int>(to_int(key, v));
  else if (key == "max_depth") c.max_depth = static_cast<int>(to_int(key, v));
  else if (key == "folds") c.folds = static_cast<int>(to_int(key, v));
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_int(key, v));
  else if (key == "threads") c.threads = static_cast<int>(to_int(key, v));
  else if (key == "top_k") c.top_k = static_cast<int>(to_int(key, v));
  else if (key == "evaluate_full") c.evaluate_full = to_bool(key, v);
  else if (key == "grid_alphas") c.grid_alphas = to_list<double>(v, [&](const std::string& s) { return to_double(key, s); });
  else if (key == "grid_taus") c.grid_taus = to_list<int>(v, [&](const std::string& s) { return to_int(key, s); });
  else throw ParameterError("unknown config key '" + key + "'");
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config: " + path);
  RunConfig c;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto t = csv::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError(path + ":" + std::to_string(no) + ": expected key = value");
    const std::string key(csv::trim(t.substr(0, eq)));
    try {
      set_config_value(c, key, std::string(t.substr(eq + 1)));
    } catch (const ParameterError& e) {
      throw ParameterError(path + ":" + std::to_string(no) + ": " + e.what());
    }
  }
  // Relative paths resolve against the config file's directory.
  const auto base = std::filesystem::path(path).parent_path();
  for (auto* p : {&c.speeds, &c.meta, &c.drive_times, &c.truth, &c.out_dir}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  }
  return c;
}

void apply_environment(RunConfig& c) {
  if (const char* env = std::getenv("NEXICA_THREADS"); env && *env) {
    c.threads = static_cast<int>(to_int("NEXICA_THREADS", env));
  }
}

void RunConfig::validate(bool check_paths) const {
  if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
  if (tau < 0) throw ParameterError("tau must be >= 0");
  if (max_lag < 1) throw ParameterError("max_lag must be >= 1");
  if (!(min_completeness >= 0.0 && min_completeness <= 1.0)) throw ParameterError("min_completeness must lie in [0, 1]");
  if (ratio < 1) throw ParameterError("ratio must be >= 1");
  if (!(propagation_kph > 0.0) || !(free_flow_kph > 0.0)) throw ParameterError("speeds must be positive");
  if (soft_threshold < 0) throw ParameterError("soft_threshold must be >= 0");
  if (n_trees < 1) throw ParameterError("n_trees must be >= 1");
  if (max_depth < 0) throw ParameterError("max_depth must be >= 0");
  if (folds < 2) throw ParameterError("folds must be >= 2");
  if (threads < 0) throw ParameterError("threads must be >= 0");
  if (top_k < 0) throw ParameterError("top_k must be >= 0");
  if (out_dir.empty()) throw ParameterError("out_dir must be set");
  if (!check_paths) return;
  std::string missing;
  auto need = [&](const char* key, const std::string& p, bool required) {
    if (p.empty()) {
      if (required) missing += std::string(" ") + key + "=(unset)";
    } else if (!std::filesystem::exists(p)) {
      missing += std::string(" ") + key + "=" + p;
    }
  };
  need("speeds", speeds, true);
  need("drive_times", drive_times, true);
  need("meta", meta, truth.empty());
  need("truth", truth, false);
  if (!missing.empty()) throw Error("missing input files:" + missing);
}

std::map<std::string, std::string> config_entries(const RunConfig& c) {
  return {
      {"speeds", c.speeds},
      {"meta", c.meta},
      {"drive_times", c.drive_times},
      {"truth", c.truth},
      {"out_dir", c.out_dir},
      {"alpha", csv::format_double(c.alpha)},
      {"tau", std::to_string(c.tau)},
      {"max_lag", std::to_string(c.max_lag)},
      {"min_completeness", csv::format_double(c.min_completeness)},
      {"ratio", std::to_string(c.ratio)},
      {"propagation_kph", csv::format_double(c.propagation_kph)},
      {"free_flow_kph", csv::format_double(c.free_flow_kph)},
      {"soft_threshold", std::to_string(c.soft_threshold)},
      {"n_trees", std::to_string(c.n_trees)},
      {"max_depth", std::to_string(c.max_depth)},
      {"folds", std::to_string(c.folds)},
      {"seed", std::to_string(c.seed)},
      {"threads", std::to_string(c.threads)},
      {"top_k", std::to_string(c.top_k)},
      {"evaluate_full", c.evaluate_full ? "true" : "false"},
      {"grid_alphas", join(c.grid_alphas)},
      {"grid_taus", join(c.grid_taus)},
  };
}

void write_run_config(const std::string& path, const RunConfig& c) {
  auto out = csv::open_output(path);
  for (const auto& [k, v] : config_entries(c)) out << k << " = " << v << '\n';
}

} // namespace nexica
