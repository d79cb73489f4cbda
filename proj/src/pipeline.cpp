#include "nexica/pipeline.hpp"

#include "nexica/csv.hpp"
#include "nexica/events.hpp"
#include "nexica/ingest.hpp"
#include "nexica/rng.hpp"
#include "nexica/synth.hpp"

#include <json.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace nexica {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
void stage(const char* name, std::map<std::string, double>& timing, F&& body) {
  const auto t0 = Clock::now();
  try {
    body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
  timing[name] = std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string tuple_key(const std::string& cause, const std::string& effect, int lag) {
  return cause + '\x1f' + effect + '\x1f' + std::to_string(lag);
}

ForestParams forest_params(const RunConfig& c) {
  ForestParams p;
  p.n_trees = c.n_trees;
  p.max_depth = c.max_depth;
  p.seed = stage_seed(c.seed, "forest");
  p.threads = c.threads;
  return p;
}

std::string path_in(const std::string& dir, const char* file) { return (fs::path(dir) / file).string(); }

std::string fixed(double v, int digits = 4) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

nlohmann::json evaluation_json(const EvaluationSummary& ev) {
  nlohmann::json j;
  j["evaluated"] = ev.evaluated;
  j["positives"] = ev.positives;
  j["negatives"] = ev.negatives;
  if (!ev.evaluated) {
    j["skipped_reason"] = ev.skipped_reason;
    return j;
  }
  j["forest_auc"] = ev.forest.roc.auc;
  j["forest_auc_mean"] = ev.forest.roc.auc_mean;
  j["forest_auc_std"] = ev.forest.roc.auc_std;
  j["forest_fold_aucs"] = ev.forest.roc.fold_aucs;
  j["pc_scalar_auc"] = ev.pc_scalar.auc;
  return j;
}

struct LoadedInputs {
  FilteredDataset data;
  DriveTimeMatrix drive_times;
  std::vector<std::string> ids;
};

LoadedInputs load_inputs(const RunConfig& c, std::vector<std::string>& warnings) {
  LoadedInputs in;
  const auto speeds = load_speed_csv(c.speeds);
  std::vector<StationMeta> meta;
  if (!c.meta.empty()) {
    meta = load_station_meta(c.meta);
  } else {
    for (const auto& s : speeds.series) meta.push_back({s.station_id, {}, std::nullopt, 0.0, 0.0, {}});
  }
  in.data = filter_stations(speeds, meta, c.min_completeness);
  const auto dropped = speeds.series.size() - in.data.speeds.series.size();
  if (dropped) {
    warnings.push_back(std::to_string(dropped) + " stations below completeness " +
                       csv::format_double(c.min_completeness) + " dropped");
  }
  for (const auto& s : in.data.speeds.series) in.ids.push_back(s.station_id);
  in.drive_times = load_drive_times(c.drive_times).restricted_to(in.ids);
  return in;
}

std::vector<PairRecord> sweep_records(const std::vector<EventSeries>& events, const std::vector<std::string>& ids,
                                      const RunConfig& c) {
  std::vector<EventIndex> idx;
  idx.reserve(events.size());
  for (const auto& e : events) idx.emplace_back(e.events);
  SweepOptions opts;
  opts.max_lag = c.max_lag;
  opts.tau = c.tau;
  return to_records(sweep_parallel(idx, opts, c.threads), ids);
}

GroundTruth ground_truth(const RunConfig& c, const LoadedInputs& in) {
  if (!c.truth.empty()) return label_from_truth(in.ids, in.drive_times, load_truth_csv(c.truth), c.max_lag);
  DatasetSpec spec;
  spec.negatives_per_positive = c.ratio;
  spec.max_lag = c.max_lag;
  spec.propagation_kph = c.propagation_kph;
  spec.free_flow_kph = c.free_flow_kph;
  spec.soft_threshold = c.soft_threshold;
  spec.validate();
  return label_pairs(in.data.meta, in.drive_times, spec);
}

void write_cv_scores(const std::string& path, const TrainingSet& data, const std::vector<double>& scores) {
  auto out = csv::open_output(path);
  out << "cause,effect,lag,label,p_forest,p_c\n";
  for (std::size_t i = 0; i < data.features.size(); ++i) {
    const auto& f = data.features[i];
    out << f.cause << ',' << f.effect << ',' << f.lag << ',' << data.labels[i] << ','
        << csv::format_double(scores[i]) << ',' << csv::format_double(data.p_c[i]) << '\n';
  }
}

struct ScoreRow {
  std::string cause, effect;
  int lag = 0;
  double p_forest = 0.0;
  double p_c = 0.0;
};

std::vector<ScoreRow> load_scores(const std::string& path) {
  csv::Reader r(path);
  if (!r.next()) r.fail("missing header");
  std::vector<ScoreRow> rows;
  while (r.next()) {
    r.expect_columns(5);
    rows.push_back({r.fields()[0], r.fields()[1], static_cast<int>(r.field_int(2)), r.field_double(3),
                    r.field_double(4)});
  }
  return rows;
}

} // namespace

TrainingSet join_features(const std::vector<PairRecord>& records, const std::vector<LabeledPair>& labels,
                          FeatureMask mask) {
  std::unordered_map<std::string, std::size_t> where;
  where.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    where.emplace(tuple_key(records[i].cause, records[i].effect, records[i].counts.lag), i);
  }
  TrainingSet t;
  t.features.reserve(labels.size());
  for (const auto& l : labels) {
    const auto it = where.find(tuple_key(l.cause_id, l.effect_id, l.lag));
    if (it == where.end()) {
      throw ConsistencyError("labelled tuple (" + l.cause_id + ", " + l.effect_id + ", " + std::to_string(l.lag) +
                             ") has no sweep row");
    }
    const auto& rec = records[it->second];
    t.features.push_back(make_features(rec, mask));
    t.labels.push_back(l.label == Label::Positive ? 1 : 0);
    t.p_c.push_back(rec.estimate ? rec.estimate->p_c : estimate(rec.counts).p_c);
  }
  return t;
}

EvaluationSummary evaluate_dataset(const TrainingSet& data, const RunConfig& config) {
  EvaluationSummary ev;
  ev.positives = static_cast<std::size_t>(std::count(data.labels.begin(), data.labels.end(), 1));
  ev.negatives = data.labels.size() - ev.positives;
  const auto folds = static_cast<std::size_t>(config.folds);
  if (ev.positives == 0) {
    ev.skipped_reason = "no positive labels";
    return ev;
  }
  if (ev.positives < folds || ev.negatives < folds) {
    ev.skipped_reason = "fewer samples than folds in a class (" + std::to_string(ev.positives) + " positive, " +
                        std::to_string(ev.negatives) + " negative, " + std::to_string(folds) + " folds)";
    return ev;
  }
  CvOptions cv;
  cv.folds = config.folds;
  cv.forest = forest_params(config);
  ev.forest = cross_validate(data.features, data.labels, kCountsMask, cv);
  ev.pc_scalar = scalar_threshold_auc(data.p_c, data.labels);
  ev.evaluated = true;
  return ev;
}

std::map<std::string, int> case_tally(const std::vector<PairRecord>& records) {
  std::map<std::string, int> tally;
  for (auto c : {EstimateCase::Interior, EstimateCase::BoundaryPc0, EstimateCase::BoundaryPc1, EstimateCase::Undefined}) {
    tally[to_string(c)] = 0;
  }
  for (const auto& r : records) {
    if (r.estimate) ++tally[to_string(r.estimate->kind)];
  }
  return tally;
}

RunReport run_pipeline(const RunConfig& config) {
  RunConfig c = config;
  try {
    apply_environment(c);
    c.validate();
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }
  if (c.threads > 0) omp_set_num_threads(c.threads);

  RunReport rep;
  std::vector<std::string> warnings;
  const std::string out = c.out_dir;

  LoadedInputs in;
  StationEvents ev;
  std::vector<PairRecord> records;
  GroundTruth gt;
  LabeledDataset ds;
  TrainingSet train;
  std::vector<double> all_scores;
  ForestModel model;
  std::optional<EvaluationSummary> full_eval;

  const auto t_start = Clock::now();
  stage("ingest", rep.timing, [&] {
    fs::create_directories(out);
    in = load_inputs(c, warnings);
    if (in.ids.size() < 2) throw ValidationError("fewer than two stations remain after filtering");
    write_run_config(path_in(out, "config.txt"), c);
  });
  stage("events", rep.timing, [&] {
    ev = extract_all_events(in.data.speeds, c.alpha);
    write_events_csv(path_in(out, "events.csv"), ev.events);
  });
  stage("sweep", rep.timing, [&] {
    records = sweep_records(ev.events, in.ids, c);
    write_pairs_csv(path_in(out, "pairs.csv"), records);
    write_mle_csv(path_in(out, "mle.csv"), records);
  });
  stage("groundtruth", rep.timing, [&] {
    gt = ground_truth(c, in);
    ds = build_dataset(gt, c.ratio);
    warnings.insert(warnings.end(), gt.warnings.begin(), gt.warnings.end());
    warnings.insert(warnings.end(), ds.warnings.begin(), ds.warnings.end());
    write_labels_csv(path_in(out, "labels.csv"), ds.samples);
    if (!c.truth.empty()) fs::copy_file(c.truth, path_in(out, "truth.csv"), fs::copy_options::overwrite_existing);
  });
  stage("evaluate", rep.timing, [&] {
    train = join_features(records, ds.samples, kCountsMask);
    rep.evaluation = evaluate_dataset(train, c);
    if (!rep.evaluation.evaluated) return;
    write_roc_csv(path_in(out, "roc_forest.csv"), rep.evaluation.forest.roc);
    write_roc_csv(path_in(out, "roc_pc.csv"), rep.evaluation.pc_scalar);
    write_cv_scores(path_in(out, "cv_scores.csv"), train, rep.evaluation.forest.scores);
    if (c.evaluate_full) {
      const auto full = full_dataset(gt);
      full_eval = evaluate_dataset(join_features(records, full.samples, kCountsMask), c);
    }
  });
  stage("model", rep.timing, [&] {
    if (!rep.evaluation.evaluated) return;
    model = train_forest(train.features, train.labels, forest_params(c), kCountsMask);
    save_model(path_in(out, "model.json"), model);
    std::vector<FeatureVector> all;
    all.reserve(records.size());
    for (const auto& r : records) all.push_back(make_features(r, kCountsMask));
    all_scores = predict_proba(model, all);
    auto s = csv::open_output(path_in(out, "scores.csv"));
    s << "cause,effect,lag,p_forest,p_c\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      s << r.cause << ',' << r.effect << ',' << r.counts.lag << ',' << csv::format_double(all_scores[i]) << ','
        << csv::format_double(r.estimate ? r.estimate->p_c : 0.0) << '\n';
    }
  });

  rep.stations = in.ids.size();
  rep.tuples = records.size();
  for (const auto& e : ev.events) rep.events += static_cast<std::size_t>(std::count(e.events.begin(), e.events.end(), 1));

  stage("metrics", rep.timing, [&] {
    // Only inputs that determine the results go in; paths and thread count do not.
    nlohmann::json m;
    m["stations"] = rep.stations;
    m["tuples"] = rep.tuples;
    m["events"] = rep.events;
    m["mle_cases"] = case_tally(records);
    m["labels"] = {{"positives", ds.positives},
                   {"negatives", ds.negatives},
                   {"min_negative_drive_time", ds.min_negative_drive_time},
                   {"source", c.truth.empty() ? "rules" : "truth"}};
    m["evaluation"] = evaluation_json(rep.evaluation);
    if (full_eval) m["evaluation_full"] = evaluation_json(*full_eval);
    if (rep.evaluation.evaluated) m["model_hash"] = std::to_string(model.hash());
    m["warnings"] = warnings;
    m["params"] = {{"alpha", c.alpha},       {"tau", c.tau},         {"max_lag", c.max_lag},
                   {"min_completeness", c.min_completeness},       {"ratio", c.ratio},
                   {"propagation_kph", c.propagation_kph},         {"free_flow_kph", c.free_flow_kph},
                   {"soft_threshold", c.soft_threshold},           {"n_trees", c.n_trees},
                   {"max_depth", c.max_depth}, {"folds", c.folds}, {"seed", std::to_string(c.seed)}};
    rep.metrics_path = path_in(out, "metrics.json");
    auto f = csv::open_output(rep.metrics_path);
    f << m.dump(2) << '\n';
  });

  rep.timing["total"] = std::chrono::duration<double>(Clock::now() - t_start).count();
  stage("report", rep.timing, [&] {
    nlohmann::json t(rep.timing);
    t["threads"] = c.threads > 0 ? c.threads : omp_get_max_threads();
    auto f = csv::open_output(path_in(out, "timing.json"));
    f << t.dump(2) << '\n';
    auto r = csv::open_output(path_in(out, "report.txt"));
    r << report(out, c.top_k);
  });
  return rep;
}

std::vector<std::string> required_artifacts() {
  return {"config.txt", "events.csv", "pairs.csv", "mle.csv", "labels.csv", "metrics.json", "timing.json"};
}

std::string report(const std::string& run_dir, int top_k) {
  std::vector<std::string> missing;
  for (const auto& f : required_artifacts()) {
    if (!fs::exists(fs::path(run_dir) / f)) missing.push_back(f);
  }
  nlohmann::json m;
  if (fs::exists(fs::path(run_dir) / "metrics.json")) {
    std::ifstream in(path_in(run_dir, "metrics.json"));
    try {
      in >> m;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path_in(run_dir, "metrics.json") + ": " + e.what());
    }
    if (m.value("/evaluation/evaluated"_json_pointer, false)) {
      for (const char* f : {"roc_forest.csv", "roc_pc.csv", "cv_scores.csv", "model.json", "scores.csv"}) {
        if (!fs::exists(fs::path(run_dir) / f)) missing.push_back(f);
      }
    }
  }
  if (!missing.empty()) {
    std::string msg = "incomplete run directory " + run_dir + "; missing:";
    for (const auto& f : missing) msg += " " + f;
    throw Error(msg);
  }

  std::ostringstream os;
  os << "run: " << run_dir << '\n';
  os << "stations: " << m.value("stations", 0) << "  tuples: " << m.value("tuples", 0)
     << "  events: " << m.value("events", 0) << '\n';
  os << "mle cases:";
  for (const auto& [k, v] : m["mle_cases"].items()) os << ' ' << k << '=' << v.get<long long>();
  os << '\n';
  const auto& labels = m["labels"];
  os << "labels (" << labels.value("source", std::string("rules")) << "): " << labels.value("positives", 0)
     << " positive, " << labels.value("negatives", 0) << " negative";
  if (labels.value("negatives", 0) > 0) {
    os << ", nearest negative " << fixed(labels.value("min_negative_drive_time", 0.0), 1) << " min";
  }
  os << '\n';

  auto print_eval = [&](const char* title, const nlohmann::json& e) {
    if (!e.value("evaluated", false)) {
      os << title << ": evaluation skipped (" << e.value("skipped_reason", std::string("unknown")) << ")\n";
      return;
    }
    os << title << ": forest AUC " << fixed(e.value("forest_auc", 0.0)) << " (fold mean "
       << fixed(e.value("forest_auc_mean", 0.0)) << " +/- " << fixed(e.value("forest_auc_std", 0.0))
       << "), scalar p_c AUC " << fixed(e.value("pc_scalar_auc", 0.0)) << '\n';
  };
  print_eval("ratio'd set", m["evaluation"]);
  if (m.contains("evaluation_full")) print_eval("full set", m["evaluation_full"]);

  const bool have_scores = fs::exists(fs::path(run_dir) / "scores.csv");
  std::vector<ScoreRow> scores;
  if (have_scores) scores = load_scores(path_in(run_dir, "scores.csv"));
  if (have_scores && top_k > 0) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a].p_forest > scores[b].p_forest; });
    os << "top " << std::min<std::size_t>(static_cast<std::size_t>(top_k), order.size()) << " tuples by p_forest:\n";
    os << "  cause,effect,lag,p_forest,p_c\n";
    for (std::size_t k = 0; k < order.size() && k < static_cast<std::size_t>(top_k); ++k) {
      const auto& s = scores[order[k]];
      os << "  " << s.cause << ',' << s.effect << ',' << s.lag << ',' << fixed(s.p_forest) << ',' << fixed(s.p_c)
         << '\n';
    }
  }

  if (fs::exists(fs::path(run_dir) / "truth.csv")) {
    std::unordered_map<std::string, double> true_pc;
    {
      csv::Reader r(path_in(run_dir, "truth.csv"));
      r.next();
      while (r.next()) {
        const double pc = r.fields().size() > 3 ? r.field_double(3) : std::nan("");
        true_pc[tuple_key(r.fields()[0], r.fields()[1], static_cast<int>(r.field_int(2)))] = pc;
      }
    }
    const auto mle = load_pairs_csv(path_in(run_dir, "mle.csv"));
    std::unordered_map<std::string, double> forest;
    for (const auto& s : scores) forest[tuple_key(s.cause, s.effect, s.lag)] = s.p_forest;
    os << "planted vs recovered:\n  cause,effect,lag,p_c_true,p_c_hat,p_forest\n";
    std::size_t recovered = 0;
    for (const auto& t : load_truth_csv(path_in(run_dir, "truth.csv"))) {
      const auto key = tuple_key(t.cause_id, t.effect_id, t.lag);
      const auto it = std::find_if(mle.begin(), mle.end(), [&](const PairRecord& r) {
        return r.cause == t.cause_id && r.effect == t.effect_id && r.counts.lag == t.lag;
      });
      const double hat = it != mle.end() && it->estimate ? it->estimate->p_c : std::nan("");
      const auto f = forest.find(key);
      const double pf = f != forest.end() ? f->second : std::nan("");
      if (pf > 0.5) ++recovered;
      os << "  " << t.cause_id << ',' << t.effect_id << ',' << t.lag << ',' << fixed(true_pc[key]) << ','
         << fixed(hat) << ',' << fixed(pf) << '\n';
    }
    if (have_scores) os << "  recovered (p_forest > 0.5): " << recovered << " of " << true_pc.size() << '\n';
  }

  if (fs::exists(fs::path(run_dir) / "grid.csv")) {
    os << "grid search:\n  alpha  tau  balanced_auc  full_auc  runtime_s\n";
    csv::Reader r(path_in(run_dir, "grid.csv"));
    r.next();
    while (r.next()) {
      r.expect_columns(5);
      os << "  " << fixed(r.field_double(0), 2) << "  " << r.fields()[1] << "  " << fixed(r.field_double(2)) << "  "
         << fixed(r.field_double(3)) << "  " << fixed(r.field_double(4), 2) << '\n';
    }
  }

  if (m.contains("warnings") && !m["warnings"].empty()) {
    os << "warnings:\n";
    for (const auto& w : m["warnings"]) os << "  " << w.get<std::string>() << '\n';
  }
  return os.str();
}

std::vector<GridRow> grid_search(const RunConfig& config) {
  RunConfig c = config;
  try {
    apply_environment(c);
    c.validate();
    if (c.grid_alphas.empty() || c.grid_taus.empty()) throw ParameterError("grid axes must not be empty");
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }
  if (c.threads > 0) omp_set_num_threads(c.threads);

  std::map<std::string, double> timing;
  std::vector<std::string> warnings;
  LoadedInputs in;
  GroundTruth gt;
  stage("ingest", timing, [&] {
    fs::create_directories(c.out_dir);
    in = load_inputs(c, warnings);
    gt = ground_truth(c, in);
  });

  std::vector<GridRow> rows;
  for (double alpha : c.grid_alphas) {
    StationEvents ev;
    const auto t_alpha = Clock::now();
    stage("events", timing, [&] { ev = extract_all_events(in.data.speeds, alpha); });
    const double events_s = std::chrono::duration<double>(Clock::now() - t_alpha).count();
    for (int tau : c.grid_taus) {
      const auto t0 = Clock::now();
      GridRow row;
      row.alpha = alpha;
      row.tau = tau;
      stage("grid", timing, [&] {
        RunConfig cell = c;
        cell.alpha = alpha;
        cell.tau = tau;
        const auto records = sweep_records(ev.events, in.ids, cell);
        const auto bal = evaluate_dataset(join_features(records, build_dataset(gt, 1).samples, kCountsMask), cell);
        const auto full = evaluate_dataset(join_features(records, full_dataset(gt).samples, kCountsMask), cell);
        row.balanced_auc = bal.evaluated ? bal.forest.roc.auc : std::nan("");
        row.full_auc = full.evaluated ? full.forest.roc.auc : std::nan("");
      });
      row.runtime_s = events_s + std::chrono::duration<double>(Clock::now() - t0).count();
      rows.push_back(row);
    }
  }
  write_grid_csv(path_in(c.out_dir, "grid.csv"), rows);
  return rows;
}

void write_grid_csv(const std::string& path, const std::vector<GridRow>& rows) {
  auto out = csv::open_output(path);
  out << "alpha,tau,balanced_auc,full_auc,runtime_s\n";
  for (const auto& r : rows) {
    out << csv::format_double(r.alpha) << ',' << r.tau << ',' << csv::format_double(r.balanced_auc) << ','
        << csv::format_double(r.full_auc) << ',' << csv::format_double(r.runtime_s) << '\n';
  }
}

} // namespace nexica
