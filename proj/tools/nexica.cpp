#include "nexica/config.hpp"
#include "nexica/correspond.hpp"
#include "nexica/csv.hpp"
#include "nexica/error.hpp"
#include "nexica/evaluate.hpp"
#include "nexica/events.hpp"
#include "nexica/forest.hpp"
#include "nexica/groundtruth.hpp"
#include "nexica/ingest.hpp"
#include "nexica/mle.hpp"
#include "nexica/pipeline.hpp"
#include "nexica/rng.hpp"
#include "nexica/sweep.hpp"
#include "nexica/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <filesystem>
#include <iostream>
#include <optional>

using namespace nexica;
namespace fs = std::filesystem;

namespace {

void set_threads(int threads) {
  if (const char* env = std::getenv("NEXICA_THREADS"); env && *env) threads = std::atoi(env);
  if (threads > 0) omp_set_num_threads(threads);
}

TrainingSet load_training(const std::string& mle_path, const std::string& labels_path, FeatureMask mask) {
  return join_features(load_pairs_csv(mle_path), load_labels_csv(labels_path), mask);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = csv::open_output(path);
  out << j.dump(2) << '\n';
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"nexica: causal links between road sensors from speed series"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0: default; NEXICA_THREADS overrides)");

  // events
  auto* cmd_events = app.add_subcommand("events", "speed series -> slowdown leading-edge events");
  std::string ev_speeds, ev_out, ev_profile, ev_meta;
  double ev_alpha = 0.25, ev_min_completeness = 0.9;
  bool ev_dense = false;
  cmd_events->add_option("--speeds", ev_speeds, "speed CSV")->required();
  cmd_events->add_option("--alpha", ev_alpha, "relative slowdown threshold");
  cmd_events->add_option("--out", ev_out, "events CSV")->required();
  cmd_events->add_option("--profile-out", ev_profile, "median-week profile CSV");
  cmd_events->add_option("--meta", ev_meta, "station metadata; enables completeness filtering");
  cmd_events->add_option("--min-completeness", ev_min_completeness, "used with --meta");
  cmd_events->add_flag("--dense", ev_dense, "write every slot instead of events only");

  // pairs
  auto* cmd_pairs = app.add_subcommand("pairs", "events -> correspondence counts for every (cause, effect, lag)");
  std::string pr_events, pr_out;
  int pr_max_lag = kDefaultMaxLag, pr_tau = 0;
  cmd_pairs->add_option("--events", pr_events, "events CSV")->required();
  cmd_pairs->add_option("--out", pr_out, "pairs CSV")->required();
  cmd_pairs->add_option("--max-lag", pr_max_lag, "largest lag in slots");
  cmd_pairs->add_option("--tau", pr_tau, "matching tolerance in slots");

  // mle
  auto* cmd_mle = app.add_subcommand("mle", "counts -> constrained maximum-likelihood (p_s, p_c)");
  std::string mle_counts, mle_out;
  cmd_mle->add_option("--counts", mle_counts, "pairs CSV")->required();
  cmd_mle->add_option("--out", mle_out, "mle CSV")->required();

  // ground-truth
  auto* cmd_gt = app.add_subcommand("ground-truth", "label candidate tuples from road rules or a truth file");
  std::string gt_meta, gt_drive, gt_truth, gt_out;
  DatasetSpec gt_spec;
  bool gt_full = false;
  cmd_gt->add_option("--meta", gt_meta, "station metadata CSV");
  cmd_gt->add_option("--drive-times", gt_drive, "drive-time matrix CSV")->required();
  cmd_gt->add_option("--truth", gt_truth, "planted-edge CSV; replaces the road rules");
  cmd_gt->add_option("--ratio", gt_spec.negatives_per_positive, "negatives per positive");
  cmd_gt->add_option("--max-lag", gt_spec.max_lag, "largest lag in slots");
  cmd_gt->add_option("--propagation-kph", gt_spec.propagation_kph, "congestion propagation speed");
  cmd_gt->add_option("--free-flow-kph", gt_spec.free_flow_kph, "speed converting drive time to distance");
  cmd_gt->add_option("--soft-threshold", gt_spec.soft_threshold, "extra lags accepted past the base lag");
  cmd_gt->add_flag("--full", gt_full, "emit every labelled tuple instead of the ratio'd set");
  cmd_gt->add_option("--out", gt_out, "labels CSV")->required();

  // synth
  auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic network with planted edges");
  std::string sy_spec, sy_out;
  std::optional<std::uint64_t> sy_seed;
  cmd_synth->add_option("--spec", sy_spec, "JSON spec")->required();
  cmd_synth->add_option("--out", sy_out, "output directory")->required();
  cmd_synth->add_option("--seed", sy_seed, "overrides the spec's seed");

  // train / evaluate / ablate share the sample inputs
  std::string tr_mle, tr_labels, tr_features = "counts";
  ForestParams tr_params;
  int folds = 5;
  auto sample_opts = [&](CLI::App* c) {
    c->add_option("--mle", tr_mle, "mle (or pairs) CSV")->required();
    c->add_option("--labels", tr_labels, "labels CSV")->required();
    c->add_option("--n-trees", tr_params.n_trees, "trees in the forest");
    c->add_option("--max-depth", tr_params.max_depth, "0 for unlimited");
    c->add_option("--seed", tr_params.seed, "root seed");
  };

  auto* cmd_train = app.add_subcommand("train", "fit a forest on labelled tuples");
  std::string tr_out;
  sample_opts(cmd_train);
  cmd_train->add_option("--features", tr_features, "feature set, e.g. counts, counts+pc, A01+A10");
  cmd_train->add_option("--out", tr_out, "model JSON")->required();

  auto* cmd_eval = app.add_subcommand("evaluate", "cross-validated ROC/AUC, or score with a trained model");
  std::string evl_out, evl_model;
  sample_opts(cmd_eval);
  cmd_eval->add_option("--features", tr_features, "feature set");
  cmd_eval->add_option("--folds", folds, "cross-validation folds");
  cmd_eval->add_option("--model", evl_model, "score with this model instead of cross-validating");
  cmd_eval->add_option("--out-dir", evl_out, "directory for metrics.json and ROC CSVs")->required();

  auto* cmd_ablate = app.add_subcommand("ablate", "AUC for every subset of the four counts");
  std::string ab_out;
  sample_opts(cmd_ablate);
  cmd_ablate->add_option("--folds", folds, "cross-validation folds");
  cmd_ablate->add_option("--out", ab_out, "ablation CSV")->required();

  // run / grid-search
  std::string run_config;
  std::vector<std::string> overrides;
  auto config_opts = [&](CLI::App* c) {
    c->add_option("--config", run_config, "flat key = value config file");
    c->add_option("--set", overrides, "key=value override (repeatable)");
  };
  auto* cmd_run = app.add_subcommand("run", "full pipeline");
  config_opts(cmd_run);
  auto* cmd_grid = app.add_subcommand("grid-search", "balanced and full AUC over alpha x tau");
  config_opts(cmd_grid);

  auto* cmd_report = app.add_subcommand("report", "summarise a run directory");
  std::string rp_dir;
  int rp_top_k = 10;
  cmd_report->add_option("--run-dir", rp_dir, "run directory")->required();
  cmd_report->add_option("--top-k", rp_top_k, "tuples to list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  set_threads(threads);

  auto build_config = [&] {
    RunConfig c = run_config.empty() ? RunConfig{} : load_run_config(run_config);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParameterError("--set expects key=value, got " + kv);
      set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (threads > 0) c.threads = threads;
    return c;
  };

  std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (*cmd_events) {
      auto speeds = load_speed_csv(ev_speeds);
      if (!ev_meta.empty()) speeds = filter_stations(speeds, load_station_meta(ev_meta), ev_min_completeness).speeds;
      const auto ev = extract_all_events(speeds, ev_alpha);
      write_events_csv(ev_out, ev.events, ev_dense);
      if (!ev_profile.empty()) write_profile_csv(ev_profile, ev.profiles);
    } else if (*cmd_pairs) {
      const auto events = load_events_csv(pr_events);
      std::vector<EventIndex> idx;
      std::vector<std::string> ids;
      for (const auto& e : events) {
        idx.emplace_back(e.events);
        ids.push_back(e.station_id);
      }
      SweepOptions opts{pr_max_lag, pr_tau};
      auto records = to_records(sweep_parallel(idx, opts), ids);
      for (auto& r : records) r.estimate.reset();
      write_pairs_csv(pr_out, records);
    } else if (*cmd_mle) {
      auto records = load_pairs_csv(mle_counts);
      for (auto& r : records) {
        try {
          r.estimate = estimate(r.counts);
        } catch (const Error& e) {
          throw Error("tuple (" + r.cause + ", " + r.effect + ", " + std::to_string(r.counts.lag) + "): " + e.what());
        }
      }
      write_mle_csv(mle_out, records);
    } else if (*cmd_gt) {
      auto d = load_drive_times(gt_drive);
      GroundTruth gt;
      if (!gt_truth.empty()) {
        gt = label_from_truth(d.station_ids(), d, load_truth_csv(gt_truth), gt_spec.max_lag);
      } else {
        if (gt_meta.empty()) throw ParameterError("--meta or --truth is required");
        gt_spec.validate();
        gt = label_pairs(load_station_meta(gt_meta), d, gt_spec);
      }
      const auto ds = gt_full ? full_dataset(gt) : build_dataset(gt, gt_spec.negatives_per_positive);
      for (const auto& w : gt.warnings) std::cerr << "nexica ground-truth: warning: " << w << '\n';
      for (const auto& w : ds.warnings) std::cerr << "nexica ground-truth: warning: " << w << '\n';
      write_labels_csv(gt_out, ds.samples);
      std::cout << ds.positives << " positive, " << ds.negatives << " negative\n";
    } else if (*cmd_synth) {
      auto cfg = load_synth_config(sy_spec);
      if (sy_seed) cfg.spec.seed = *sy_seed;
      const auto net = generate_network(cfg.spec);
      const auto art = render_network(net, cfg.render, cfg.spec.seed);
      write_synth_outputs(sy_out, net, art);
    } else if (*cmd_train) {
      const auto mask = parse_mask(tr_features);
      const auto data = load_training(tr_mle, tr_labels, mask);
      const auto model = train_forest(data.features, data.labels, tr_params, mask);
      save_model(tr_out, model);
    } else if (*cmd_eval) {
      fs::create_directories(evl_out);
      nlohmann::json m;
      if (!evl_model.empty()) {
        const auto model = load_model(evl_model);
        const auto data = load_training(tr_mle, tr_labels, model.mask);
        const auto scores = predict_proba(model, data.features);
        const auto roc = roc_auc(scores, data.labels);
        write_roc_csv((fs::path(evl_out) / "roc_model.csv").string(), roc);
        m["model_auc"] = roc.auc;
        m["features"] = mask_name(model.mask);
      } else {
        const auto mask = parse_mask(tr_features);
        const auto data = load_training(tr_mle, tr_labels, mask);
        CvOptions cv;
        cv.folds = folds;
        cv.forest = tr_params;
        const auto res = cross_validate(data.features, data.labels, mask, cv);
        const auto pc = scalar_threshold_auc(data.p_c, data.labels);
        write_roc_csv((fs::path(evl_out) / "roc_forest.csv").string(), res.roc);
        write_roc_csv((fs::path(evl_out) / "roc_pc.csv").string(), pc);
        m["features"] = mask_name(mask);
        m["forest_auc"] = res.roc.auc;
        m["forest_auc_mean"] = res.roc.auc_mean;
        m["forest_auc_std"] = res.roc.auc_std;
        m["forest_fold_aucs"] = res.roc.fold_aucs;
        m["pc_scalar_auc"] = pc.auc;
      }
      write_json((fs::path(evl_out) / "metrics.json").string(), m);
      std::cout << m.dump(2) << '\n';
    } else if (*cmd_ablate) {
      const auto data = load_training(tr_mle, tr_labels, kCountsMask);
      CvOptions cv;
      cv.folds = folds;
      cv.forest = tr_params;
      const auto rows = feature_ablation(data.features, data.labels, cv);
      auto out = csv::open_output(ab_out);
      out << "features,n_features,auc,auc_std\n";
      for (const auto& r : rows) {
        out << mask_name(r.mask) << ',' << mask_size(r.mask) << ',' << csv::format_double(r.auc) << ','
            << csv::format_double(r.auc_std) << '\n';
        std::cout << mask_name(r.mask) << '\t' << r.auc << '\n';
      }
      std::vector<double> a01, a10;
      for (const auto& f : data.features) {
        a01.push_back(f.values[kA01]);
        a10.push_back(f.values[kA10]);
      }
      std::cout << "pearson(A01, A10) = " << pearson(a01, a10) << '\n';
    } else if (*cmd_run) {
      const auto rep = run_pipeline(build_config());
      std::cout << report(fs::path(rep.metrics_path).parent_path().string());
    } else if (*cmd_grid) {
      const auto c = build_config();
      std::cout << "alpha\ttau\tbalanced_auc\tfull_auc\truntime_s\n";
      for (const auto& r : grid_search(c)) {
        std::cout << r.alpha << '\t' << r.tau << '\t' << r.balanced_auc << '\t' << r.full_auc << '\t' << r.runtime_s
                  << '\n';
      }
    } else if (*cmd_report) {
      std::cout << report(rp_dir, rp_top_k);
    }
  } catch (const StageError& e) {
    std::cerr << "nexica " << stage << ": error " << e.what() << '\n';
    return 1;
  } catch (const ParameterError& e) {
    std::cerr << "nexica " << stage << ": error [" << stage << "] " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "nexica " << stage << ": error [" << stage << "] " << e.what() << '\n';
    return 1;
  }
  return 0;
}
