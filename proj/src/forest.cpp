#include "nexica/forest.hpp"

#include "nexica/error.hpp"
#include "nexica/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <omp.h>

namespace nexica {

namespace {
constexpr const char* kFeatureNames[kFeatureCount] = {"A00", "A01", "A10", "A11", "p_c"};
}

std::string mask_name(FeatureMask mask) {
  std::string out;
  for (int f = 0; f < kFeatureCount; ++f) {
    if (mask & (1U << f)) {
      if (!out.empty()) out += '+';
      out += kFeatureNames[f];
    }
  }
  return out;
}

FeatureMask parse_mask(const std::string& text) {
  if (text == "counts") return kCountsMask;
  if (text == "counts+pc") return kCountsPcMask;
  if (text == "pc") return kPcMask;
  FeatureMask mask = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find('+', start);
    const auto tok = text.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    bool found = false;
    for (int f = 0; f < kFeatureCount; ++f) {
      if (tok == kFeatureNames[f]) {
        mask |= static_cast<FeatureMask>(1U << f);
        found = true;
      }
    }
    if (!found) throw ParameterError("unknown feature '" + tok + "'");
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return mask;
}

int mask_size(FeatureMask mask) {
  int n = 0;
  for (int f = 0; f < kFeatureCount; ++f) n += (mask >> f) & 1;
  return n;
}

std::vector<double> FeatureVector::selected() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(mask_size(mask)));
  for (int f = 0; f < kFeatureCount; ++f) {
    if (mask & (1U << f)) out.push_back(values[static_cast<std::size_t>(f)]);
  }
  return out;
}

FeatureVector make_features(const PairRecord& r, FeatureMask mask) {
  if (mask == 0 || mask >= (1U << kFeatureCount)) throw ParameterError("invalid feature mask");
  FeatureVector fv;
  fv.values = {static_cast<double>(r.counts.a00), static_cast<double>(r.counts.a01),
               static_cast<double>(r.counts.a10), static_cast<double>(r.counts.a11),
               r.estimate ? r.estimate->p_c : estimate(r.counts).p_c};
  fv.mask = mask;
  fv.cause = r.cause;
  fv.effect = r.effect;
  fv.lag = r.counts.lag;
  return fv;
}

bool DecisionTree::vote(std::span<const double> x) const {
  std::size_t k = 0;
  while (nodes[k].feature >= 0) {
    const auto& n = nodes[k];
    k = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[k].positive_fraction > 0.5;
}

namespace {

// Column-major design matrix restricted to the active features.
struct Design {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // data[c * rows + r]

  double at(std::size_t r, std::size_t c) const { return data[c * rows + r]; }
};

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = -1.0;  // larger is better
};

class TreeBuilder {
public:
  TreeBuilder(const Design& x, std::span<const int> y, const ForestParams& p, std::uint64_t seed)
      : x_(x), y_(y), params_(p), rng_(seed) {
    const int d = static_cast<int>(x.cols);
    try_features_ = p.max_features > 0 ? std::min(p.max_features, d)
                                       : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
  }

  DecisionTree build() {
    const std::size_t n = x_.rows;
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = static_cast<std::size_t>(rng_.below(n));

    DecisionTree tree;
    struct Pending {
      int node;
      std::size_t begin, end;
      int depth;
    };
    std::vector<Pending> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, 0, n, 0});
    std::vector<std::pair<double, int>> buf;

    while (!stack.empty()) {
      const Pending job = stack.back();
      stack.pop_back();
      const std::size_t count = job.end - job.begin;
      std::size_t pos = 0;
      for (std::size_t k = job.begin; k < job.end; ++k) pos += static_cast<std::size_t>(y_[idx[k]]);
      tree.nodes[static_cast<std::size_t>(job.node)].positive_fraction =
          static_cast<double>(pos) / static_cast<double>(count);

      const bool pure = pos == 0 || pos == count;
      const bool depth_capped = params_.max_depth > 0 && job.depth >= params_.max_depth;
      if (pure || depth_capped || count < static_cast<std::size_t>(params_.min_samples_split)) continue;

      const Split best = find_split(idx, job.begin, job.end, buf);
      if (best.feature < 0) continue;

      const auto mid = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(job.begin),
                                      idx.begin() + static_cast<std::ptrdiff_t>(job.end), [&](std::size_t r) {
                                        return x_.at(r, static_cast<std::size_t>(best.feature)) <= best.threshold;
                                      });
      const auto split_at = static_cast<std::size_t>(mid - idx.begin());
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[static_cast<std::size_t>(job.node)];
      node.feature = best.feature;
      node.threshold = best.threshold;
      node.left = left;
      node.right = left + 1;
      stack.push_back({left + 1, split_at, job.end, job.depth + 1});
      stack.push_back({left, job.begin, split_at, job.depth + 1});
    }
    return tree;
  }

private:
  Split find_split(const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end,
                   std::vector<std::pair<double, int>>& buf) {
    std::vector<int> order(x_.cols);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng_.below(i))]);
    }

    Split best;
    // Keep drawing features past the quota until some valid split exists.
    for (std::size_t t = 0; t < order.size(); ++t) {
      if (static_cast<int>(t) >= try_features_ && best.feature >= 0) break;
      const int f = order[t];
      buf.clear();
      for (std::size_t k = begin; k < end; ++k) buf.emplace_back(x_.at(idx[k], static_cast<std::size_t>(f)), y_[idx[k]]);
      std::sort(buf.begin(), buf.end());

      const double n = static_cast<double>(buf.size());
      double total_pos = 0;
      for (const auto& b : buf) total_pos += b.second;
      double left_pos = 0;
      for (std::size_t k = 0; k + 1 < buf.size(); ++k) {
        left_pos += buf[k].second;
        if (buf[k].first == buf[k + 1].first) continue;
        const double nl = static_cast<double>(k + 1);
        const double nr = n - nl;
        const double right_pos = total_pos - left_pos;
        const double score = (left_pos * left_pos + (nl - left_pos) * (nl - left_pos)) / nl +
                             (right_pos * right_pos + (nr - right_pos) * (nr - right_pos)) / nr;
        if (score > best.score) {
          double thr = 0.5 * (buf[k].first + buf[k + 1].first);
          if (!(thr < buf[k + 1].first)) thr = buf[k].first;
          best = {f, thr, score};
        }
      }
    }
    return best;
  }

  const Design& x_;
  std::span<const int> y_;
  const ForestParams& params_;
  SplitMix64 rng_;
  int try_features_ = 1;
};

} // namespace

ForestModel train_forest(std::span<const FeatureVector> features, std::span<const int> labels,
                         const ForestParams& params, FeatureMask mask) {
  if (params.n_trees < 1) throw ParameterError("n_trees must be >= 1");
  if (mask == 0 || mask >= (1U << kFeatureCount)) throw ParameterError("invalid feature mask");
  if (features.size() != labels.size()) throw ConsistencyError("features and labels differ in length");
  std::size_t pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw TrainingError("labels must be 0 or 1");
    pos += static_cast<std::size_t>(l);
  }
  if (pos == 0 || pos == labels.size()) throw TrainingError("training set needs samples of both classes");

  Design x;
  x.rows = features.size();
  x.cols = static_cast<std::size_t>(mask_size(mask));
  x.data.resize(x.rows * x.cols);
  std::size_t c = 0;
  for (int f = 0; f < kFeatureCount; ++f) {
    if (!(mask & (1U << f))) continue;
    for (std::size_t r = 0; r < x.rows; ++r) {
      const double v = features[r].values[static_cast<std::size_t>(f)];
      if (!std::isfinite(v)) throw TrainingError("features must be finite");
      x.data[c * x.rows + r] = v;
    }
    ++c;
  }

  ForestModel model;
  model.mask = mask;
  model.seed = params.seed;
  model.trees.resize(static_cast<std::size_t>(params.n_trees));
  const int n_trees = params.n_trees;
#pragma omp parallel for schedule(dynamic) num_threads(params.threads > 0 ? params.threads : omp_get_max_threads())
  for (int t = 0; t < n_trees; ++t) {
    TreeBuilder builder(x, labels, params, key_hash(params.seed, static_cast<std::uint64_t>(t), 0x7eedULL));
    model.trees[static_cast<std::size_t>(t)] = builder.build();
  }
  return model;
}

double predict_proba(const ForestModel& model, const FeatureVector& feature) {
  if (feature.mask != model.mask) {
    throw ParameterError("feature mask " + mask_name(feature.mask) + " does not match model mask " +
                         mask_name(model.mask));
  }
  if (model.trees.empty()) throw ParameterError("model has no trees");
  const auto x = feature.selected();
  int votes = 0;
  for (const auto& tree : model.trees) votes += tree.vote(x);
  return static_cast<double>(votes) / static_cast<double>(model.trees.size());
}

std::vector<double> predict_proba(const ForestModel& model, std::span<const FeatureVector> features) {
  std::vector<double> out(features.size());
  const auto n = static_cast<std::ptrdiff_t>(features.size());
  for (const auto& f : features) {
    if (f.mask != model.mask) throw ParameterError("feature mask does not match model mask");
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = predict_proba(model, features[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::uint64_t ForestModel::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  feed(&mask, sizeof(mask));
  for (const auto& t : trees) {
    for (const auto& n : t.nodes) {
      feed(&n.feature, sizeof(n.feature));
      feed(&n.threshold, sizeof(n.threshold));
      feed(&n.left, sizeof(n.left));
      feed(&n.right, sizeof(n.right));
      feed(&n.positive_fraction, sizeof(n.positive_fraction));
    }
  }
  return h;
}

void save_model(const std::string& path, const ForestModel& model) {
  nlohmann::json j;
  j["mask"] = mask_name(model.mask);
  j["seed"] = model.seed;
  auto& trees = j["trees"] = nlohmann::json::array();
  for (const auto& t : model.trees) {
    nlohmann::json jt;
    for (const auto& n : t.nodes) {
      jt["feature"].push_back(n.feature);
      jt["threshold"].push_back(n.threshold);
      jt["left"].push_back(n.left);
      jt["right"].push_back(n.right);
      jt["value"].push_back(n.positive_fraction);
    }
    trees.push_back(std::move(jt));
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump() << '\n';
}

ForestModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
    ForestModel m;
    m.mask = parse_mask(j.at("mask").get<std::string>());
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& jt : j.at("trees")) {
      DecisionTree t;
      const auto& f = jt.at("feature");
      for (std::size_t k = 0; k < f.size(); ++k) {
        t.nodes.push_back({f[k].get<int>(), jt.at("threshold")[k].get<double>(), jt.at("left")[k].get<int>(),
                           jt.at("right")[k].get<int>(), jt.at("value")[k].get<double>()});
      }
      m.trees.push_back(std::move(t));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

} // namespace nexica
