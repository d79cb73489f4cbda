#include "nexica/evaluate.hpp"

#include "nexica/error.hpp"
#include "nexica/rng.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace nexica {

std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw ParameterError("folds must be >= 2");
  std::vector<int> fold(labels.size(), 0);
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    if (members.size() < static_cast<std::size_t>(folds)) {
      throw ParameterError("cannot stratify: class " + std::to_string(cls) + " has " + std::to_string(members.size()) +
                           " samples for " + std::to_string(folds) + " folds");
    }
    SplitMix64 rng(key_hash(seed, static_cast<std::uint64_t>(cls), 0xf01d));
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.below(i)]);
    for (std::size_t k = 0; k < members.size(); ++k) fold[members[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
  }
  return fold;
}

CrossValidation cross_validate(std::span<const FeatureVector> features, std::span<const int> labels,
                               FeatureMask mask, const CvOptions& options) {
  if (features.size() != labels.size()) throw ConsistencyError("features and labels differ in length");
  const auto fold = stratified_folds(labels, options.folds, options.forest.seed);

  std::vector<FeatureVector> masked(features.begin(), features.end());
  for (auto& f : masked) f.mask = mask;

  CrossValidation cv;
  cv.scores.assign(features.size(), 0.0);
  for (int k = 0; k < options.folds; ++k) {
    std::vector<FeatureVector> train_x, test_x;
    std::vector<int> train_y, test_y;
    std::vector<std::size_t> test_idx;
    for (std::size_t i = 0; i < masked.size(); ++i) {
      if (fold[i] == k) {
        test_x.push_back(masked[i]);
        test_y.push_back(labels[i]);
        test_idx.push_back(i);
      } else {
        train_x.push_back(masked[i]);
        train_y.push_back(labels[i]);
      }
    }
    ForestParams p = options.forest;
    p.seed = key_hash(options.forest.seed, static_cast<std::uint64_t>(k), 0xc0de);
    const auto model = train_forest(train_x, train_y, p, mask);
    const auto scores = predict_proba(model, test_x);
    for (std::size_t t = 0; t < test_idx.size(); ++t) cv.scores[test_idx[t]] = scores[t];
    cv.roc.fold_aucs.push_back(roc_auc(scores, test_y).auc);
  }

  const auto pooled = roc_auc(cv.scores, labels);
  cv.roc.curve = pooled.curve;
  cv.roc.auc = pooled.auc;
  const double n = static_cast<double>(cv.roc.fold_aucs.size());
  cv.roc.auc_mean = std::accumulate(cv.roc.fold_aucs.begin(), cv.roc.fold_aucs.end(), 0.0) / n;
  double ss = 0.0;
  for (double a : cv.roc.fold_aucs) ss += (a - cv.roc.auc_mean) * (a - cv.roc.auc_mean);
  cv.roc.auc_std = std::sqrt(ss / (n - 1.0));
  return cv;
}

std::vector<AblationRow> feature_ablation(std::span<const FeatureVector> features, std::span<const int> labels,
                                          const CvOptions& options) {
  std::vector<AblationRow> rows;
  for (FeatureMask mask = 1; mask <= kCountsMask; ++mask) {
    const auto cv = cross_validate(features, labels, mask, options);
    rows.push_back({mask, cv.roc.auc, cv.roc.auc_std});
  }
  return rows;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("pearson needs two equal-length samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nan("");
  return sxy / std::sqrt(sxx * syy);
}

} // namespace nexica
