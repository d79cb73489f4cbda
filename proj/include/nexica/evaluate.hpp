#pragma once

#include "nexica/forest.hpp"
#include "nexica/roc.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace nexica {

// Fold id per sample; each class is shuffled with `seed` then dealt
// round-robin, so every fold keeps the class proportions.
std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

struct CvOptions {
  int folds = 5;
  ForestParams forest;  // forest.seed is the root for fold splitting and per-fold training
};

struct CrossValidation {
  RocResult roc;               // pooled out-of-fold AUC plus per-fold spread
  std::vector<double> scores;  // out-of-fold p_forest per sample
};

CrossValidation cross_validate(std::span<const FeatureVector> features, std::span<const int> labels,
                               FeatureMask mask, const CvOptions& options);

struct AblationRow {
  FeatureMask mask = 0;
  double auc = 0.0;
  double auc_std = 0.0;
};

// Cross-validated AUC for each of the 15 nonempty subsets of {A00,A01,A10,A11}.
std::vector<AblationRow> feature_ablation(std::span<const FeatureVector> features, std::span<const int> labels,
                                          const CvOptions& options);

double pearson(std::span<const double> x, std::span<const double> y);

} // namespace nexica
