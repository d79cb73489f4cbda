#pragma once

#include "nexica/sweep.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nexica {

enum Feature : int { kA00 = 0, kA01, kA10, kA11, kPc, kFeatureCount };

// Bit k selects Feature k.
using FeatureMask = std::uint8_t;
inline constexpr FeatureMask kCountsMask = 0b01111;
inline constexpr FeatureMask kPcMask = 0b10000;
inline constexpr FeatureMask kCountsPcMask = kCountsMask | kPcMask;

std::string mask_name(FeatureMask mask);        // e.g. "A01+A10"
FeatureMask parse_mask(const std::string& text);  // inverse of mask_name; also "counts", "counts+pc", "pc"
int mask_size(FeatureMask mask);

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  FeatureMask mask = kCountsMask;
  std::string cause;
  std::string effect;
  int lag = 0;

  std::vector<double> selected() const;
};

FeatureVector make_features(const PairRecord& record, FeatureMask mask);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double positive_fraction = 0.0;
};

class DecisionTree {
public:
  std::vector<TreeNode> nodes;

  // True when the reached leaf holds a positive majority.
  bool vote(std::span<const double> x) const;
};

struct ForestParams {
  int n_trees = 1000;
  int max_depth = 0;          // 0: unlimited
  int min_samples_split = 2;
  int max_features = 0;       // 0: floor(sqrt(d)), at least 1
  std::uint64_t seed = 0;
  int threads = 0;            // 0: OpenMP default
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  FeatureMask mask = kCountsMask;
  std::uint64_t seed = 0;

  int n_trees() const { return static_cast<int>(trees.size()); }
  std::uint64_t hash() const;
};

// CART trees on Gini impurity, each grown on a bootstrap sample with a
// random feature subset tried at every split. Trees train in parallel; the
// result depends only on the data and params.seed.
ForestModel train_forest(std::span<const FeatureVector> features, std::span<const int> labels,
                         const ForestParams& params, FeatureMask mask);

// Fraction of trees voting positive.
double predict_proba(const ForestModel& model, const FeatureVector& feature);
std::vector<double> predict_proba(const ForestModel& model, std::span<const FeatureVector> features);

void save_model(const std::string& path, const ForestModel& model);
ForestModel load_model(const std::string& path);

} // namespace nexica
