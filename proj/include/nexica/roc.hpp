#pragma once

#include <span>
#include <string>
#include <vector>

namespace nexica {

struct RocPoint {
  double threshold = 0.0;  // scores >= threshold are called positive
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocResult {
  std::vector<RocPoint> curve;  // starts at (0,0), ends at (1,1)
  double auc = 0.0;
  std::vector<double> fold_aucs;  // filled by cross-validation
  double auc_mean = 0.0;
  double auc_std = 0.0;
};

// Sweeps every distinct score as a threshold. Equal scores cross together,
// so ties add diagonal segments; the trapezoidal area then equals the
// Mann-Whitney U / (#pos * #neg).
RocResult roc_auc(std::span<const double> scores, std::span<const int> labels);

// AUC of thresholding a single feature directly.
RocResult scalar_threshold_auc(std::span<const double> feature_values, std::span<const int> labels);

void write_roc_csv(const std::string& path, const RocResult& roc);

} // namespace nexica
