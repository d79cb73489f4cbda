#include "nexica/roc.hpp"

#include "nexica/csv.hpp"
#include "nexica/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

namespace nexica {

RocResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ConsistencyError("scores and labels differ in length");
  std::int64_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ParameterError("labels must be 0 or 1");
    if (std::isnan(scores[i])) throw ParameterError("scores must not be NaN");
    (labels[i] ? pos : neg) += 1;
  }
  if (pos == 0 || neg == 0) throw DomainError("AUC is undefined without both positive and negative samples");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocResult r;
  r.curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  // Twice the area in units of one (pos, neg) pair, kept exact in integers.
  std::int64_t twice_area = 0;
  std::int64_t tp = 0, fp = 0;
  std::size_t k = 0;
  while (k < order.size()) {
    const double s = scores[order[k]];
    std::int64_t dp = 0, dn = 0;
    while (k < order.size() && scores[order[k]] == s) {
      (labels[order[k]] ? dp : dn) += 1;
      ++k;
    }
    twice_area += dn * (2 * tp + dp);
    tp += dp;
    fp += dn;
    r.curve.push_back({s, static_cast<double>(fp) / static_cast<double>(neg),
                       static_cast<double>(tp) / static_cast<double>(pos)});
  }
  r.auc = static_cast<double>(twice_area) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  r.auc_mean = r.auc;
  return r;
}

RocResult scalar_threshold_auc(std::span<const double> feature_values, std::span<const int> labels) {
  return roc_auc(feature_values, labels);
}

void write_roc_csv(const std::string& path, const RocResult& roc) {
  auto out = csv::open_output(path);
  out << "threshold,fpr,tpr\n";
  for (const auto& p : roc.curve) {
    out << csv::format_double(p.threshold) << ',' << csv::format_double(p.fpr) << ',' << csv::format_double(p.tpr)
        << '\n';
  }
}

} // namespace nexica
