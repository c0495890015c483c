#pragma once

#include <cstddef>
#include <vector>

namespace mdsyn {

// One evaluation run. auroc/aupr are undefined (and flagged) when only one
// class is present in the labels.
struct MetricsReport {
  double auroc = 0.0;
  double aupr = 0.0;
  bool ranking_defined = false;
  double acc = 0.0;
  double bacc = 0.0;
  double prec = 0.0;
  double tpr = 0.0;
  double kappa = 0.0;
  double f1 = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

// scores are synergy probabilities, labels in {0,1}. Thresholded metrics use
// predicted = (score >= threshold). AUROC counts tied score pairs as 1/2;
// AUPR is step-interpolated average precision over distinct thresholds.
MetricsReport compute_metrics(const std::vector<double>& scores, const std::vector<int>& labels,
                              double threshold = 0.5);

}  // namespace mdsyn
