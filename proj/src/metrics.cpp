#include "mdsyn/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>

#include "mdsyn/errors.hpp"

namespace mdsyn {

MetricsReport compute_metrics(const std::vector<double>& scores, const std::vector<int>& labels,
                              double threshold) {
  if (scores.empty() || scores.size() != labels.size()) {
    throw ShapeError("compute_metrics: need equally sized, non-empty scores and labels");
  }
  MetricsReport r;
  for (int l : labels) {
    if (l == 1) {
      ++r.n_pos;
    } else {
      ++r.n_neg;
    }
  }

  // confusion counts at the threshold
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    if (labels[i] == 1) {
      pred ? ++tp : ++fn;
    } else {
      pred ? ++fp : ++tn;
    }
  }
  const double n = static_cast<double>(scores.size());
  r.acc = static_cast<double>(tp + tn) / n;
  const double tpr = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  const double tnr = tn + fp > 0 ? static_cast<double>(tn) / static_cast<double>(tn + fp) : 0.0;
  r.tpr = tpr;
  r.bacc = (tpr + tnr) / 2.0;
  r.prec = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.f1 = r.prec + r.tpr > 0.0 ? 2.0 * r.prec * r.tpr / (r.prec + r.tpr) : 0.0;
  const double po = static_cast<double>(tp + tn) / n;
  const double pe = (static_cast<double>((tp + fp) * (tp + fn)) +
                     static_cast<double>((fn + tn) * (fp + tn))) /
                    (n * n);
  r.kappa = pe < 1.0 ? (po - pe) / (1.0 - pe) : 0.0;

  if (r.n_pos == 0 || r.n_neg == 0) {
    r.ranking_defined = false;
    return r;
  }
  r.ranking_defined = true;

  // AUROC via the rank statistic: sweep score groups ascending, counting
  // correctly ordered and tied positive/negative pairs.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::int64_t wins = 0, ties = 0, neg_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::int64_t gp = 0, gn = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      labels[order[j]] == 1 ? ++gp : ++gn;
      ++j;
    }
    wins += gp * neg_below;
    ties += gp * gn;
    neg_below += gn;
    i = j;
  }
  r.auroc = (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) /
            (static_cast<double>(r.n_pos) * static_cast<double>(r.n_neg));

  // Average precision over distinct thresholds, descending.
  double ap = 0.0;
  double recall_prev = 0.0;
  std::int64_t ctp = 0, cfp = 0;
  for (std::size_t i = order.size(); i > 0;) {
    std::size_t j = i;
    while (j > 0 && scores[order[j - 1]] == scores[order[i - 1]]) {
      labels[order[j - 1]] == 1 ? ++ctp : ++cfp;
      --j;
    }
    const double recall = static_cast<double>(ctp) / static_cast<double>(r.n_pos);
    const double precision = static_cast<double>(ctp) / static_cast<double>(ctp + cfp);
    ap += (recall - recall_prev) * precision;
    recall_prev = recall;
    i = j;
  }
  r.aupr = ap;
  return r;
}

}  // namespace mdsyn
