#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mdsyn/errors.hpp"
#include "mdsyn/metrics.hpp"
#include "mdsyn/rng.hpp"

using namespace mdsyn;

namespace {

// O(N^2) pairwise oracle for AUROC.
double auroc_bruteforce(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::int64_t wins = 0, ties = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg) += 1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      if (scores[i] > scores[j]) ++wins;
      else if (scores[i] == scores[j]) ++ties;
    }
  }
  return (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) /
         (static_cast<double>(pos) * static_cast<double>(neg));
}

// Average precision over distinct thresholds, recounted from scratch at each
// threshold (O(N^2)).
double aupr_bruteforce(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::set<double, std::greater<double>> thresholds(scores.begin(), scores.end());
  std::int64_t pos = 0;
  for (int l : labels) pos += l == 1 ? 1 : 0;
  double ap = 0.0, recall_prev = 0.0;
  for (double t : thresholds) {
    std::int64_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) (labels[i] == 1 ? tp : fp) += 1;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - recall_prev) * precision;
    recall_prev = recall;
  }
  return ap;
}

double kappa_bruteforce(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= 0.5;
    if (labels[i] == 1) (pred ? tp : fn) += 1;
    else (pred ? fp : tn) += 1;
  }
  const double n = static_cast<double>(scores.size());
  const double po = static_cast<double>(tp + tn) / n;
  const double pe = (static_cast<double>((tp + fp) * (tp + fn)) +
                     static_cast<double>((fn + tn) * (fp + tn))) /
                    (n * n);
  return pe < 1.0 ? (po - pe) / (1.0 - pe) : 0.0;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("perfect separation scores 1 everywhere") {
  const MetricsReport r = compute_metrics({0.9, 0.8, 0.3, 0.2}, {1, 1, 0, 0});
  CHECK(r.auroc == 1.0);
  CHECK(r.aupr == 1.0);
  CHECK(r.acc == 1.0);
  CHECK(r.kappa == 1.0);
  CHECK(r.f1 == 1.0);
}

TEST_CASE("half-ordered pairs give AUROC 0.5") {
  const MetricsReport r = compute_metrics({0.9, 0.2, 0.8, 0.3}, {1, 1, 0, 0});
  CHECK(r.auroc == 0.5);
}

TEST_CASE("all-majority predictions have zero kappa") {
  const MetricsReport r = compute_metrics({0.9, 0.8, 0.7, 0.6}, {1, 1, 1, 0});
  CHECK(r.kappa == 0.0);
  CHECK(r.acc == doctest::Approx(0.75));
}

TEST_CASE("single-class input flags ranking metrics as undefined") {
  const MetricsReport r = compute_metrics({0.9, 0.2}, {1, 1});
  CHECK_FALSE(r.ranking_defined);
  CHECK(r.acc == doctest::Approx(0.5));
}

TEST_CASE("bacc and f1 satisfy their defining identities") {
  Rng rng(11);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 500; ++i) {
    scores.push_back(rng.uniform());
    labels.push_back(rng.uniform() < 0.4 ? 1 : 0);
  }
  const MetricsReport r = compute_metrics(scores, labels);
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= 0.5;
    if (labels[i] == 1) (pred ? tp : fn) += 1;
    else (pred ? fp : tn) += 1;
  }
  const double tnr = static_cast<double>(tn) / static_cast<double>(tn + fp);
  CHECK(r.bacc == doctest::Approx((r.tpr + tnr) / 2.0).epsilon(1e-12));
  if (r.prec + r.tpr > 0) {
    CHECK(r.f1 == doctest::Approx(2 * r.prec * r.tpr / (r.prec + r.tpr)).epsilon(1e-12));
  }
}

TEST_CASE("rank implementation equals brute force exactly on 200 random vectors") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + rng.uniform_int(60);
    std::vector<double> scores;
    std::vector<int> labels;
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      // quantized scores force plenty of ties
      scores.push_back(std::round(rng.uniform() * 8.0) / 8.0);
      const int l = rng.uniform() < 0.5 ? 1 : 0;
      labels.push_back(l);
      (l == 1 ? has_pos : has_neg) = true;
    }
    if (!has_pos) labels[0] = 1;
    if (!has_neg) labels[n - 1] = 0;
    const MetricsReport r = compute_metrics(scores, labels);
    CHECK(r.auroc == auroc_bruteforce(scores, labels));
    CHECK(r.aupr == aupr_bruteforce(scores, labels));
    CHECK(r.kappa == kappa_bruteforce(scores, labels));
  }
}

TEST_CASE("auroc is invariant under strictly monotone score transforms") {
  Rng rng(77);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 300; ++i) {
    scores.push_back(rng.uniform());
    labels.push_back(i % 3 == 0 ? 1 : 0);
  }
  std::vector<double> cubed = scores;
  for (double& s : cubed) s = s * s * s;
  CHECK(compute_metrics(scores, labels).auroc == compute_metrics(cubed, labels).auroc);
}

TEST_CASE("empty input is rejected") {
  CHECK_THROWS_AS(compute_metrics({}, {}), ShapeError);
}

}  // TEST_SUITE
