#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mdsyn/dataset.hpp"
#include "mdsyn/metrics.hpp"
#include "mdsyn/splits.hpp"
#include "mdsyn/trainer.hpp"

namespace mdsyn {

struct FoldOutcome {
  std::string held_out;
  MetricsReport report;
  int best_epoch = -1;
};

struct CvResult {
  Protocol protocol = Protocol::kfold5;
  std::vector<FoldOutcome> folds;
  MetricsReport mean;
  MetricsReport stdev;
};

// Trains the PPI embedding once per seed if the bundle lacks one, caching it
// as ppi_embedding.seed<S>.tsv in cache_dir (skipped when cache_dir empty).
void ensure_ppi_embedding(DatasetBundle& bundle, const ModelConfig& config, std::uint64_t seed,
                          const std::string& cache_dir);

// Full protocol run: build the split plan, validate its invariants, train one
// model per fold, evaluate on the fold's test set.
CvResult run_cv(DatasetBundle& bundle, Protocol protocol, const ModelConfig& config,
                Variant variant, std::uint64_t seed);

// Table-5-style ablation: 5-fold CV of the given variant wiring.
CvResult run_ablation(DatasetBundle& bundle, Variant variant, const ModelConfig& config,
                      std::uint64_t seed);

MetricsReport mean_of(const std::vector<MetricsReport>& reports);
MetricsReport stdev_of(const std::vector<MetricsReport>& reports, const MetricsReport& mean);

// One row per fold plus a `mean±std` presentation row.
void write_metrics_csv(const std::string& path, const CvResult& result);
void write_metrics_json(const std::string& path, const CvResult& result);
// Single-evaluation variants (independent-dataset path).
void write_single_metrics_csv(const std::string& path, const MetricsReport& report,
                              const std::string& note);
void write_single_metrics_json(const std::string& path, const MetricsReport& report,
                               const std::string& note);

}  // namespace mdsyn
