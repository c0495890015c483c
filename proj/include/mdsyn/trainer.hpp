#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mdsyn/dataset.hpp"
#include "mdsyn/model.hpp"

namespace mdsyn {

// Per-bundle caches shared by training and inference: parsed molecular graphs,
// normalized adjacencies, and (after standardize()) z-scored expression rows.
class FeatureCache {
public:
  FeatureCache(const DatasetBundle& bundle, const ModelConfig& config, Variant variant,
               EncoderMode1D mode);

  // Lists every missing drug/cell-line feature for the given triplets; empty
  // when everything resolves.
  std::vector<std::string> find_gaps(const std::vector<TripletRecord>& triplets) const;

  void standardize(const Standardizer& standardizer);
  bool standardized() const { return !expr_std_.empty(); }

  // Throws DataGapError when a feature is missing.
  TripletInputs inputs_for(const TripletRecord& t, bool swapped = false) const;

  const DatasetBundle& bundle() const { return *bundle_; }

private:
  const DatasetBundle* bundle_;
  Variant variant_;
  EncoderMode1D mode_;
  std::map<std::string, MolecularGraph> graphs_;
  std::map<std::string, Tensor> norm_adj_;
  std::map<std::string, Tensor> drug_768_;
  std::map<std::string, Tensor> expr_std_;
};

struct TrainLogEntry {
  int epoch = 0;
  double train_loss = 0.0;
  double val_auroc = 0.0;   // NaN when no holdout
  double train_accuracy = 0.0;  // NaN unless the capacity stop is active
};

struct TrainResult {
  ModelState state;
  std::vector<TrainLogEntry> log;
  int best_epoch = -1;
  double best_val_auroc = 0.0;
  int epochs_run = 0;
  double initial_loss = 0.0;
  bool aborted_nonfinite = false;
  std::string abort_message;
};

// Trains on bundle.triplets[train_indices]. Holds out a stratified
// val_fraction of the training fold for AUROC-based checkpoint selection and
// early stopping. Requires bundle.ppi_embedding for 2D variants. Throws
// DataGapError (missing features, all offenders listed) before training
// starts; a non-finite loss mid-training restores the last good checkpoint
// and sets aborted_nonfinite instead of throwing.
TrainResult train_model(const DatasetBundle& bundle, const std::vector<std::size_t>& train_indices,
                        const ModelConfig& config, Variant variant, EncoderMode1D mode,
                        std::uint64_t seed);

// Deterministic inference, dropout off, order-preserving. Rows with missing
// features come back with ok=false instead of aborting the batch.
std::vector<SynergyPrediction> predict_batch(ModelState& state, const DatasetBundle& bundle,
                                             const std::vector<TripletRecord>& triplets,
                                             bool capture_hidden = false);

// Resolves "auto" against the bundle's precomputed table.
EncoderMode1D resolve_encoder_mode(const ModelConfig& config, const DatasetBundle& bundle);

void write_train_log_csv(const std::string& path, const std::vector<TrainLogEntry>& log);

}  // namespace mdsyn
