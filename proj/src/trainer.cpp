#include "mdsyn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "mdsyn/errors.hpp"
#include "mdsyn/metrics.hpp"

namespace mdsyn {

FeatureCache::FeatureCache(const DatasetBundle& bundle, const ModelConfig& config, Variant variant,
                           EncoderMode1D mode)
    : bundle_(&bundle), variant_(variant), mode_(mode) {
  const bool needs_2d = variant != Variant::one_d;
  const bool needs_1d = variant == Variant::full || variant == Variant::one_d;
  std::set<std::string> drugs;
  for (const TripletRecord& t : bundle.triplets) {
    drugs.insert(t.drug_a);
    drugs.insert(t.drug_b);
  }
  for (const std::string& drug : drugs) {
    const auto it = bundle.smiles.find(drug);
    if (it == bundle.smiles.end()) continue;  // reported via find_gaps
    if (needs_2d) {
      MolecularGraph g = parse_smiles(it->second);
      norm_adj_[drug] = normalize_adjacency(g.adjacency, config.self_loops);
      graphs_[drug] = std::move(g);
    }
    if (needs_1d && mode == EncoderMode1D::precomputed) {
      const auto emb = bundle.drug_embeddings.find(drug);
      if (emb != bundle.drug_embeddings.end()) {
        drug_768_[drug] = Tensor::row(emb->second);
      }
    }
  }
}

std::vector<std::string> FeatureCache::find_gaps(const std::vector<TripletRecord>& triplets) const {
  std::set<std::string> gaps;
  for (const TripletRecord& t : triplets) {
    for (const std::string* drug : {&t.drug_a, &t.drug_b}) {
      if (bundle_->smiles.find(*drug) == bundle_->smiles.end()) {
        gaps.insert("drug '" + *drug + "': no SMILES");
      } else if (variant_ != Variant::two_d && variant_ != Variant::two_d_no_trans &&
                 mode_ == EncoderMode1D::precomputed &&
                 drug_768_.find(*drug) == drug_768_.end()) {
        gaps.insert("drug '" + *drug + "': no precomputed 768-dim embedding");
      }
    }
    if (bundle_->expression.find(t.cell_line) == bundle_->expression.end()) {
      gaps.insert("cell line '" + t.cell_line + "': no expression row");
    }
  }
  return {gaps.begin(), gaps.end()};
}

void FeatureCache::standardize(const Standardizer& standardizer) {
  expr_std_.clear();
  for (const auto& [cell, values] : bundle_->expression) {
    expr_std_[cell] = standardizer.apply(values);
  }
}

TripletInputs FeatureCache::inputs_for(const TripletRecord& t, bool swapped) const {
  TripletInputs in;
  const std::string& a = swapped ? t.drug_b : t.drug_a;
  const std::string& b = swapped ? t.drug_a : t.drug_b;
  const bool needs_2d = variant_ != Variant::one_d;
  const bool needs_1d = variant_ == Variant::full || variant_ == Variant::one_d;
  if (needs_2d) {
    const auto ga = graphs_.find(a);
    const auto gb = graphs_.find(b);
    if (ga == graphs_.end() || gb == graphs_.end()) {
      throw DataGapError("no molecular graph for '" + (ga == graphs_.end() ? a : b) + "'");
    }
    in.feat_a = &ga->second.features;
    in.feat_b = &gb->second.features;
    in.norm_adj_a = &norm_adj_.at(a);
    in.norm_adj_b = &norm_adj_.at(b);
    if (!bundle_->has_ppi_embedding) throw DataGapError("bundle has no PPI embedding");
    in.ppi_embedding = &bundle_->ppi_embedding;
  }
  if (needs_1d) {
    if (mode_ == EncoderMode1D::precomputed) {
      const auto ea = drug_768_.find(a);
      const auto eb = drug_768_.find(b);
      if (ea == drug_768_.end() || eb == drug_768_.end()) {
        throw MissingEmbeddingError("no precomputed embedding for '" +
                                    (ea == drug_768_.end() ? a : b) + "'");
      }
      in.drug_a_768 = &ea->second;
      in.drug_b_768 = &eb->second;
    } else {
      const auto sa = bundle_->smiles.find(a);
      const auto sb = bundle_->smiles.find(b);
      if (sa == bundle_->smiles.end() || sb == bundle_->smiles.end()) {
        throw DataGapError("no SMILES for '" + (sa == bundle_->smiles.end() ? a : b) + "'");
      }
      in.smiles_a = &sa->second;
      in.smiles_b = &sb->second;
    }
    const auto expr = expr_std_.find(t.cell_line);
    if (expr == expr_std_.end()) {
      throw DataGapError("no standardized expression for cell line '" + t.cell_line + "'");
    }
    in.expr_std = &expr->second;
  }
  return in;
}

EncoderMode1D resolve_encoder_mode(const ModelConfig& config, const DatasetBundle& bundle) {
  if (config.drug_1d_encoder == "precomputed") return EncoderMode1D::precomputed;
  if (config.drug_1d_encoder == "fallback") return EncoderMode1D::fallback;
  return bundle.drug_embeddings.empty() ? EncoderMode1D::fallback : EncoderMode1D::precomputed;
}

namespace {

struct Sample {
  std::size_t index;
  bool swapped;
};

double evaluate_loss(ModelState& state, const FeatureCache& cache,
                     const std::vector<TripletRecord>& triplets,
                     const std::vector<Sample>& samples, const ForwardOptions& opt) {
  double total = 0.0;
  for (const Sample& s : samples) {
    Tape tape;
    const TripletRecord& t = triplets[s.index];
    const TripletForward f =
        forward_triplet(tape, state, cache.inputs_for(t, s.swapped), opt);
    const Tape::NodeId loss = tape.cross_entropy(f.probs, {t.label});
    total += tape.value(loss).at(0, 0);
  }
  return total / static_cast<double>(samples.size());
}

std::vector<double> evaluate_scores(ModelState& state, const FeatureCache& cache,
                                    const std::vector<TripletRecord>& triplets,
                                    const std::vector<Sample>& samples,
                                    const ForwardOptions& opt) {
  std::vector<double> scores;
  scores.reserve(samples.size());
  for (const Sample& s : samples) {
    Tape tape;
    const TripletForward f =
        forward_triplet(tape, state, cache.inputs_for(triplets[s.index], s.swapped), opt);
    scores.push_back(tape.value(f.probs).at(0, 1));
  }
  return scores;
}

}  // namespace

TrainResult train_model(const DatasetBundle& bundle, const std::vector<std::size_t>& train_indices,
                        const ModelConfig& config, Variant variant, EncoderMode1D mode,
                        std::uint64_t seed) {
  config.validate();
  if (train_indices.empty()) throw DataError("train_model: empty training set");
  const bool needs_2d = variant != Variant::one_d;
  if (needs_2d && !bundle.has_ppi_embedding) {
    throw DataGapError("train_model: bundle has no PPI embedding; run embed-ppi first");
  }

  std::vector<TripletRecord> selected;
  selected.reserve(train_indices.size());
  for (std::size_t i : train_indices) selected.push_back(bundle.triplets.at(i));

  FeatureCache cache(bundle, config, variant, mode);
  const auto gaps = cache.find_gaps(selected);
  if (!gaps.empty()) {
    std::string msg = "training data has " + std::to_string(gaps.size()) + " feature gaps:";
    for (const auto& g : gaps) msg += "\n  " + g;
    throw DataGapError(msg);
  }

  TrainResult result;
  result.state = ModelState::initialize(config, variant, mode, bundle.panel_size(), seed);
  ModelState& state = result.state;

  if (state.uses_1d()) {
    // standardization statistics come from the training fold's cell lines only
    std::set<std::string> train_cells;
    for (const TripletRecord& t : selected) train_cells.insert(t.cell_line);
    std::vector<const std::vector<double>*> rows;
    for (const std::string& cell : train_cells) rows.push_back(&bundle.expression.at(cell));
    state.standardizer = Standardizer::fit(rows);
    cache.standardize(state.standardizer);
  }

  // stratified holdout for checkpoint selection
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    (selected[i].label == 1 ? pos : neg).push_back(i);
  }
  Rng holdout_rng = Rng::derive(seed, "holdout");
  holdout_rng.shuffle(pos);
  holdout_rng.shuffle(neg);
  const std::size_t val_pos = static_cast<std::size_t>(config.val_fraction * static_cast<double>(pos.size()));
  const std::size_t val_neg = static_cast<std::size_t>(config.val_fraction * static_cast<double>(neg.size()));
  std::set<std::size_t> val_set;
  for (std::size_t i = 0; i < val_pos; ++i) val_set.insert(pos[i]);
  for (std::size_t i = 0; i < val_neg; ++i) val_set.insert(neg[i]);

  std::vector<Sample> train_samples, val_samples;
  std::vector<int> val_labels;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    if (val_set.count(i) > 0) {
      val_samples.push_back({i, false});
      val_labels.push_back(selected[i].label);
    } else {
      train_samples.push_back({i, false});
      if (config.augment_swap) train_samples.push_back({i, true});
    }
  }
  const bool has_val = !val_samples.empty() &&
                       std::count(val_labels.begin(), val_labels.end(), 1) > 0 &&
                       std::count(val_labels.begin(), val_labels.end(), 0) > 0;

  ForwardOptions train_opt;
  train_opt.training = true;
  train_opt.dropout = config.dropout;
  train_opt.activation = config.activation;
  train_opt.pooling = config.pooling;
  Rng dropout_rng = Rng::derive(seed, "dropout");
  train_opt.rng = &dropout_rng;
  ForwardOptions eval_opt;
  eval_opt.activation = config.activation;
  eval_opt.pooling = config.pooling;

  result.initial_loss = evaluate_loss(state, cache, selected, train_samples, eval_opt);

  Adam adam(AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8});
  const std::vector<Parameter*> params = state.trainable();
  for (Parameter* p : params) p->zero_grad();

  std::map<std::string, Tensor> best_values = state.capture_values();
  Standardizer best_standardizer = state.standardizer;
  double best_metric = -std::numeric_limits<double>::infinity();
  int since_best = 0;
  Rng shuffle_rng = Rng::derive(seed, "shuffle");

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(train_samples);
    double epoch_loss = 0.0;
    bool aborted = false;
    for (std::size_t start = 0; start < train_samples.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(train_samples.size(), start + static_cast<std::size_t>(config.batch_size));
      double batch_loss_sum = 0.0;
      for (std::size_t s = start; s < stop; ++s) {
        Tape tape;
        const TripletRecord& t = selected[train_samples[s].index];
        const TripletForward f =
            forward_triplet(tape, state, cache.inputs_for(t, train_samples[s].swapped), train_opt);
        const Tape::NodeId loss = tape.cross_entropy(f.probs, {t.label});
        batch_loss_sum += tape.value(loss).at(0, 0);
        tape.backward(loss);
      }
      const double batch_n = static_cast<double>(stop - start);
      if (!std::isfinite(batch_loss_sum)) {
        result.aborted_nonfinite = true;
        result.abort_message = "non-finite loss in epoch " + std::to_string(epoch);
        aborted = true;
        break;
      }
      const double inv = 1.0 / batch_n;
      for (Parameter* p : params) {
        for (std::size_t i = 0; i < p->grad.size(); ++i) p->grad[i] *= inv;
      }
      try {
        adam.step(params);
      } catch (const NumericError& e) {
        result.aborted_nonfinite = true;
        result.abort_message = e.what();
        aborted = true;
        break;
      }
      epoch_loss += batch_loss_sum;
    }
    if (aborted) {
      state.restore_values(best_values);
      state.standardizer = best_standardizer;
      break;
    }

    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.train_loss = epoch_loss / static_cast<double>(train_samples.size());
    entry.val_auroc = std::numeric_limits<double>::quiet_NaN();
    entry.train_accuracy = std::numeric_limits<double>::quiet_NaN();
    result.epochs_run = epoch;

    if (has_val) {
      const auto scores = evaluate_scores(state, cache, selected, val_samples, eval_opt);
      const MetricsReport report = compute_metrics(scores, val_labels);
      entry.val_auroc = report.auroc;
      if (report.auroc > best_metric + 1e-12) {
        best_metric = report.auroc;
        best_values = state.capture_values();
        best_standardizer = state.standardizer;
        result.best_epoch = epoch;
        result.best_val_auroc = report.auroc;
        since_best = 0;
      } else {
        ++since_best;
      }
    } else {
      // no holdout: every epoch is the best-so-far checkpoint
      best_values = state.capture_values();
      best_standardizer = state.standardizer;
      result.best_epoch = epoch;
    }

    bool stop = false;
    if (config.train_accuracy_stop > 0.0) {
      const auto scores = evaluate_scores(state, cache, selected, train_samples, eval_opt);
      std::size_t correct = 0;
      for (std::size_t i = 0; i < train_samples.size(); ++i) {
        const int pred = scores[i] >= 0.5 ? 1 : 0;
        if (pred == selected[train_samples[i].index].label) ++correct;
      }
      entry.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_samples.size());
      if (entry.train_accuracy >= config.train_accuracy_stop) stop = true;
    }
    result.log.push_back(entry);
    if (stop) break;
    if (has_val && since_best >= config.patience) break;
  }

  if (!result.aborted_nonfinite) {
    state.restore_values(best_values);
    state.standardizer = best_standardizer;
  }
  return result;
}

std::vector<SynergyPrediction> predict_batch(ModelState& state, const DatasetBundle& bundle,
                                             const std::vector<TripletRecord>& triplets,
                                             bool capture_hidden) {
  FeatureCache cache(bundle, state.config, state.variant, state.encoder_mode);
  if (state.uses_1d()) {
    if (!state.standardizer.fitted()) {
      throw DataGapError("model has no standardization statistics; was it trained?");
    }
    cache.standardize(state.standardizer);
  }
  ForwardOptions opt;
  opt.activation = state.config.activation;
  opt.pooling = state.config.pooling;

  std::vector<SynergyPrediction> out;
  out.reserve(triplets.size());
  for (const TripletRecord& t : triplets) {
    SynergyPrediction pred;
    pred.triplet_id = t.id();
    try {
      Tape tape;
      const TripletForward f = forward_triplet(tape, state, cache.inputs_for(t), opt);
      const Tensor& probs = tape.value(f.probs);
      pred.prob_antagonism = probs.at(0, 0);
      pred.prob_synergy = probs.at(0, 1);
      pred.predicted_label = pred.prob_synergy >= 0.5 ? 1 : 0;
      if (capture_hidden) {
        pred.hidden512 = tape.value(f.hidden512).values();
        pred.hidden32 = tape.value(f.hidden32).values();
      }
    } catch (const DataError& e) {
      pred.ok = false;
      pred.error = e.what();
    }
    out.push_back(std::move(pred));
  }
  return out;
}

void write_train_log_csv(const std::string& path, const std::vector<TrainLogEntry>& log) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write '" + path + "'");
  out << "epoch,train_loss,val_auroc,train_accuracy\n";
  char buf[64];
  for (const TrainLogEntry& e : log) {
    out << e.epoch << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", e.train_loss);
    out << buf << ',';
    if (std::isnan(e.val_auroc)) {
      out << "";
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g", e.val_auroc);
      out << buf;
    }
    out << ',';
    if (std::isnan(e.train_accuracy)) {
      out << "";
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g", e.train_accuracy);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace mdsyn
