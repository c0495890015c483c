#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mdsyn/autodiff.hpp"
#include "mdsyn/config.hpp"
#include "mdsyn/encoder1d.hpp"
#include "mdsyn/graphnet.hpp"

namespace mdsyn {

// All learnable tensors of one model instance plus the frozen preprocessing
// statistics. Move-only; use capture_values/restore_values for checkpoints
// during training.
class ModelState {
public:
  ModelConfig config;
  Variant variant = Variant::full;
  EncoderMode1D encoder_mode = EncoderMode1D::fallback;
  std::size_t panel_size = 0;
  std::uint64_t seed = 0;
  Standardizer standardizer;

  ModelState() = default;
  ModelState(const ModelState&) = delete;
  ModelState& operator=(const ModelState&) = delete;
  ModelState(ModelState&&) = default;
  ModelState& operator=(ModelState&&) = default;

  static ModelState initialize(const ModelConfig& config, Variant variant, EncoderMode1D mode,
                               std::size_t panel_size, std::uint64_t seed);

  Parameter& param(const std::string& name);
  const Parameter& param(const std::string& name) const;
  bool has_param(const std::string& name) const { return by_name_.count(name) > 0; }
  std::vector<Parameter*> trainable();
  const std::vector<std::string>& param_names() const { return names_; }

  std::uint64_t fingerprint() const {
    return config.fingerprint(panel_size, variant, encoder_mode);
  }

  bool uses_1d() const { return variant == Variant::full || variant == Variant::one_d; }
  bool uses_2d() const { return variant != Variant::one_d; }
  bool uses_encoders() const {
    return uses_2d() && variant != Variant::two_d_no_trans;
  }
  std::size_t classifier_input_dim() const;

  // structured parameter views
  GcnParams gcn();
  TransPoolParams trans_pool();
  CellMlpParams cell_mlp();
  TokenEncoderParams token_encoder();
  struct ClassifierParams {
    Parameter* w1;
    Parameter* b1;
    Parameter* w2;
    Parameter* b2;
    Parameter* w3;
    Parameter* b3;
  };
  ClassifierParams classifier();

  std::map<std::string, Tensor> capture_values() const;
  void restore_values(const std::map<std::string, Tensor>& values);

  void save(const std::string& path) const;
  static ModelState load(const std::string& path);

private:
  Parameter& add(const std::string& name, Tensor value);

  std::vector<std::unique_ptr<Parameter>> params_;
  std::vector<std::string> names_;
  std::map<std::string, Parameter*> by_name_;
};

// Resolved inputs for one triplet forward pass. Pointers reference caller-owned
// caches; only the parts the variant needs must be set.
struct TripletInputs {
  const Tensor* norm_adj_a = nullptr;
  const Tensor* feat_a = nullptr;
  const Tensor* norm_adj_b = nullptr;
  const Tensor* feat_b = nullptr;
  const Tensor* ppi_embedding = nullptr;  // G x 128
  const Tensor* drug_a_768 = nullptr;
  const Tensor* drug_b_768 = nullptr;
  const std::string* smiles_a = nullptr;
  const std::string* smiles_b = nullptr;
  const Tensor* expr_std = nullptr;  // 1 x G
};

struct TripletForward {
  Tape::NodeId probs = -1;      // 1x2 after softmax
  Tape::NodeId hidden512 = -1;
  Tape::NodeId hidden32 = -1;
};

TripletForward forward_triplet(Tape& tape, ModelState& state, const TripletInputs& in,
                               const ForwardOptions& opt, AttentionRecord* record = nullptr);

struct SynergyPrediction {
  std::string triplet_id;
  double prob_synergy = 0.0;
  double prob_antagonism = 0.0;
  int predicted_label = -1;
  std::vector<double> hidden512;
  std::vector<double> hidden32;
  bool ok = true;
  std::string error;
};

}  // namespace mdsyn
