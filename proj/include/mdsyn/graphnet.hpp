#pragma once

#include <string>
#include <vector>

#include "mdsyn/autodiff.hpp"
#include "mdsyn/forward_options.hpp"
#include "mdsyn/smiles.hpp"
#include "mdsyn/tensor.hpp"

namespace mdsyn {

// Attention score matrices captured during a forward pass, one row-stochastic
// NxN matrix per (layer, head) over the token axis [atoms A | atoms B | genes].
struct AttentionRecord {
  std::vector<std::vector<Tensor>> scores;  // [layer][head]
  std::vector<std::string> token_labels;
  std::size_t block_a = 0;  // V_A
  std::size_t block_b = 0;  // V_B

  std::size_t num_layers() const { return scores.size(); }
};

struct GcnParams {
  Parameter* w1 = nullptr;  // 78 x hidden
  Parameter* w2 = nullptr;  // hidden x 128
};

// Per-encoder-layer attention + FFN parameters (non-owning).
struct EncoderLayerParams {
  std::vector<Parameter*> wq;  // per head, 128 x d_k
  std::vector<Parameter*> wk;
  std::vector<Parameter*> wv;
  Parameter* wo = nullptr;      // 128 x 128
  Parameter* ffn_w1 = nullptr;  // 128 x inner
  Parameter* ffn_b1 = nullptr;
  Parameter* ffn_w2 = nullptr;  // inner x 128
  Parameter* ffn_b2 = nullptr;
  Parameter* ln1_gain = nullptr;
  Parameter* ln1_bias = nullptr;
  Parameter* ln2_gain = nullptr;
  Parameter* ln2_bias = nullptr;
};

struct TransPoolParams {
  std::vector<EncoderLayerParams> layers;
  Parameter* pool_w = nullptr;  // 128 x 256
  Parameter* pool_b = nullptr;  // 1 x 256
};

// Symmetric normalization of a 0/1 adjacency. With self_loops the degree is
// taken from A+I; without, isolated nodes map their row to zero.
Tensor normalize_adjacency(const Tensor& adjacency, bool self_loops);

// Two propagation layers with the activation after each one.
Tape::NodeId gcn_forward(Tape& tape, const Tensor& normalized_adjacency, const Tensor& features,
                         const GcnParams& params, const ForwardOptions& opt);

// Scaled dot-product attention over h heads, concatenated and reprojected.
// Captured score matrices are appended to record->scores[layer_index].
Tape::NodeId multi_head_attention(Tape& tape, Tape::NodeId x, const EncoderLayerParams& params,
                                  AttentionRecord* record, std::size_t layer_index);

// LayerNorm(x + Dropout(MHA(x))) -> LayerNorm(y + Dropout(FFN(y))).
Tape::NodeId transformer_encoder_layer(Tape& tape, Tape::NodeId x, const EncoderLayerParams& params,
                                       const ForwardOptions& opt, AttentionRecord* record,
                                       std::size_t layer_index);

// [gA; gB; ppi] through the encoder stack, node pooling, then the final
// activated projection to 256.
Tape::NodeId graph_trans_pool(Tape& tape, Tape::NodeId nodes_a, Tape::NodeId nodes_b,
                              Tape::NodeId ppi, const TransPoolParams& params,
                              const ForwardOptions& opt, AttentionRecord* record);

// Ablation wiring without the encoder stack: pool [gA; gB; ppi] directly and
// apply the final projection.
Tape::NodeId direct_pool(Tape& tape, Tape::NodeId nodes_a, Tape::NodeId nodes_b, Tape::NodeId ppi,
                         const TransPoolParams& params, const ForwardOptions& opt);

}  // namespace mdsyn
