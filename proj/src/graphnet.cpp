#include "mdsyn/graphnet.hpp"

#include <cmath>

#include "mdsyn/config.hpp"
#include "mdsyn/errors.hpp"

namespace mdsyn {

Tensor normalize_adjacency(const Tensor& adjacency, bool self_loops) {
  if (adjacency.rows() != adjacency.cols()) {
    throw ShapeError("normalize_adjacency: adjacency must be square, got " + adjacency.shape_str());
  }
  const std::size_t n = adjacency.rows();
  Tensor a = adjacency;
  if (self_loops) {
    for (std::size_t i = 0; i < n; ++i) a.at(i, i) += 1.0;
  }
  std::vector<double> inv_sqrt_deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) d += a.at(i, j);
    inv_sqrt_deg[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  Tensor out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.at(i, j) = inv_sqrt_deg[i] * a.at(i, j) * inv_sqrt_deg[j];
    }
  }
  return out;
}

namespace {

Tape::NodeId activate(Tape& tape, Tape::NodeId x, const ForwardOptions& opt) {
  return opt.activation == "gelu" ? tape.gelu(x) : tape.relu(x);
}

Tape::NodeId maybe_dropout(Tape& tape, Tape::NodeId x, const ForwardOptions& opt) {
  if (opt.training && opt.dropout > 0.0) return tape.dropout(x, opt.dropout, true, *opt.rng);
  return x;
}

Tape::NodeId pool_and_project(Tape& tape, Tape::NodeId tokens, const TransPoolParams& params,
                              const ForwardOptions& opt) {
  const Tape::NodeId pooled = opt.pooling == "max" ? tape.max_rows(tokens) : tape.mean_rows(tokens);
  const Tape::NodeId projected =
      tape.add_rowvec(tape.matmul(pooled, tape.param(*params.pool_w)), tape.param(*params.pool_b));
  return activate(tape, projected, opt);
}

}  // namespace

Tape::NodeId gcn_forward(Tape& tape, const Tensor& normalized_adjacency, const Tensor& features,
                         const GcnParams& params, const ForwardOptions& opt) {
  const Tape::NodeId adj = tape.constant(normalized_adjacency);
  const Tape::NodeId x = tape.constant(features);
  Tape::NodeId h = tape.matmul(tape.matmul(adj, x), tape.param(*params.w1));
  h = activate(tape, h, opt);
  h = tape.matmul(tape.matmul(adj, h), tape.param(*params.w2));
  return activate(tape, h, opt);
}

Tape::NodeId multi_head_attention(Tape& tape, Tape::NodeId x, const EncoderLayerParams& params,
                                  AttentionRecord* record, std::size_t layer_index) {
  const std::size_t heads = params.wq.size();
  if (heads == 0 || params.wk.size() != heads || params.wv.size() != heads) {
    throw ShapeError("multi_head_attention: inconsistent head parameter lists");
  }
  const std::size_t d_k = params.wq[0]->value.cols();
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(d_k));
  std::vector<Tape::NodeId> head_outputs;
  head_outputs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const Tape::NodeId q = tape.matmul(x, tape.param(*params.wq[h]));
    const Tape::NodeId k = tape.matmul(x, tape.param(*params.wk[h]));
    const Tape::NodeId v = tape.matmul(x, tape.param(*params.wv[h]));
    const Tape::NodeId logits = tape.scale(tape.matmul(q, tape.transpose(k)), inv_sqrt_dk);
    const Tape::NodeId attention = tape.softmax_rows(logits);
    if (record != nullptr) {
      if (record->scores.size() <= layer_index) record->scores.resize(layer_index + 1);
      record->scores[layer_index].push_back(tape.value(attention));
    }
    head_outputs.push_back(tape.matmul(attention, v));
  }
  const Tape::NodeId merged = heads == 1 ? head_outputs[0] : tape.concat_cols(head_outputs);
  return tape.matmul(merged, tape.param(*params.wo));
}

Tape::NodeId transformer_encoder_layer(Tape& tape, Tape::NodeId x, const EncoderLayerParams& params,
                                       const ForwardOptions& opt, AttentionRecord* record,
                                       std::size_t layer_index) {
  Tape::NodeId attended = multi_head_attention(tape, x, params, record, layer_index);
  attended = maybe_dropout(tape, attended, opt);
  const Tape::NodeId y = tape.layer_norm(tape.add(x, attended), tape.param(*params.ln1_gain),
                                         tape.param(*params.ln1_bias));
  Tape::NodeId ffn =
      tape.add_rowvec(tape.matmul(y, tape.param(*params.ffn_w1)), tape.param(*params.ffn_b1));
  ffn = activate(tape, ffn, opt);
  ffn = tape.add_rowvec(tape.matmul(ffn, tape.param(*params.ffn_w2)), tape.param(*params.ffn_b2));
  ffn = maybe_dropout(tape, ffn, opt);
  return tape.layer_norm(tape.add(y, ffn), tape.param(*params.ln2_gain),
                         tape.param(*params.ln2_bias));
}

Tape::NodeId graph_trans_pool(Tape& tape, Tape::NodeId nodes_a, Tape::NodeId nodes_b,
                              Tape::NodeId ppi, const TransPoolParams& params,
                              const ForwardOptions& opt, AttentionRecord* record) {
  Tape::NodeId tokens = tape.concat_rows({nodes_a, nodes_b, ppi});
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    tokens = transformer_encoder_layer(tape, tokens, params.layers[l], opt, record, l);
  }
  return pool_and_project(tape, tokens, params, opt);
}

Tape::NodeId direct_pool(Tape& tape, Tape::NodeId nodes_a, Tape::NodeId nodes_b, Tape::NodeId ppi,
                         const TransPoolParams& params, const ForwardOptions& opt) {
  const Tape::NodeId tokens = tape.concat_rows({nodes_a, nodes_b, ppi});
  return pool_and_project(tape, tokens, params, opt);
}

}  // namespace mdsyn
