#include "mdsyn/model.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "mdsyn/errors.hpp"

namespace mdsyn {

using nlohmann::json;

Parameter& ModelState::add(const std::string& name, Tensor value) {
  params_.push_back(std::make_unique<Parameter>(name, std::move(value)));
  names_.push_back(name);
  by_name_[name] = params_.back().get();
  return *params_.back();
}

Parameter& ModelState::param(const std::string& name) {
  const auto it = by_name_.find(name);
  if (it == by_name_.end()) throw NumericError("unknown parameter '" + name + "'");
  return *it->second;
}

const Parameter& ModelState::param(const std::string& name) const {
  const auto it = by_name_.find(name);
  if (it == by_name_.end()) throw NumericError("unknown parameter '" + name + "'");
  return *it->second;
}

std::vector<Parameter*> ModelState::trainable() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::size_t ModelState::classifier_input_dim() const {
  switch (variant) {
    case Variant::full: return 2 * kDrugEmbeddingDim + kCellCompressedDim + kPoolOutDim;
    case Variant::one_d: return 2 * kDrugEmbeddingDim + kCellCompressedDim;
    case Variant::two_d:
    case Variant::two_d_no_trans: return kPoolOutDim;
  }
  return 0;
}

ModelState ModelState::initialize(const ModelConfig& config, Variant variant, EncoderMode1D mode,
                                  std::size_t panel_size, std::uint64_t seed) {
  config.validate();
  if (panel_size == 0) throw ConfigError("panel_size must be positive");
  ModelState s;
  s.config = config;
  s.variant = variant;
  s.encoder_mode = mode;
  s.panel_size = panel_size;
  s.seed = seed;

  const auto glorot = [&](const std::string& name, std::size_t r, std::size_t c) {
    Rng rng = Rng::derive(seed, "init:" + name);
    s.add(name, glorot_uniform(r, c, rng));
  };
  const auto zeros = [&](const std::string& name, std::size_t r, std::size_t c) {
    s.add(name, Tensor(r, c));
  };
  const auto ones = [&](const std::string& name, std::size_t r, std::size_t c) {
    s.add(name, Tensor::full(r, c, 1.0));
  };

  if (s.uses_1d()) {
    glorot("cell.w1", panel_size, kCellHidden1);
    zeros("cell.b1", 1, kCellHidden1);
    glorot("cell.w2", kCellHidden1, kCellHidden2);
    zeros("cell.b2", 1, kCellHidden2);
    glorot("cell.w3", kCellHidden2, kCellCompressedDim);
    zeros("cell.b3", 1, kCellCompressedDim);
    if (mode == EncoderMode1D::fallback) {
      glorot("tok.embed", kTokenVocabSize, kTokenEmbeddingDim);
      glorot("tok.proj_w", kTokenEmbeddingDim, kDrugEmbeddingDim);
      zeros("tok.proj_b", 1, kDrugEmbeddingDim);
    }
  }
  if (s.uses_2d()) {
    glorot("gcn.w1", static_cast<std::size_t>(config.gcn_hidden_units[0]),
           static_cast<std::size_t>(config.gcn_hidden_units[1]));
    glorot("gcn.w2", static_cast<std::size_t>(config.gcn_hidden_units[1]),
           static_cast<std::size_t>(config.gcn_hidden_units[2]));
    if (s.uses_encoders()) {
      const std::size_t d_k = kNodeDim / static_cast<std::size_t>(config.attention_heads);
      for (int l = 0; l < config.encoder_layers; ++l) {
        const std::string prefix = "enc" + std::to_string(l) + ".";
        for (int h = 0; h < config.attention_heads; ++h) {
          const std::string head = "h" + std::to_string(h) + ".";
          glorot(prefix + head + "wq", kNodeDim, d_k);
          glorot(prefix + head + "wk", kNodeDim, d_k);
          glorot(prefix + head + "wv", kNodeDim, d_k);
        }
        glorot(prefix + "wo", kNodeDim, kNodeDim);
        glorot(prefix + "ffn_w1", kNodeDim, static_cast<std::size_t>(config.encoder_hidden));
        zeros(prefix + "ffn_b1", 1, static_cast<std::size_t>(config.encoder_hidden));
        glorot(prefix + "ffn_w2", static_cast<std::size_t>(config.encoder_hidden), kNodeDim);
        zeros(prefix + "ffn_b2", 1, kNodeDim);
        ones(prefix + "ln1_gain", 1, kNodeDim);
        zeros(prefix + "ln1_bias", 1, kNodeDim);
        ones(prefix + "ln2_gain", 1, kNodeDim);
        zeros(prefix + "ln2_bias", 1, kNodeDim);
      }
    }
    glorot("pool.w", kNodeDim, kPoolOutDim);
    zeros("pool.b", 1, kPoolOutDim);
  }
  const std::size_t input_dim = s.classifier_input_dim();
  glorot("clf.w1", input_dim, kClassifierHidden1);
  zeros("clf.b1", 1, kClassifierHidden1);
  glorot("clf.w2", kClassifierHidden1, kClassifierHidden2);
  zeros("clf.b2", 1, kClassifierHidden2);
  glorot("clf.w3", kClassifierHidden2, 2);
  zeros("clf.b3", 1, 2);
  return s;
}

GcnParams ModelState::gcn() {
  return GcnParams{&param("gcn.w1"), &param("gcn.w2")};
}

TransPoolParams ModelState::trans_pool() {
  TransPoolParams p;
  if (uses_encoders()) {
    for (int l = 0; l < config.encoder_layers; ++l) {
      const std::string prefix = "enc" + std::to_string(l) + ".";
      EncoderLayerParams lay;
      for (int h = 0; h < config.attention_heads; ++h) {
        const std::string head = "h" + std::to_string(h) + ".";
        lay.wq.push_back(&param(prefix + head + "wq"));
        lay.wk.push_back(&param(prefix + head + "wk"));
        lay.wv.push_back(&param(prefix + head + "wv"));
      }
      lay.wo = &param(prefix + "wo");
      lay.ffn_w1 = &param(prefix + "ffn_w1");
      lay.ffn_b1 = &param(prefix + "ffn_b1");
      lay.ffn_w2 = &param(prefix + "ffn_w2");
      lay.ffn_b2 = &param(prefix + "ffn_b2");
      lay.ln1_gain = &param(prefix + "ln1_gain");
      lay.ln1_bias = &param(prefix + "ln1_bias");
      lay.ln2_gain = &param(prefix + "ln2_gain");
      lay.ln2_bias = &param(prefix + "ln2_bias");
      p.layers.push_back(std::move(lay));
    }
  }
  p.pool_w = &param("pool.w");
  p.pool_b = &param("pool.b");
  return p;
}

CellMlpParams ModelState::cell_mlp() {
  return CellMlpParams{&param("cell.w1"), &param("cell.b1"), &param("cell.w2"),
                       &param("cell.b2"), &param("cell.w3"), &param("cell.b3")};
}

TokenEncoderParams ModelState::token_encoder() {
  return TokenEncoderParams{&param("tok.embed"), &param("tok.proj_w"), &param("tok.proj_b")};
}

ModelState::ClassifierParams ModelState::classifier() {
  return ClassifierParams{&param("clf.w1"), &param("clf.b1"), &param("clf.w2"),
                          &param("clf.b2"), &param("clf.w3"), &param("clf.b3")};
}

std::map<std::string, Tensor> ModelState::capture_values() const {
  std::map<std::string, Tensor> out;
  for (const auto& p : params_) out[p->name] = p->value;
  return out;
}

void ModelState::restore_values(const std::map<std::string, Tensor>& values) {
  for (auto& p : params_) {
    const auto it = values.find(p->name);
    if (it == values.end()) throw NumericError("restore_values: missing '" + p->name + "'");
    p->value = it->second;
  }
}

namespace {

Tape::NodeId classify(Tape& tape, ModelState& state, Tape::NodeId features,
                      const ForwardOptions& opt, TripletForward& out) {
  const auto act = [&](Tape::NodeId x) {
    return opt.activation == "gelu" ? tape.gelu(x) : tape.relu(x);
  };
  auto p = state.classifier();
  Tape::NodeId h = tape.add_rowvec(tape.matmul(features, tape.param(*p.w1)), tape.param(*p.b1));
  h = act(h);
  out.hidden512 = h;
  if (opt.training && opt.dropout > 0.0) h = tape.dropout(h, opt.dropout, true, *opt.rng);
  h = tape.add_rowvec(tape.matmul(h, tape.param(*p.w2)), tape.param(*p.b2));
  h = act(h);
  out.hidden32 = h;
  h = tape.add_rowvec(tape.matmul(h, tape.param(*p.w3)), tape.param(*p.b3));
  return tape.softmax_rows(h);
}

}  // namespace

TripletForward forward_triplet(Tape& tape, ModelState& state, const TripletInputs& in,
                               const ForwardOptions& opt, AttentionRecord* record) {
  TripletForward out;
  std::vector<Tape::NodeId> feature_parts;

  if (state.uses_1d()) {
    Tape::NodeId drug_a, drug_b;
    if (state.encoder_mode == EncoderMode1D::precomputed) {
      if (in.drug_a_768 == nullptr || in.drug_b_768 == nullptr) {
        throw MissingEmbeddingError("precomputed 768-dim drug embedding not provided");
      }
      drug_a = tape.constant(*in.drug_a_768);
      drug_b = tape.constant(*in.drug_b_768);
    } else {
      if (in.smiles_a == nullptr || in.smiles_b == nullptr) {
        throw DataGapError("fallback drug encoder needs SMILES strings");
      }
      const TokenEncoderParams tok = state.token_encoder();
      drug_a = encode_drug_fallback(tape, *in.smiles_a, tok);
      drug_b = encode_drug_fallback(tape, *in.smiles_b, tok);
    }
    if (in.expr_std == nullptr) throw DataGapError("standardized expression not provided");
    const Tape::NodeId cell = cell_mlp_forward(tape, *in.expr_std, state.cell_mlp(), opt);
    feature_parts.push_back(assemble_1d(tape, drug_a, drug_b, cell));
  }

  if (state.uses_2d()) {
    if (in.norm_adj_a == nullptr || in.feat_a == nullptr || in.norm_adj_b == nullptr ||
        in.feat_b == nullptr || in.ppi_embedding == nullptr) {
      throw DataGapError("2D path needs molecular graphs and the PPI embedding");
    }
    const GcnParams gcn = state.gcn();
    const Tape::NodeId nodes_a = gcn_forward(tape, *in.norm_adj_a, *in.feat_a, gcn, opt);
    const Tape::NodeId nodes_b = gcn_forward(tape, *in.norm_adj_b, *in.feat_b, gcn, opt);
    const Tape::NodeId ppi = tape.constant(*in.ppi_embedding);
    const TransPoolParams pool = state.trans_pool();
    const Tape::NodeId pooled =
        state.uses_encoders() ? graph_trans_pool(tape, nodes_a, nodes_b, ppi, pool, opt, record)
                              : direct_pool(tape, nodes_a, nodes_b, ppi, pool, opt);
    feature_parts.push_back(pooled);
  }

  const Tape::NodeId features =
      feature_parts.size() == 1 ? feature_parts[0] : tape.concat_cols(feature_parts);
  out.probs = classify(tape, state, features, opt, out);
  return out;
}

// ---- checkpoint io ----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'M', 'D', 'S', 'Y', 'N', 'C', 'K', '1'};

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

void ModelState::save(const std::string& path) const {
  json manifest;
  manifest["version"] = 1;
  manifest["fingerprint"] = hex64(fingerprint());
  manifest["seed"] = seed;
  manifest["variant"] = variant_name(variant);
  manifest["encoder"] = encoder_mode_name(encoder_mode);
  manifest["panel_size"] = panel_size;
  manifest["config"] = json::parse(config.to_json_text());
  manifest["standardizer_fitted"] = standardizer.fitted();
  json tensors = json::array();
  for (const auto& p : params_) {
    tensors.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
  }
  if (standardizer.fitted()) {
    tensors.push_back({{"name", "std.mean"}, {"rows", 1}, {"cols", standardizer.mean.cols()}});
    tensors.push_back({{"name", "std.stdev"}, {"rows", 1}, {"cols", standardizer.stdev.cols()}});
  }
  manifest["tensors"] = tensors;
  const std::string header = manifest.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write checkpoint '" + path + "'");
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t len = header.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  const auto write_tensor = [&](const Tensor& t) {
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
  };
  for (const auto& p : params_) write_tensor(p->value);
  if (standardizer.fitted()) {
    write_tensor(standardizer.mean);
    write_tensor(standardizer.stdev);
  }
  if (!out) throw FileError("failed while writing checkpoint '" + path + "'");
}

ModelState ModelState::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open checkpoint '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw SchemaError("'" + path + "' is not a checkpoint file");
  }
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string header(len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(len));
  if (!in) throw SchemaError("'" + path + "': truncated manifest");

  json manifest;
  try {
    manifest = json::parse(header);
  } catch (const json::exception& e) {
    throw SchemaError("'" + path + "': bad manifest: " + std::string(e.what()));
  }
  if (manifest.at("version").get<int>() != 1) {
    throw SchemaError("'" + path + "': unsupported checkpoint version");
  }
  const ModelConfig config = ModelConfig::from_json_text(manifest.at("config").dump());
  const Variant variant = variant_from_string(manifest.at("variant").get<std::string>());
  const EncoderMode1D mode = manifest.at("encoder").get<std::string>() == "precomputed"
                                 ? EncoderMode1D::precomputed
                                 : EncoderMode1D::fallback;
  const std::size_t panel = manifest.at("panel_size").get<std::size_t>();
  const std::uint64_t seed = manifest.at("seed").get<std::uint64_t>();

  ModelState s = initialize(config, variant, mode, panel, seed);
  const std::string expected = hex64(s.fingerprint());
  const std::string stored = manifest.at("fingerprint").get<std::string>();
  if (expected != stored) {
    throw ConfigError("'" + path + "': config fingerprint mismatch (stored " + stored +
                      ", recomputed " + expected + ")");
  }

  const auto read_tensor = [&](Tensor& t) {
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
  };
  for (const auto& entry : manifest.at("tensors")) {
    const std::string name = entry.at("name").get<std::string>();
    const std::size_t rows = entry.at("rows").get<std::size_t>();
    const std::size_t cols = entry.at("cols").get<std::size_t>();
    Tensor* target = nullptr;
    if (name == "std.mean") {
      s.standardizer.mean = Tensor(rows, cols);
      target = &s.standardizer.mean;
    } else if (name == "std.stdev") {
      s.standardizer.stdev = Tensor(rows, cols);
      target = &s.standardizer.stdev;
    } else {
      Parameter& p = s.param(name);
      if (p.value.rows() != rows || p.value.cols() != cols) {
        throw SchemaError("'" + path + "': tensor '" + name + "' has unexpected shape");
      }
      target = &p.value;
    }
    read_tensor(*target);
  }
  if (!in) throw SchemaError("'" + path + "': truncated tensor data");
  return s;
}

}  // namespace mdsyn
