#include "mdsyn/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "mdsyn/errors.hpp"
#include "mdsyn/rng.hpp"

namespace mdsyn {

using nlohmann::json;

Variant variant_from_string(const std::string& s) {
  if (s == "full") return Variant::full;
  if (s == "1d") return Variant::one_d;
  if (s == "2d") return Variant::two_d;
  if (s == "2d_no_trans") return Variant::two_d_no_trans;
  throw ConfigError("unknown variant '" + s + "' (expected full|1d|2d|2d_no_trans)");
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::one_d: return "1d";
    case Variant::two_d: return "2d";
    case Variant::two_d_no_trans: return "2d_no_trans";
  }
  return "?";
}

std::string encoder_mode_name(EncoderMode1D m) {
  return m == EncoderMode1D::precomputed ? "precomputed" : "fallback";
}

namespace {

json node2vec_to_json(const Node2VecParams& p) {
  return json{{"p", p.p},
              {"q", p.q},
              {"walk_len", p.walk_length},
              {"walks_per_node", p.walks_per_node},
              {"window", p.window},
              {"negatives", p.negatives},
              {"epochs", p.epochs}};
}

template <class T>
void read_key(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
  }
}

}  // namespace

ModelConfig ModelConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

ModelConfig ModelConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  static const std::set<std::string> known = {
      "gcn_hidden_units", "pooling", "learning_rate", "dropout", "attention_heads",
      "activation", "encoder_layers", "encoder_hidden", "drug_1d_encoder", "batch_size",
      "max_epochs", "patience", "val_fraction", "self_loops", "augment_swap",
      "train_accuracy_stop", "node2vec"};
  for (const auto& [key, value] : j.items()) {
    if (known.find(key) == known.end()) throw ConfigError("unknown config key '" + key + "'");
  }

  ModelConfig c;
  read_key(j, "gcn_hidden_units", c.gcn_hidden_units);
  read_key(j, "pooling", c.pooling);
  read_key(j, "learning_rate", c.learning_rate);
  read_key(j, "dropout", c.dropout);
  read_key(j, "attention_heads", c.attention_heads);
  read_key(j, "activation", c.activation);
  read_key(j, "encoder_layers", c.encoder_layers);
  read_key(j, "encoder_hidden", c.encoder_hidden);
  read_key(j, "drug_1d_encoder", c.drug_1d_encoder);
  read_key(j, "batch_size", c.batch_size);
  read_key(j, "max_epochs", c.max_epochs);
  read_key(j, "patience", c.patience);
  read_key(j, "val_fraction", c.val_fraction);
  read_key(j, "self_loops", c.self_loops);
  read_key(j, "augment_swap", c.augment_swap);
  read_key(j, "train_accuracy_stop", c.train_accuracy_stop);
  if (j.contains("node2vec")) {
    const json& n = j.at("node2vec");
    if (!n.is_object()) throw ConfigError("node2vec config must be an object");
    static const std::set<std::string> known_n2v = {"p",      "q",         "walk_len",
                                                    "walks_per_node", "window", "negatives",
                                                    "epochs"};
    for (const auto& [key, value] : n.items()) {
      if (known_n2v.find(key) == known_n2v.end()) {
        throw ConfigError("unknown node2vec config key '" + key + "'");
      }
    }
    read_key(n, "p", c.node2vec.p);
    read_key(n, "q", c.node2vec.q);
    read_key(n, "walk_len", c.node2vec.walk_length);
    read_key(n, "walks_per_node", c.node2vec.walks_per_node);
    read_key(n, "window", c.node2vec.window);
    read_key(n, "negatives", c.node2vec.negatives);
    read_key(n, "epochs", c.node2vec.epochs);
  }
  c.validate();
  return c;
}

std::string ModelConfig::to_json_text() const {
  json j{{"gcn_hidden_units", gcn_hidden_units},
         {"pooling", pooling},
         {"learning_rate", learning_rate},
         {"dropout", dropout},
         {"attention_heads", attention_heads},
         {"activation", activation},
         {"encoder_layers", encoder_layers},
         {"encoder_hidden", encoder_hidden},
         {"drug_1d_encoder", drug_1d_encoder},
         {"batch_size", batch_size},
         {"max_epochs", max_epochs},
         {"patience", patience},
         {"val_fraction", val_fraction},
         {"self_loops", self_loops},
         {"augment_swap", augment_swap},
         {"train_accuracy_stop", train_accuracy_stop},
         {"node2vec", node2vec_to_json(node2vec)}};
  return j.dump(2);
}

void ModelConfig::validate() const {
  if (gcn_hidden_units.size() != 3) {
    throw ConfigError("gcn_hidden_units must list [input, hidden, output] widths");
  }
  if (gcn_hidden_units[0] != 78) {
    throw ConfigError("gcn_hidden_units[0] must be 78 (the atom feature width)");
  }
  if (gcn_hidden_units[2] != static_cast<int>(kNodeDim)) {
    throw ConfigError("gcn_hidden_units[2] must be 128 to match the encoder dimension");
  }
  if (gcn_hidden_units[1] <= 0) throw ConfigError("gcn_hidden_units[1] must be positive");
  if (pooling != "mean" && pooling != "max") throw ConfigError("pooling must be mean or max");
  if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
  if (attention_heads != 1 && attention_heads != 2 && attention_heads != 4) {
    throw ConfigError("attention_heads must be 1, 2 or 4");
  }
  if (activation != "relu" && activation != "gelu") throw ConfigError("activation must be relu or gelu");
  if (encoder_layers < 1 || encoder_layers > 4) throw ConfigError("encoder_layers must be 1..4");
  if (encoder_hidden <= 0) throw ConfigError("encoder_hidden must be positive");
  if (drug_1d_encoder != "auto" && drug_1d_encoder != "precomputed" && drug_1d_encoder != "fallback") {
    throw ConfigError("drug_1d_encoder must be auto, precomputed or fallback");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (val_fraction < 0.0 || val_fraction >= 0.5) throw ConfigError("val_fraction must be in [0, 0.5)");
  if (train_accuracy_stop < 0.0 || train_accuracy_stop > 1.0) {
    throw ConfigError("train_accuracy_stop must be in [0, 1]");
  }
  if (node2vec.walk_length < 1 || node2vec.walks_per_node < 1 || node2vec.window < 1 ||
      node2vec.negatives < 0 || node2vec.epochs < 0 || node2vec.p <= 0.0 || node2vec.q <= 0.0) {
    throw ConfigError("node2vec parameters out of range");
  }
}

std::uint64_t ModelConfig::fingerprint(std::size_t panel_size, Variant variant,
                                       EncoderMode1D mode) const {
  // nlohmann object keys serialize sorted, so dump() is canonical
  const std::string canon = to_json_text() + "|panel=" + std::to_string(panel_size) +
                            "|variant=" + variant_name(variant) +
                            "|encoder=" + encoder_mode_name(mode) + "|v1";
  return fnv1a64(canon);
}

}  // namespace mdsyn
