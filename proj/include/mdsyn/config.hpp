#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdsyn/node2vec.hpp"

namespace mdsyn {

// Model-wide dimension constants.
inline constexpr std::size_t kDrugEmbeddingDim = 768;
inline constexpr std::size_t kCellCompressedDim = 256;
inline constexpr std::size_t kNodeDim = 128;       // GCN output, node2vec dim, encoder model dim
inline constexpr std::size_t kPoolOutDim = 256;
inline constexpr std::size_t kClassifierHidden1 = 512;
inline constexpr std::size_t kClassifierHidden2 = 32;
inline constexpr std::size_t kCellHidden1 = 512;
inline constexpr std::size_t kCellHidden2 = 384;
inline constexpr std::size_t kTokenEmbeddingDim = 128;
inline constexpr std::size_t kTokenVocabSize = 95;  // printable ASCII 0x20..0x7e

enum class Variant { full, one_d, two_d, two_d_no_trans };
Variant variant_from_string(const std::string& s);
std::string variant_name(Variant v);

enum class EncoderMode1D { precomputed, fallback };
std::string encoder_mode_name(EncoderMode1D m);

struct ModelConfig {
  std::vector<int> gcn_hidden_units = {78, 256, 128};
  std::string pooling = "mean";        // mean | max
  double learning_rate = 5e-4;
  double dropout = 0.3;
  int attention_heads = 4;
  std::string activation = "relu";     // relu | gelu
  int encoder_layers = 2;
  int encoder_hidden = 64;             // FFN inner width
  std::string drug_1d_encoder = "auto";  // auto | precomputed | fallback

  // training schedule
  int batch_size = 64;
  int max_epochs = 100;
  int patience = 15;
  double val_fraction = 0.1;
  bool self_loops = true;
  bool augment_swap = false;
  double train_accuracy_stop = 0.0;  // 0 disables the capacity-check early exit

  Node2VecParams node2vec;

  static ModelConfig from_file(const std::string& path);
  static ModelConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
  void validate() const;

  // Stable hash over the canonical config serialization plus the structural
  // choices that shape the parameter set.
  std::uint64_t fingerprint(std::size_t panel_size, Variant variant, EncoderMode1D mode) const;
};

}  // namespace mdsyn
