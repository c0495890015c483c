#pragma once

#include <map>
#include <string>
#include <vector>

#include "mdsyn/autodiff.hpp"
#include "mdsyn/forward_options.hpp"
#include "mdsyn/tensor.hpp"

namespace mdsyn {

// Per-gene z-score statistics, fitted on the training fold's cell lines and
// frozen into the model state.
struct Standardizer {
  Tensor mean;   // 1xG
  Tensor stdev;  // 1xG, floored at 1e-8

  static Standardizer fit(const std::vector<const std::vector<double>*>& rows);
  Tensor apply(const std::vector<double>& values) const;
  bool fitted() const { return !mean.empty(); }
};

struct CellMlpParams {
  Parameter* w1 = nullptr;
  Parameter* b1 = nullptr;
  Parameter* w2 = nullptr;
  Parameter* b2 = nullptr;
  Parameter* w3 = nullptr;
  Parameter* b3 = nullptr;
};

struct TokenEncoderParams {
  Parameter* embeddings = nullptr;  // vocab x 128
  Parameter* proj_w = nullptr;      // 128 x 768
  Parameter* proj_b = nullptr;      // 1 x 768
};

// Maps SMILES characters to token ids over printable ASCII.
std::vector<int> smiles_token_ids(const std::string& smiles);

// Mean of character-token embeddings projected to 768.
Tape::NodeId encode_drug_fallback(Tape& tape, const std::string& smiles,
                                  const TokenEncoderParams& params);

// G -> 512 -> 384 -> 256 with activation + dropout on the two hidden layers.
Tape::NodeId cell_mlp_forward(Tape& tape, const Tensor& standardized_expr,
                              const CellMlpParams& params, const ForwardOptions& opt);

// [drug A | drug B | cell] -> 1x1792.
Tape::NodeId assemble_1d(Tape& tape, Tape::NodeId drug_a, Tape::NodeId drug_b, Tape::NodeId cell);

}  // namespace mdsyn
