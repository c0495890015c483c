#include "mdsyn/encoder1d.hpp"

#include <algorithm>
#include <cmath>

#include "mdsyn/config.hpp"
#include "mdsyn/errors.hpp"

namespace mdsyn {

Standardizer Standardizer::fit(const std::vector<const std::vector<double>*>& rows) {
  if (rows.empty()) throw DataError("Standardizer: no expression rows to fit");
  const std::size_t g = rows.front()->size();
  Standardizer s;
  s.mean = Tensor(1, g);
  s.stdev = Tensor(1, g);
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (const auto* row : rows) {
    if (row->size() != g) throw ShapeError("Standardizer: inconsistent expression widths");
    for (std::size_t i = 0; i < g; ++i) s.mean[i] += (*row)[i];
  }
  for (std::size_t i = 0; i < g; ++i) s.mean[i] *= inv_n;
  for (const auto* row : rows) {
    for (std::size_t i = 0; i < g; ++i) {
      const double d = (*row)[i] - s.mean[i];
      s.stdev[i] += d * d;
    }
  }
  for (std::size_t i = 0; i < g; ++i) {
    s.stdev[i] = std::sqrt(s.stdev[i] * inv_n);
    if (s.stdev[i] < 1e-8) s.stdev[i] = 1e-8;
  }
  return s;
}

Tensor Standardizer::apply(const std::vector<double>& values) const {
  if (values.size() != mean.cols()) {
    throw ShapeError("Standardizer: expression width " + std::to_string(values.size()) +
                     " does not match fitted width " + std::to_string(mean.cols()));
  }
  Tensor out(1, values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean[i]) / stdev[i];
  return out;
}

std::vector<int> smiles_token_ids(const std::string& smiles) {
  if (smiles.empty()) throw DataError("cannot tokenize an empty SMILES string");
  std::vector<int> ids;
  ids.reserve(smiles.size());
  for (unsigned char c : smiles) {
    if (c < 0x20 || c > 0x7e) {
      throw DataError("SMILES contains a non-printable character (code " + std::to_string(c) + ")");
    }
    ids.push_back(static_cast<int>(c) - 0x20);
  }
  return ids;
}

Tape::NodeId encode_drug_fallback(Tape& tape, const std::string& smiles,
                                  const TokenEncoderParams& params) {
  const auto ids = smiles_token_ids(smiles);
  const Tape::NodeId table = tape.param(*params.embeddings);
  const Tape::NodeId tokens = tape.gather_rows(table, ids);
  const Tape::NodeId pooled = tape.mean_rows(tokens);
  const Tape::NodeId projected = tape.matmul(pooled, tape.param(*params.proj_w));
  return tape.add_rowvec(projected, tape.param(*params.proj_b));
}

namespace {

Tape::NodeId activate(Tape& tape, Tape::NodeId x, const ForwardOptions& opt) {
  return opt.activation == "gelu" ? tape.gelu(x) : tape.relu(x);
}

}  // namespace

Tape::NodeId cell_mlp_forward(Tape& tape, const Tensor& standardized_expr,
                              const CellMlpParams& params, const ForwardOptions& opt) {
  Tape::NodeId x = tape.constant(standardized_expr);
  x = tape.add_rowvec(tape.matmul(x, tape.param(*params.w1)), tape.param(*params.b1));
  x = activate(tape, x, opt);
  if (opt.training && opt.dropout > 0.0) x = tape.dropout(x, opt.dropout, true, *opt.rng);
  x = tape.add_rowvec(tape.matmul(x, tape.param(*params.w2)), tape.param(*params.b2));
  x = activate(tape, x, opt);
  if (opt.training && opt.dropout > 0.0) x = tape.dropout(x, opt.dropout, true, *opt.rng);
  x = tape.add_rowvec(tape.matmul(x, tape.param(*params.w3)), tape.param(*params.b3));
  return x;
}

Tape::NodeId assemble_1d(Tape& tape, Tape::NodeId drug_a, Tape::NodeId drug_b, Tape::NodeId cell) {
  return tape.concat_cols({drug_a, drug_b, cell});
}

}  // namespace mdsyn
