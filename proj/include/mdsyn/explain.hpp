#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "mdsyn/dataset.hpp"
#include "mdsyn/model.hpp"

namespace mdsyn {

struct ExplainOptions {
  int layer = -1;                        // -1 = last encoder layer
  int head = -1;                         // -1 = mean over heads
  std::string atom_aggregation = "col";  // col = attention received, row = attention given
};

struct GenePairScore {
  int gene_i = 0;
  int gene_j = 0;
  double score = 0.0;
  std::size_t degree_i = 0;
  std::size_t degree_j = 0;
};

struct ExplainResult {
  Tensor normalized;  // NxN, column-wise min-max normalized attention
  std::vector<std::string> token_labels;
  std::size_t block_a = 0;
  std::size_t block_b = 0;
  std::vector<std::tuple<int, std::string, double>> atom_scores_a;
  std::vector<std::tuple<int, std::string, double>> atom_scores_b;
  Tensor drug_gene_a;  // atoms(A) x genes
  Tensor drug_gene_b;  // atoms(B) x genes
  Tensor drug_drug;    // atoms(A) x atoms(B)
  std::vector<GenePairScore> top_gene_pairs;  // 100 largest gene-gene entries
  std::size_t constant_columns = 0;           // min==max columns normalized to 0
};

// Runs the 2D path with attention capture and derives the interpretability
// views. The model must have encoder layers (full or 2d variants).
ExplainResult explain_triplet(ModelState& state, const DatasetBundle& bundle,
                              const TripletRecord& triplet, const ExplainOptions& options);

void write_explain_exports(const ExplainResult& result, const std::string& out_dir);

// embeddings_512.csv / embeddings_32.csv: triplet id, label, values.
void export_embeddings(ModelState& state, const DatasetBundle& bundle,
                       const std::vector<TripletRecord>& triplets, const std::string& out_dir);

}  // namespace mdsyn
