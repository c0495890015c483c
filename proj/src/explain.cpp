#include "mdsyn/explain.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mdsyn/errors.hpp"
#include "mdsyn/trainer.hpp"

namespace mdsyn {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ExplainResult explain_triplet(ModelState& state, const DatasetBundle& bundle,
                              const TripletRecord& triplet, const ExplainOptions& options) {
  if (!state.uses_encoders()) {
    throw ConfigError("variant '" + variant_name(state.variant) + "' has no attention to explain");
  }
  if (!bundle.has_ppi_embedding) throw DataGapError("bundle has no PPI embedding");
  const auto sa = bundle.smiles.find(triplet.drug_a);
  const auto sb = bundle.smiles.find(triplet.drug_b);
  if (sa == bundle.smiles.end()) throw DataGapError("no SMILES for '" + triplet.drug_a + "'");
  if (sb == bundle.smiles.end()) throw DataGapError("no SMILES for '" + triplet.drug_b + "'");

  const MolecularGraph ga = parse_smiles(sa->second);
  const MolecularGraph gb = parse_smiles(sb->second);
  const Tensor adj_a = normalize_adjacency(ga.adjacency, state.config.self_loops);
  const Tensor adj_b = normalize_adjacency(gb.adjacency, state.config.self_loops);

  TripletInputs in;
  in.feat_a = &ga.features;
  in.feat_b = &gb.features;
  in.norm_adj_a = &adj_a;
  in.norm_adj_b = &adj_b;
  in.ppi_embedding = &bundle.ppi_embedding;
  Tensor expr_std, emb_a, emb_b;
  if (state.uses_1d()) {
    const auto expr = bundle.expression.find(triplet.cell_line);
    if (expr == bundle.expression.end()) {
      throw DataGapError("no expression for cell line '" + triplet.cell_line + "'");
    }
    if (!state.standardizer.fitted()) {
      throw DataGapError("model has no standardization statistics; was it trained?");
    }
    expr_std = state.standardizer.apply(expr->second);
    in.expr_std = &expr_std;
    if (state.encoder_mode == EncoderMode1D::precomputed) {
      const auto ea = bundle.drug_embeddings.find(triplet.drug_a);
      const auto eb = bundle.drug_embeddings.find(triplet.drug_b);
      if (ea == bundle.drug_embeddings.end() || eb == bundle.drug_embeddings.end()) {
        throw MissingEmbeddingError("precomputed drug embeddings missing for this pair");
      }
      emb_a = Tensor::row(ea->second);
      emb_b = Tensor::row(eb->second);
      in.drug_a_768 = &emb_a;
      in.drug_b_768 = &emb_b;
    } else {
      in.smiles_a = &sa->second;
      in.smiles_b = &sb->second;
    }
  }

  ForwardOptions opt;
  opt.activation = state.config.activation;
  opt.pooling = state.config.pooling;
  AttentionRecord record;
  Tape tape;
  forward_triplet(tape, state, in, opt, &record);

  record.block_a = ga.num_atoms();
  record.block_b = gb.num_atoms();
  for (std::size_t i = 0; i < ga.num_atoms(); ++i) {
    record.token_labels.push_back("A" + std::to_string(i) + ":" + ga.atom_symbols[i]);
  }
  for (std::size_t i = 0; i < gb.num_atoms(); ++i) {
    record.token_labels.push_back("B" + std::to_string(i) + ":" + gb.atom_symbols[i]);
  }
  for (const std::string& gene : bundle.genes) record.token_labels.push_back(gene);

  const std::size_t layer =
      options.layer < 0 ? record.num_layers() - 1 : static_cast<std::size_t>(options.layer);
  if (layer >= record.num_layers()) {
    throw ConfigError("attention layer " + std::to_string(options.layer) + " out of range (model has " +
                      std::to_string(record.num_layers()) + " layers)");
  }
  const auto& heads = record.scores[layer];
  Tensor source;
  if (options.head < 0) {
    source = heads[0];
    for (std::size_t h = 1; h < heads.size(); ++h) {
      for (std::size_t i = 0; i < source.size(); ++i) source[i] += heads[h][i];
    }
    const double inv = 1.0 / static_cast<double>(heads.size());
    for (std::size_t i = 0; i < source.size(); ++i) source[i] *= inv;
  } else {
    if (static_cast<std::size_t>(options.head) >= heads.size()) {
      throw ConfigError("attention head " + std::to_string(options.head) + " out of range (model has " +
                        std::to_string(heads.size()) + " heads)");
    }
    source = heads[options.head];
  }

  ExplainResult result;
  result.token_labels = record.token_labels;
  result.block_a = record.block_a;
  result.block_b = record.block_b;

  // min-max normalization along columns; constant columns map to 0
  const std::size_t n = source.rows();
  result.normalized = Tensor(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    double mn = source.at(0, c), mx = source.at(0, c);
    for (std::size_t r = 1; r < n; ++r) {
      mn = std::min(mn, source.at(r, c));
      mx = std::max(mx, source.at(r, c));
    }
    if (mx > mn) {
      const double inv = 1.0 / (mx - mn);
      for (std::size_t r = 0; r < n; ++r) result.normalized.at(r, c) = (source.at(r, c) - mn) * inv;
    } else {
      ++result.constant_columns;
    }
  }

  const std::size_t va = record.block_a, vb = record.block_b;
  const std::size_t genes_at = va + vb;
  const std::size_t g = bundle.genes.size();
  const Tensor& m = result.normalized;

  // per-atom importance: attention exchanged with the partner drug's block
  const bool column_mode = options.atom_aggregation != "row";
  for (std::size_t j = 0; j < va; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < vb; ++i) {
      s += column_mode ? m.at(va + i, j) : m.at(j, va + i);
    }
    result.atom_scores_a.emplace_back(static_cast<int>(j), ga.atom_symbols[j], s);
  }
  for (std::size_t j = 0; j < vb; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < va; ++i) {
      s += column_mode ? m.at(i, va + j) : m.at(va + j, i);
    }
    result.atom_scores_b.emplace_back(static_cast<int>(j), gb.atom_symbols[j], s);
  }

  result.drug_gene_a = Tensor(va, g);
  for (std::size_t r = 0; r < va; ++r) {
    for (std::size_t c = 0; c < g; ++c) result.drug_gene_a.at(r, c) = m.at(r, genes_at + c);
  }
  result.drug_gene_b = Tensor(vb, g);
  for (std::size_t r = 0; r < vb; ++r) {
    for (std::size_t c = 0; c < g; ++c) result.drug_gene_b.at(r, c) = m.at(va + r, genes_at + c);
  }
  result.drug_drug = Tensor(va, vb);
  for (std::size_t r = 0; r < va; ++r) {
    for (std::size_t c = 0; c < vb; ++c) result.drug_drug.at(r, c) = m.at(r, va + c);
  }

  // 100 largest gene-gene entries; ties resolved by (row, col)
  std::vector<GenePairScore> entries;
  entries.reserve(g * g);
  for (std::size_t r = 0; r < g; ++r) {
    for (std::size_t c = 0; c < g; ++c) {
      GenePairScore e;
      e.gene_i = static_cast<int>(r);
      e.gene_j = static_cast<int>(c);
      e.score = m.at(genes_at + r, genes_at + c);
      entries.push_back(e);
    }
  }
  const auto better = [](const GenePairScore& a, const GenePairScore& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.gene_i != b.gene_i) return a.gene_i < b.gene_i;
    return a.gene_j < b.gene_j;
  };
  const std::size_t keep = std::min<std::size_t>(100, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + keep, entries.end(), better);
  entries.resize(keep);
  for (auto& e : entries) {
    e.degree_i = bundle.ppi.degree(e.gene_i);
    e.degree_j = bundle.ppi.degree(e.gene_j);
  }
  result.top_gene_pairs = std::move(entries);
  return result;
}

namespace {

void write_matrix_csv(const std::string& path, const Tensor& m,
                      const std::vector<std::string>& row_labels,
                      const std::vector<std::string>& col_labels) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write '" + path + "'");
  out << "token";
  for (const auto& l : col_labels) out << ',' << l;
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << row_labels[r];
    for (std::size_t c = 0; c < m.cols(); ++c) out << ',' << fmt(m.at(r, c));
    out << '\n';
  }
}

void write_atom_scores(const std::string& path,
                       const std::vector<std::tuple<int, std::string, double>>& scores) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write '" + path + "'");
  out << "atom_index,symbol,score\n";
  for (const auto& [idx, symbol, score] : scores) {
    out << idx << ',' << symbol << ',' << fmt(score) << '\n';
  }
}

}  // namespace

void write_explain_exports(const ExplainResult& result, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto at = [&](const char* name) { return (fs::path(out_dir) / name).string(); };

  const std::vector<std::string>& labels = result.token_labels;
  write_matrix_csv(at("attention_normalized.csv"), result.normalized, labels, labels);
  write_atom_scores(at("atom_scores_a.csv"), result.atom_scores_a);
  write_atom_scores(at("atom_scores_b.csv"), result.atom_scores_b);

  const std::vector<std::string> atoms_a(labels.begin(), labels.begin() + result.block_a);
  const std::vector<std::string> atoms_b(labels.begin() + result.block_a,
                                         labels.begin() + result.block_a + result.block_b);
  const std::vector<std::string> genes(labels.begin() + result.block_a + result.block_b,
                                       labels.end());
  write_matrix_csv(at("drug_gene_a.csv"), result.drug_gene_a, atoms_a, genes);
  write_matrix_csv(at("drug_gene_b.csv"), result.drug_gene_b, atoms_b, genes);
  write_matrix_csv(at("drug_drug.csv"), result.drug_drug, atoms_a, atoms_b);

  std::ofstream top(at("top_genes.csv"));
  if (!top) throw FileError("cannot write top_genes.csv");
  top << "gene_i,gene_j,score,degree_i,degree_j\n";
  for (const auto& e : result.top_gene_pairs) {
    top << genes[e.gene_i] << ',' << genes[e.gene_j] << ',' << fmt(e.score) << ',' << e.degree_i
        << ',' << e.degree_j << '\n';
  }
}

void export_embeddings(ModelState& state, const DatasetBundle& bundle,
                       const std::vector<TripletRecord>& triplets, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto preds = predict_batch(state, bundle, triplets, /*capture_hidden=*/true);
  const auto write_file = [&](const char* name, bool big) {
    std::ofstream out((fs::path(out_dir) / name).string());
    if (!out) throw FileError(std::string("cannot write ") + name);
    const std::size_t width = big ? kClassifierHidden1 : kClassifierHidden2;
    out << "triplet_id,label";
    for (std::size_t i = 0; i < width; ++i) out << ",e" << i;
    out << '\n';
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (!preds[i].ok) throw DataGapError("export_embeddings: " + preds[i].error);
      const auto& vec = big ? preds[i].hidden512 : preds[i].hidden32;
      out << preds[i].triplet_id << ',' << triplets[i].label;
      for (double v : vec) out << ',' << fmt(v);
      out << '\n';
    }
  };
  write_file("embeddings_512.csv", true);
  write_file("embeddings_32.csv", false);
}

}  // namespace mdsyn
