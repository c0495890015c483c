#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdsyn/node2vec.hpp"
#include "mdsyn/tensor.hpp"

namespace mdsyn {

// One training example: an unordered drug pair on a cell line.
struct TripletRecord {
  std::string drug_a;
  std::string drug_b;
  std::string cell_line;
  double score = 0.0;
  bool has_score = false;
  int label = -1;

  std::string id() const { return drug_a + "|" + drug_b + "|" + cell_line; }
  // canonical unordered pair key
  std::pair<std::string, std::string> pair_key() const {
    return drug_a <= drug_b ? std::make_pair(drug_a, drug_b) : std::make_pair(drug_b, drug_a);
  }
};

struct RawScoreRecord {
  std::string drug_a;
  std::string drug_b;
  std::string cell_line;
  std::string score_text;
  std::size_t line_no = 0;
};

struct PreprocessStats {
  std::size_t rows_read = 0;
  std::size_t malformed = 0;
  std::size_t self_pairs = 0;
  std::size_t groups = 0;
  std::size_t dropped_midzone = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::vector<std::string> messages;
};

// Groups raw rows by (unordered pair, cell line), averages scores, labels
// avg > pos_threshold as 1 and avg < neg_threshold as 0, drops the rest.
// Non-numeric scores and self-pairs are skipped with a logged line number.
// Output is sorted by (pair, cell line) with the pair stored in canonical
// order, so the operation is idempotent.
std::vector<TripletRecord> preprocess(const std::vector<RawScoreRecord>& raw,
                                      double pos_threshold = 10.0, double neg_threshold = 0.0,
                                      PreprocessStats* stats = nullptr);

enum class Strictness { strict, lenient };

struct LoadSummary {
  std::size_t dropped_triplets = 0;
  std::size_t ppi_dropped_edges = 0;
  std::vector<std::string> messages;
};

// Everything one experiment needs, cross-referenced and validated.
struct DatasetBundle {
  std::vector<TripletRecord> triplets;
  std::map<std::string, std::string> smiles;                 // drug id -> SMILES
  std::vector<std::string> genes;                            // canonical panel order
  std::map<std::string, std::vector<double>> expression;     // cell line -> panel values
  PpiNetwork ppi;
  std::map<std::string, std::string> tissue;                 // optional
  std::map<std::string, std::vector<double>> drug_embeddings;  // optional, 768 wide
  Tensor ppi_embedding;                                      // genes x 128 when present
  bool has_ppi_embedding = false;

  std::size_t panel_size() const { return genes.size(); }
};

// Canonical file names inside a bundle directory.
namespace bundle_files {
inline constexpr const char* triplets = "triplets.csv";
inline constexpr const char* smiles = "smiles.tsv";
inline constexpr const char* genes = "genes.txt";
inline constexpr const char* expression = "expression.tsv";
inline constexpr const char* ppi_edges = "ppi_edges.tsv";
inline constexpr const char* tissue_map = "tissue_map.tsv";
inline constexpr const char* drug_embeddings = "drug_embeddings_768.tsv";
}  // namespace bundle_files

// Loads and cross-checks a bundle directory. Strict mode aborts on any
// unresolvable reference (IntegrityError naming offenders); lenient mode
// drops offending triplets and reports counts in the summary.
DatasetBundle load_bundle(const std::string& dir, Strictness strictness,
                          LoadSummary* summary = nullptr);

// Expected number of genes in the canonical landmark panel.
inline constexpr std::size_t kCanonicalPanelSize = 978;

// --- file-level helpers (header rows required everywhere, '#' comments ok) --
std::vector<RawScoreRecord> read_raw_scores_csv(const std::string& path);
std::vector<TripletRecord> read_triplets_csv(const std::string& path);
void write_triplets_csv(const std::string& path, const std::vector<TripletRecord>& triplets);
std::vector<std::string> read_gene_list(const std::string& path);
PpiNetwork read_ppi_edges(const std::string& path, const std::vector<std::string>& genes,
                          std::size_t* dropped_edges = nullptr);
std::map<std::string, std::string> read_tissue_map(const std::string& path);
// TSV with a key column followed by `width` float columns.
std::map<std::string, std::vector<double>> read_vector_table(const std::string& path,
                                                             std::size_t width,
                                                             const std::string& what);
void write_embedding_tsv(const std::string& path, const std::vector<std::string>& keys,
                         const Tensor& rows);
Tensor read_embedding_tsv(const std::string& path, const std::vector<std::string>& expected_keys,
                          std::size_t dim);

}  // namespace mdsyn
