#include "mdsyn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mdsyn/errors.hpp"

namespace mdsyn {

namespace {

namespace fs = std::filesystem;

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open '" + path + "'");
  return in;
}

// Reads delimited rows, skipping blank and '#' lines. Returns data rows; the
// header is written to *header.
std::vector<std::vector<std::string>> read_rows(const std::string& path, char delim,
                                                std::vector<std::string>* header,
                                                std::vector<std::size_t>* line_nos = nullptr) {
  std::ifstream in = open_or_throw(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line, delim);
    if (!have_header) {
      have_header = true;
      if (header != nullptr) *header = std::move(cells);
      continue;
    }
    rows.push_back(std::move(cells));
    if (line_nos != nullptr) line_nos->push_back(line_no);
  }
  if (!have_header) throw SchemaError("'" + path + "' is empty; a header row is required");
  return rows;
}

void require_columns(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::string>& expected) {
  if (header.size() < expected.size()) {
    throw SchemaError("'" + path + "': expected columns " + std::to_string(expected.size()) +
                      "+, got " + std::to_string(header.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (header[i] != expected[i]) {
      throw SchemaError("'" + path + "': column " + std::to_string(i + 1) + " must be '" +
                        expected[i] + "', got '" + header[i] + "'");
    }
  }
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<TripletRecord> preprocess(const std::vector<RawScoreRecord>& raw, double pos_threshold,
                                      double neg_threshold, PreprocessStats* stats) {
  PreprocessStats local;
  PreprocessStats& st = stats != nullptr ? *stats : local;
  st = PreprocessStats{};

  struct Group {
    double sum = 0.0;
    std::size_t count = 0;
  };
  std::map<std::tuple<std::string, std::string, std::string>, Group> groups;
  for (const RawScoreRecord& rec : raw) {
    ++st.rows_read;
    double score = 0.0;
    if (!parse_double(rec.score_text, score)) {
      ++st.malformed;
      st.messages.push_back("line " + std::to_string(rec.line_no) + ": non-numeric score '" +
                            rec.score_text + "' skipped");
      continue;
    }
    if (rec.drug_a == rec.drug_b) {
      ++st.self_pairs;
      st.messages.push_back("line " + std::to_string(rec.line_no) + ": drug paired with itself skipped");
      continue;
    }
    const auto key = rec.drug_a <= rec.drug_b
                         ? std::make_tuple(rec.drug_a, rec.drug_b, rec.cell_line)
                         : std::make_tuple(rec.drug_b, rec.drug_a, rec.cell_line);
    Group& g = groups[key];
    g.sum += score;
    ++g.count;
  }
  st.groups = groups.size();

  std::vector<TripletRecord> out;
  out.reserve(groups.size());
  for (const auto& [key, g] : groups) {
    const double avg = g.sum / static_cast<double>(g.count);
    TripletRecord t;
    t.drug_a = std::get<0>(key);
    t.drug_b = std::get<1>(key);
    t.cell_line = std::get<2>(key);
    t.score = avg;
    t.has_score = true;
    if (avg > pos_threshold) {
      t.label = 1;
      ++st.positives;
    } else if (avg < neg_threshold) {
      t.label = 0;
      ++st.negatives;
    } else {
      ++st.dropped_midzone;
      continue;
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<RawScoreRecord> read_raw_scores_csv(const std::string& path) {
  std::vector<std::string> header;
  std::vector<std::size_t> line_nos;
  const auto rows = read_rows(path, ',', &header, &line_nos);
  require_columns(path, header, {"drug_a", "drug_b", "cell_line", "score"});
  std::vector<RawScoreRecord> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& cells = rows[i];
    if (cells.size() < 4) {
      throw SchemaError("'" + path + "' line " + std::to_string(line_nos[i]) + ": expected 4+ cells");
    }
    out.push_back(RawScoreRecord{cells[0], cells[1], cells[2], cells[3], line_nos[i]});
  }
  return out;
}

std::vector<TripletRecord> read_triplets_csv(const std::string& path) {
  std::vector<std::string> header;
  std::vector<std::size_t> line_nos;
  const auto rows = read_rows(path, ',', &header, &line_nos);
  require_columns(path, header, {"drug_a", "drug_b", "cell_line", "score", "label"});
  std::vector<TripletRecord> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& cells = rows[i];
    if (cells.size() < 5) {
      throw SchemaError("'" + path + "' line " + std::to_string(line_nos[i]) + ": expected 5 cells");
    }
    TripletRecord t;
    t.drug_a = cells[0];
    t.drug_b = cells[1];
    t.cell_line = cells[2];
    t.has_score = parse_double(cells[3], t.score);
    double label = 0.0;
    if (!parse_double(cells[4], label) || (label != 0.0 && label != 1.0)) {
      throw SchemaError("'" + path + "' line " + std::to_string(line_nos[i]) +
                        ": label must be 0 or 1, got '" + cells[4] + "'");
    }
    t.label = static_cast<int>(label);
    out.push_back(std::move(t));
  }
  return out;
}

void write_triplets_csv(const std::string& path, const std::vector<TripletRecord>& triplets) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write '" + path + "'");
  out << "drug_a,drug_b,cell_line,score,label\n";
  for (const TripletRecord& t : triplets) {
    out << t.drug_a << ',' << t.drug_b << ',' << t.cell_line << ','
        << (t.has_score ? fmt_double(t.score) : std::string("")) << ',' << t.label << '\n';
  }
}

std::vector<std::string> read_gene_list(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::vector<std::string> genes;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    genes.push_back(line);
  }
  if (genes.empty()) throw SchemaError("'" + path + "': no gene symbols found");
  std::set<std::string> seen(genes.begin(), genes.end());
  if (seen.size() != genes.size()) throw SchemaError("'" + path + "': duplicate gene symbols");
  return genes;
}

PpiNetwork read_ppi_edges(const std::string& path, const std::vector<std::string>& genes,
                          std::size_t* dropped_edges) {
  std::vector<std::string> header;
  const auto rows = read_rows(path, '\t', &header);
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < genes.size(); ++i) index[genes[i]] = static_cast<int>(i);
  PpiNetwork net;
  net.genes = genes;
  std::set<std::pair<int, int>> edge_set;
  std::size_t dropped = 0;
  for (const auto& cells : rows) {
    if (cells.size() < 2) throw SchemaError("'" + path + "': edge rows need two columns");
    const auto ia = index.find(cells[0]);
    const auto ib = index.find(cells[1]);
    if (ia == index.end() || ib == index.end()) {
      ++dropped;
      continue;
    }
    if (ia->second == ib->second) continue;  // self-edges carry no signal here
    edge_set.insert(std::minmax(ia->second, ib->second));
  }
  net.edges.assign(edge_set.begin(), edge_set.end());
  net.build_neighbors();
  if (dropped_edges != nullptr) *dropped_edges = dropped;
  return net;
}

std::map<std::string, std::string> read_tissue_map(const std::string& path) {
  std::vector<std::string> header;
  const auto rows = read_rows(path, '\t', &header);
  std::map<std::string, std::string> out;
  for (const auto& cells : rows) {
    if (cells.size() < 2) throw SchemaError("'" + path + "': tissue rows need two columns");
    out[cells[0]] = cells[1];
  }
  return out;
}

std::map<std::string, std::vector<double>> read_vector_table(const std::string& path,
                                                             std::size_t width,
                                                             const std::string& what) {
  std::vector<std::string> header;
  std::vector<std::size_t> line_nos;
  const auto rows = read_rows(path, '\t', &header, &line_nos);
  std::map<std::string, std::vector<double>> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& cells = rows[i];
    if (cells.size() != width + 1) {
      throw SchemaError("'" + path + "' line " + std::to_string(line_nos[i]) + ": expected " +
                        std::to_string(width) + " " + what + " values, got " +
                        std::to_string(cells.size() - 1));
    }
    std::vector<double> values(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (!parse_double(cells[c + 1], values[c])) {
        throw SchemaError("'" + path + "' line " + std::to_string(line_nos[i]) +
                          ": non-numeric value '" + cells[c + 1] + "'");
      }
    }
    out[cells[0]] = std::move(values);
  }
  return out;
}

void write_embedding_tsv(const std::string& path, const std::vector<std::string>& keys,
                         const Tensor& rows) {
  if (keys.size() != rows.rows()) throw ShapeError("write_embedding_tsv: key/row count mismatch");
  std::ofstream out(path);
  if (!out) throw FileError("cannot write '" + path + "'");
  out << "key";
  for (std::size_t c = 0; c < rows.cols(); ++c) out << "\tv" << c;
  out << '\n';
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    out << keys[r];
    for (std::size_t c = 0; c < rows.cols(); ++c) out << '\t' << fmt_double(rows.at(r, c));
    out << '\n';
  }
}

Tensor read_embedding_tsv(const std::string& path, const std::vector<std::string>& expected_keys,
                          std::size_t dim) {
  const auto table = read_vector_table(path, dim, "embedding");
  Tensor out(expected_keys.size(), dim);
  for (std::size_t r = 0; r < expected_keys.size(); ++r) {
    const auto it = table.find(expected_keys[r]);
    if (it == table.end()) {
      throw SchemaError("'" + path + "': missing row for '" + expected_keys[r] + "'");
    }
    for (std::size_t c = 0; c < dim; ++c) out.at(r, c) = it->second[c];
  }
  return out;
}

DatasetBundle load_bundle(const std::string& dir, Strictness strictness, LoadSummary* summary) {
  LoadSummary local;
  LoadSummary& sum = summary != nullptr ? *summary : local;
  sum = LoadSummary{};

  const auto path_of = [&](const char* name) { return (fs::path(dir) / name).string(); };
  for (const char* required : {bundle_files::triplets, bundle_files::smiles, bundle_files::genes,
                               bundle_files::expression, bundle_files::ppi_edges}) {
    if (!fs::exists(fs::path(dir) / required)) {
      throw FileError("bundle '" + dir + "' is missing " + required);
    }
  }

  DatasetBundle b;
  b.genes = read_gene_list(path_of(bundle_files::genes));
  b.triplets = read_triplets_csv(path_of(bundle_files::triplets));

  {
    std::vector<std::string> header;
    const auto rows = read_rows(path_of(bundle_files::smiles), '\t', &header);
    require_columns(path_of(bundle_files::smiles), header, {"drug_id", "smiles"});
    for (const auto& cells : rows) {
      if (cells.size() < 2) throw SchemaError("smiles.tsv rows need two columns");
      b.smiles[cells[0]] = cells[1];
    }
  }

  {
    const std::string path = path_of(bundle_files::expression);
    std::vector<std::string> header;
    std::vector<std::size_t> line_nos;
    const auto rows = read_rows(path, '\t', &header, &line_nos);
    if (header.size() != b.genes.size() + 1) {
      throw SchemaError("'" + path + "': expected " + std::to_string(b.genes.size()) +
                        " expression columns per the gene manifest, got " +
                        std::to_string(header.size() - 1));
    }
    for (std::size_t i = 0; i < b.genes.size(); ++i) {
      if (header[i + 1] != b.genes[i]) {
        throw SchemaError("'" + path + "': column " + std::to_string(i + 2) + " is '" +
                          header[i + 1] + "' but the gene manifest orders '" + b.genes[i] +
                          "' here");
      }
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& cells = rows[i];
      if (cells.size() != b.genes.size() + 1) {
        throw SchemaError("'" + path + "' line " + std::to_string(line_nos[i]) + ": expected " +
                          std::to_string(b.genes.size()) + " expression values, got " +
                          std::to_string(cells.size() - 1));
      }
      std::vector<double> values(b.genes.size());
      for (std::size_t c = 0; c < values.size(); ++c) {
        if (!parse_double(cells[c + 1], values[c])) {
          throw SchemaError("'" + path + "' line " + std::to_string(line_nos[i]) +
                            ": non-numeric expression value '" + cells[c + 1] + "'");
        }
      }
      b.expression[cells[0]] = std::move(values);
    }
  }

  b.ppi = read_ppi_edges(path_of(bundle_files::ppi_edges), b.genes, &sum.ppi_dropped_edges);
  if (sum.ppi_dropped_edges > 0) {
    sum.messages.push_back(std::to_string(sum.ppi_dropped_edges) +
                           " PPI edges referenced genes outside the manifest and were dropped");
  }

  if (fs::exists(fs::path(dir) / bundle_files::tissue_map)) {
    b.tissue = read_tissue_map(path_of(bundle_files::tissue_map));
  }
  if (fs::exists(fs::path(dir) / bundle_files::drug_embeddings)) {
    b.drug_embeddings = read_vector_table(path_of(bundle_files::drug_embeddings), 768, "embedding");
  }

  // referential integrity
  std::vector<std::string> problems;
  std::vector<TripletRecord> kept;
  kept.reserve(b.triplets.size());
  for (const TripletRecord& t : b.triplets) {
    std::string problem;
    if (b.smiles.find(t.drug_a) == b.smiles.end()) {
      problem = "unknown drug '" + t.drug_a + "'";
    } else if (b.smiles.find(t.drug_b) == b.smiles.end()) {
      problem = "unknown drug '" + t.drug_b + "'";
    } else if (b.expression.find(t.cell_line) == b.expression.end()) {
      problem = "unknown cell line '" + t.cell_line + "'";
    }
    if (problem.empty()) {
      kept.push_back(t);
    } else {
      problems.push_back("triplet " + t.id() + ": " + problem);
    }
  }
  if (!problems.empty()) {
    if (strictness == Strictness::strict) {
      std::string msg = "bundle '" + dir + "' has " + std::to_string(problems.size()) +
                        " unresolvable triplets:";
      for (const auto& p : problems) msg += "\n  " + p;
      throw IntegrityError(msg);
    }
    sum.dropped_triplets = problems.size();
    for (auto& p : problems) sum.messages.push_back("dropped " + p);
    b.triplets = std::move(kept);
  }
  return b;
}

}  // namespace mdsyn
