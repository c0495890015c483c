#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "mdsyn/errors.hpp"

namespace mdsyn::testing {

namespace fs = std::filesystem;

std::string temp_dir(const std::string& name) {
  const fs::path dir = fs::path("test_tmp") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

const std::vector<CorpusEntry>& smiles_corpus() {
  // atoms: heavy-atom count from the molecular formula
  // edges: atoms - fragments + rings
  static const std::vector<CorpusEntry> corpus = {
      {"methane", "C", 1, 0},
      {"water", "O", 1, 0},
      {"ammonia", "N", 1, 0},
      {"hydrogen sulfide", "S", 1, 0},
      {"methylamine", "CN", 2, 1},
      {"ethane", "CC", 2, 1},
      {"ethanol", "CCO", 3, 2},
      {"dimethyl ether", "COC", 3, 2},
      {"acetonitrile", "CC#N", 3, 2},
      {"formaldehyde", "C=O", 2, 1},
      {"acetic acid", "CC(=O)O", 4, 3},
      {"acetone", "CC(C)=O", 4, 3},
      {"urea", "NC(=O)N", 4, 3},
      {"isobutane", "CC(C)C", 4, 3},
      {"neopentane", "CC(C)(C)C", 5, 4},
      {"glycine", "NCC(=O)O", 5, 4},
      {"alanine", "CC(N)C(=O)O", 6, 5},
      {"l-alanine", "C[C@@H](N)C(=O)O", 6, 5},
      {"chloroform", "ClC(Cl)Cl", 4, 3},
      {"carbon tetrachloride", "ClC(Cl)(Cl)Cl", 5, 4},
      {"fluoroform", "FC(F)F", 4, 3},
      {"cis-2-butene", "C/C=C\\C", 4, 3},
      {"cyclopropane", "C1CC1", 3, 3},
      {"cyclohexane", "C1CCCCC1", 6, 6},
      {"cyclopentane pct-ring", "C%10CCCC%10", 5, 5},
      {"benzene", "c1ccccc1", 6, 6},
      {"toluene", "Cc1ccccc1", 7, 7},
      {"phenol", "Oc1ccccc1", 7, 7},
      {"aniline", "Nc1ccccc1", 7, 7},
      {"styrene", "C=Cc1ccccc1", 8, 8},
      {"pyridine", "c1ccncc1", 6, 6},
      {"furan", "c1ccoc1", 5, 5},
      {"pyrrole", "c1cc[nH]c1", 5, 5},
      {"thiophene", "c1ccsc1", 5, 5},
      {"imidazole", "c1c[nH]cn1", 5, 5},
      {"naphthalene", "c1ccc2ccccc2c1", 10, 11},
      {"anthracene", "c1ccc2cc3ccccc3cc2c1", 14, 16},
      {"biphenyl", "c1ccc(-c2ccccc2)cc1", 12, 13},
      {"benzoic acid", "OC(=O)c1ccccc1", 9, 9},
      {"nitrobenzene", "[O-][N+](=O)c1ccccc1", 9, 9},
      {"sulfanilamide", "NS(=O)(=O)c1ccc(N)cc1", 11, 11},
      {"dmso", "CS(C)=O", 4, 3},
      {"glucose", "OCC1OC(O)C(O)C(O)C1O", 12, 12},
      {"adenine", "Nc1ncnc2[nH]cnc12", 10, 11},
      {"cytosine", "Nc1cc[nH]c(=O)n1", 8, 8},
      {"paracetamol", "CC(=O)Nc1ccc(O)cc1", 11, 11},
      {"ibuprofen", "CC(C)Cc1ccc(cc1)C(C)C(=O)O", 15, 15},
      {"caffeine", "CN1C=NC2=C1C(=O)N(C)C(=O)N2C", 14, 15},
      {"nicotine", "CN1CCCC1c1cccnc1", 12, 13},
      {"aspirin", "CC(=O)OC1=CC=CC=C1C(=O)O", 13, 13},
      {"5-fluorouracil", "C1=C(C(=O)NC(=O)N1)F", 9, 9},
      {"veliparib", "CC1(CCCN1)C1=NC2=C(N1)C(=CC=C2)C(=O)N", 18, 20},
      {"erlotinib", "COCCOC1=CC2=C(C=C1OCCOC)C(=NC=N2)NC1=CC=CC(C#C)=C1", 29, 31},
      {"sodium acetate", "CC(=O)[O-].[Na+]", 5, 3},
      {"magnesium chloride", "[Mg+2].[Cl-].[Cl-]", 3, 0},
      {"c13 ethane", "[13C]C", 2, 1},
  };
  return corpus;
}

const std::vector<std::pair<std::string, std::string>>& fixture_drugs() {
  static const std::vector<std::pair<std::string, std::string>> drugs = {
      {"aspirin", "CC(=O)OC1=CC=CC=C1C(=O)O"},
      {"fluorouracil", "C1=C(C(=O)NC(=O)N1)F"},
      {"benzene", "c1ccccc1"},
      {"pyridine", "c1ccncc1"},
      {"paracetamol", "CC(=O)Nc1ccc(O)cc1"},
      {"caffeine", "CN1C=NC2=C1C(=O)N(C)C(=O)N2C"},
      {"nicotine", "CN1CCCC1c1cccnc1"},
      {"glycine", "NCC(=O)O"},
      {"furan", "c1ccoc1"},
      {"thiophene", "c1ccsc1"},
      {"toluene", "Cc1ccccc1"},
      {"urea", "NC(=O)N"},
      {"acetone", "CC(C)=O"},
      {"ethanol", "CCO"},
      {"imidazole", "c1c[nH]cn1"},
      {"aniline", "Nc1ccccc1"},
  };
  return drugs;
}

std::string write_toy_bundle(const std::string& dir, const ToyBundleSpec& spec) {
  fs::create_directories(dir);
  Rng rng = Rng::derive(spec.seed, "toy-bundle");

  // gene manifest, lexicographically sorted by construction
  std::vector<std::string> genes;
  for (std::size_t i = 0; i < spec.genes; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "G%04zu", i);
    genes.push_back(buf);
  }
  {
    std::ofstream out(fs::path(dir) / "genes.txt");
    for (const auto& g : genes) out << g << '\n';
  }

  const auto& drug_pool = fixture_drugs();
  if (spec.drugs > drug_pool.size()) throw DataError("toy bundle: not enough fixture drugs");
  std::vector<std::string> drug_ids;
  {
    std::ofstream out(fs::path(dir) / "smiles.tsv");
    out << "drug_id\tsmiles\n";
    for (std::size_t i = 0; i < spec.drugs; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "D%02zu", i);
      drug_ids.push_back(buf);
      out << buf << '\t' << drug_pool[i].second << '\n';
    }
  }

  std::vector<std::string> cells;
  {
    std::ofstream out(fs::path(dir) / "expression.tsv");
    out << "cell_line";
    for (const auto& g : genes) out << '\t' << g;
    out << '\n';
    for (std::size_t i = 0; i < spec.cells; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "CL%02zu", i);
      cells.push_back(buf);
      out << buf;
      for (std::size_t g = 0; g < spec.genes; ++g) {
        char v[40];
        std::snprintf(v, sizeof(v), "%.6f", rng.normal() * 2.0 + std::sin(0.3 * g));
        out << '\t' << v;
      }
      out << '\n';
    }
  }

  {
    // ring plus chords keeps the network connected with degree >= 2
    std::ofstream out(fs::path(dir) / "ppi_edges.tsv");
    out << "gene_a\tgene_b\n";
    for (std::size_t i = 0; i < spec.genes; ++i) {
      out << genes[i] << '\t' << genes[(i + 1) % spec.genes] << '\n';
      if (spec.genes > 9) out << genes[i] << '\t' << genes[(i + 7) % spec.genes] << '\n';
    }
  }

  if (spec.with_tissue) {
    static const char* tissues[] = {"lung", "skin", "intestine", "ovary", "breast", "pancreas"};
    std::ofstream out(fs::path(dir) / "tissue_map.tsv");
    out << "cell_line\ttissue\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out << cells[i] << '\t' << tissues[i % 6] << '\n';
    }
  }

  if (spec.with_precomputed) {
    std::ofstream out(fs::path(dir) / "drug_embeddings_768.tsv");
    out << "drug_id";
    for (std::size_t i = 0; i < 768; ++i) out << "\tv" << i;
    out << '\n';
    for (const auto& d : drug_ids) {
      out << d;
      for (std::size_t i = 0; i < 768; ++i) {
        char v[40];
        std::snprintf(v, sizeof(v), "%.6f", rng.normal());
        out << '\t' << v;
      }
      out << '\n';
    }
  }

  // all (unordered pair, cell) combinations, shuffled, first n kept
  struct Combo {
    std::size_t a, b, c;
  };
  std::vector<Combo> combos;
  for (std::size_t a = 0; a < drug_ids.size(); ++a) {
    for (std::size_t b = a + 1; b < drug_ids.size(); ++b) {
      for (std::size_t c = 0; c < cells.size(); ++c) combos.push_back({a, b, c});
    }
  }
  if (spec.triplets > combos.size()) throw DataError("toy bundle: too many triplets requested");
  rng.shuffle(combos);
  combos.resize(spec.triplets);
  {
    std::ofstream out(fs::path(dir) / "triplets.csv");
    out << "drug_a,drug_b,cell_line,score,label\n";
    for (std::size_t i = 0; i < combos.size(); ++i) {
      const int label = i % 2 == 0 ? 1 : 0;
      const double score = label == 1 ? 10.0 + rng.uniform(0.5, 30.0) : -rng.uniform(0.5, 30.0);
      char v[40];
      std::snprintf(v, sizeof(v), "%.4f", score);
      out << drug_ids[combos[i].a] << ',' << drug_ids[combos[i].b] << ',' << cells[combos[i].c]
          << ',' << v << ',' << label << '\n';
    }
  }
  return dir;
}

double max_rel_grad_error(const std::vector<Parameter*>& params,
                          const std::function<double(bool)>& loss, int probes_per_param,
                          Rng& pick_rng, std::string* worst_param) {
  constexpr double h = 1e-5;
  for (Parameter* p : params) p->zero_grad();
  loss(true);

  double max_rel = 0.0;
  for (Parameter* p : params) {
    for (int k = 0; k < probes_per_param; ++k) {
      const std::size_t idx = static_cast<std::size_t>(pick_rng.uniform_int(p->value.size()));
      const double saved = p->value[idx];
      p->value[idx] = saved + h;
      const double up = loss(false);
      p->value[idx] = saved - h;
      const double down = loss(false);
      p->value[idx] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->grad[idx];
      const double rel =
          std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-5});
      if (rel > max_rel) {
        max_rel = rel;
        if (worst_param != nullptr) *worst_param = p->name + "[" + std::to_string(idx) + "]";
      }
    }
  }
  return max_rel;
}

}  // namespace mdsyn::testing
