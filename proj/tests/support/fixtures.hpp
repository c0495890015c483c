#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mdsyn/autodiff.hpp"
#include "mdsyn/dataset.hpp"
#include "mdsyn/rng.hpp"

namespace mdsyn::testing {

// Fresh scratch directory under the test working directory.
std::string temp_dir(const std::string& name);

// Curated molecules with formula-derived heavy-atom counts and ring-derived
// edge counts (edges = atoms - fragments + rings).
struct CorpusEntry {
  const char* name;
  const char* smiles;
  std::size_t atoms;
  std::size_t edges;
};
const std::vector<CorpusEntry>& smiles_corpus();

// Small real molecules used as fixture drugs.
const std::vector<std::pair<std::string, std::string>>& fixture_drugs();

struct ToyBundleSpec {
  std::size_t genes = 24;
  std::size_t drugs = 10;
  std::size_t cells = 6;
  std::size_t triplets = 60;
  std::uint64_t seed = 7;
  bool with_tissue = true;
  bool with_precomputed = false;
};

// Writes a complete bundle directory (triplets, smiles, genes, expression,
// ppi edges, optional tissue map / drug embeddings). Deterministic in spec.
std::string write_toy_bundle(const std::string& dir, const ToyBundleSpec& spec);

// Central-difference gradient check. loss(true) must run a fresh forward [and
// backward, accumulating into Parameter::grad]; loss(false) only evaluates.
// Relative error uses a 1e-5 denominator floor.
double max_rel_grad_error(const std::vector<Parameter*>& params,
                          const std::function<double(bool)>& loss, int probes_per_param,
                          Rng& pick_rng, std::string* worst_param = nullptr);

}  // namespace mdsyn::testing
