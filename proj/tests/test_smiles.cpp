#include <doctest.h>

#include "mdsyn/errors.hpp"
#include "mdsyn/smiles.hpp"
#include "support/fixtures.hpp"

using namespace mdsyn;

namespace {

std::size_t degree_sum(const MolecularGraph& g) {
  std::size_t s = 0;
  for (const Atom& a : g.atoms) s += static_cast<std::size_t>(a.degree);
  return s;
}

const Atom& atom_of(const MolecularGraph& g, const std::string& element) {
  for (const Atom& a : g.atoms) {
    if (a.element == element) return a;
  }
  throw std::runtime_error("no atom " + element);
}

}  // namespace

TEST_SUITE("smiles") {

TEST_CASE("methane is a single carbon with four implicit hydrogens") {
  const MolecularGraph g = parse_smiles("C");
  REQUIRE(g.num_atoms() == 1);
  CHECK(g.edge_count == 0);
  CHECK(g.atoms[0].element == "C");
  CHECK(g.atoms[0].degree == 0);
  CHECK(g.atoms[0].implicit_h == 4);
  CHECK(g.atoms[0].implicit_valence == 4);
  CHECK_FALSE(g.atoms[0].aromatic);
}

TEST_CASE("5-fluorouracil has 9 heavy atoms and 9 edges") {
  const MolecularGraph g = parse_smiles("C1=C(C(=O)NC(=O)N1)F");
  CHECK(g.num_atoms() == 9);
  CHECK(g.edge_count == 9);
}

TEST_CASE("aspirin has 13 heavy atoms") {
  const MolecularGraph g = parse_smiles("CC(=O)OC1=CC=CC=C1C(=O)O");
  CHECK(g.num_atoms() == 13);
  CHECK(g.edge_count == 13);
}

TEST_CASE("benzene ring carbons are aromatic with degree 2 and one hydrogen") {
  const MolecularGraph g = parse_smiles("c1ccccc1");
  REQUIRE(g.num_atoms() == 6);
  CHECK(g.edge_count == 6);
  for (const Atom& a : g.atoms) {
    CHECK(a.element == "C");
    CHECK(a.degree == 2);
    CHECK(a.implicit_h == 1);
    CHECK(a.aromatic);
  }
}

TEST_CASE("heteroaromatic hydrogen counts") {
  CHECK(atom_of(parse_smiles("c1ccncc1"), "N").implicit_h == 0);   // pyridine
  CHECK(atom_of(parse_smiles("c1ccoc1"), "O").implicit_h == 0);    // furan
  CHECK(atom_of(parse_smiles("c1ccsc1"), "S").implicit_h == 0);    // thiophene
  CHECK(atom_of(parse_smiles("c1cc[nH]c1"), "N").implicit_h == 1); // pyrrole, bracket H
}

TEST_CASE("bracket atoms take their written hydrogen count and charge") {
  const MolecularGraph g = parse_smiles("[O-][N+](=O)c1ccccc1");
  const Atom& o = g.atoms[0];
  CHECK(o.element == "O");
  CHECK(o.charge == -1);
  CHECK(o.implicit_h == 0);
  CHECK(o.implicit_valence == 0);
  const Atom& n = g.atoms[1];
  CHECK(n.element == "N");
  CHECK(n.charge == 1);
  CHECK(g.num_atoms() == 9);
}

TEST_CASE("stereo markers and isotopes parse and are discarded") {
  const MolecularGraph g = parse_smiles("C[C@@H](N)C(=O)O");
  CHECK(g.num_atoms() == 6);
  CHECK(g.edge_count == 5);
  const MolecularGraph iso = parse_smiles("[13C]C");
  CHECK(iso.num_atoms() == 2);
  const MolecularGraph cis = parse_smiles("C/C=C\\C");
  CHECK(cis.num_atoms() == 4);
  CHECK(cis.edge_count == 3);
}

TEST_CASE("multi-fragment smiles keep disconnected components") {
  const MolecularGraph g = parse_smiles("CC(=O)[O-].[Na+]");
  CHECK(g.num_atoms() == 5);
  CHECK(g.edge_count == 3);
  const Atom& na = atom_of(g, "Na");
  CHECK(na.degree == 0);
}

TEST_CASE("parse errors carry kind and offset") {
  CHECK_THROWS_AS(parse_smiles(""), SmilesError);
  try {
    parse_smiles("C1CC");
    FAIL("expected UnmatchedRingClosure");
  } catch (const SmilesError& e) {
    CHECK(e.kind() == "UnmatchedRingClosure");
  }
  try {
    parse_smiles("C(C(C)");
    FAIL("expected UnbalancedParenthesis");
  } catch (const SmilesError& e) {
    CHECK(e.kind() == "UnbalancedParenthesis");
  }
  try {
    parse_smiles("CC)C");
    FAIL("expected UnbalancedParenthesis");
  } catch (const SmilesError& e) {
    CHECK(e.kind() == "UnbalancedParenthesis");
  }
  try {
    parse_smiles("CXC");
    FAIL("expected UnknownAtomToken");
  } catch (const SmilesError& e) {
    CHECK(e.kind() == "UnknownAtomToken");
    CHECK(e.offset() == 1);
  }
}

TEST_CASE("featurize_atom lays out the four one-hot blocks plus the flag") {
  Atom a;
  a.element = "C";
  a.degree = 0;
  a.implicit_h = 4;
  a.implicit_valence = 4;
  a.aromatic = false;
  const Tensor row = featurize_atom(a);
  REQUIRE(row.cols() == kAtomFeatureDim);
  CHECK(row.at(0, 0) == 1.0);        // element C is slot 0
  CHECK(row.at(0, 44) == 1.0);       // degree 0
  CHECK(row.at(0, 55 + 4) == 1.0);   // implicit H 4
  CHECK(row.at(0, 66 + 4) == 1.0);   // implicit valence 4
  CHECK(row.at(0, 77) == 0.0);

  Atom unknown;
  unknown.element = "Xx";
  const Tensor urow = featurize_atom(unknown);
  CHECK(urow.at(0, 43) == 1.0);  // Unknown slot

  Atom big;
  big.element = "N";
  big.degree = 14;  // clamps to 10
  const Tensor brow = featurize_atom(big);
  CHECK(brow.at(0, 44 + 10) == 1.0);
}

TEST_CASE("feature rows sum to 4 or 5 and adjacency is symmetric, zero diagonal") {
  for (const auto& entry : mdsyn::testing::smiles_corpus()) {
    const MolecularGraph g = parse_smiles(entry.smiles);
    for (std::size_t r = 0; r < g.features.rows(); ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < g.features.cols(); ++c) sum += g.features.at(r, c);
      CHECK((sum == 4.0 || sum == 5.0));
    }
    for (std::size_t i = 0; i < g.num_atoms(); ++i) {
      CHECK(g.adjacency.at(i, i) == 0.0);
      for (std::size_t j = 0; j < g.num_atoms(); ++j) {
        CHECK(g.adjacency.at(i, j) == g.adjacency.at(j, i));
      }
    }
  }
}

TEST_CASE("corpus heavy-atom and edge counts match formula-derived values") {
  for (const auto& entry : mdsyn::testing::smiles_corpus()) {
    CAPTURE(entry.name);
    const MolecularGraph g = parse_smiles(entry.smiles);
    CHECK(g.num_atoms() == entry.atoms);
    CHECK(g.edge_count == entry.edges);
    CHECK(degree_sum(g) == 2 * g.edge_count);
  }
}

TEST_CASE("parsing is deterministic") {
  const MolecularGraph a = parse_smiles("CC(=O)OC1=CC=CC=C1C(=O)O");
  const MolecularGraph b = parse_smiles("CC(=O)OC1=CC=CC=C1C(=O)O");
  CHECK(a.features.values() == b.features.values());
  CHECK(a.adjacency.values() == b.adjacency.values());
}

}  // TEST_SUITE
