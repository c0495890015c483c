#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mdsyn/tensor.hpp"

namespace mdsyn {

// Width of one atom feature row: 44 element slots + 11 degree + 11 implicit-H
// + 11 implicit-valence + aromatic flag.
inline constexpr std::size_t kAtomFeatureDim = 78;
inline constexpr int kMaxCountFeature = 10;

struct Atom {
  std::string element;        // canonical capitalized symbol ("C", "Cl", ...)
  int degree = 0;             // explicit heavy-atom neighbors
  int implicit_h = 0;         // for bracket atoms: the bracket H-count
  int implicit_valence = 0;   // 0 for bracket atoms (H fully specified)
  bool aromatic = false;
  bool bracket = false;
  int charge = 0;
};

struct MolecularGraph {
  Tensor features;                        // Vx78
  Tensor adjacency;                       // VxV symmetric 0/1, zero diagonal
  std::vector<std::string> atom_symbols;  // display symbols, length V
  std::vector<Atom> atoms;
  std::size_t edge_count = 0;

  std::size_t num_atoms() const { return atoms.size(); }
};

// Fixed element slot ordering; last entry is the catch-all "Unknown".
const std::vector<std::string>& atom_feature_elements();

// One-hot featurization; unknown symbols land in the "Unknown" slot,
// out-of-range counts clamp to 10.
Tensor featurize_atom(const Atom& a);

// Parses the organic subset plus bracket atoms, branches, ring closures
// (incl. %nn), bond symbols - = # : and fragment dots. Stereo markers and
// isotopes are accepted and discarded. Hydrogens stay implicit. Throws
// SmilesError (kinds: EmptyInput, UnknownAtomToken, UnbalancedParenthesis,
// UnmatchedRingClosure) with the character offset.
MolecularGraph parse_smiles(const std::string& smiles);

}  // namespace mdsyn
