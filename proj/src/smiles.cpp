#include "mdsyn/smiles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "mdsyn/errors.hpp"

namespace mdsyn {

namespace {

struct Bond {
  int a;
  int b;
  double order;  // 1, 1.5, 2, 3
};

struct PendingRing {
  int atom;
  double order;  // 0 = unspecified
  std::size_t offset;
};

bool is_organic_aromatic(char c) {
  return c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p' || c == 's';
}

// Lowest default valence first; higher states used by non-aromatic P/S.
const std::vector<int>& default_valences(const std::string& element) {
  static const std::map<std::string, std::vector<int>> table = {
      {"B", {3}}, {"C", {4}}, {"N", {3}}, {"O", {2}}, {"P", {3, 5}},
      {"S", {2, 4, 6}}, {"F", {1}}, {"Cl", {1}}, {"Br", {1}}, {"I", {1}},
      {"H", {1}}, {"Se", {2, 4, 6}}, {"As", {3, 5}},
  };
  static const std::vector<int> none = {0};
  auto it = table.find(element);
  return it == table.end() ? none : it->second;
}

int implicit_h_for(const std::string& element, bool aromatic, double bond_order_sum) {
  const std::vector<int>& valences = default_valences(element);
  int valence = valences.front();
  if (!aromatic) {
    // Hypervalent states kick in once explicit bonds exceed the lowest one.
    for (int v : valences) {
      valence = v;
      if (static_cast<double>(v) >= bond_order_sum - 1e-9) break;
    }
  }
  const double h = std::floor(static_cast<double>(valence) - bond_order_sum + 1e-9);
  return h > 0.0 ? static_cast<int>(h) : 0;
}

class Parser {
public:
  explicit Parser(const std::string& s) : s_(s) {}

  MolecularGraph run() {
    if (s_.empty()) throw SmilesError("EmptyInput", 0, "empty SMILES string");
    while (pos_ < s_.size()) step();
    finish_checks();
    return build();
  }

private:
  [[noreturn]] void fail(const char* kind, std::size_t offset, const std::string& detail) {
    throw SmilesError(kind, offset, detail + " in '" + s_ + "'");
  }

  void step() {
    const char c = s_[pos_];
    if (c == '(') {
      if (prev_ < 0) fail("UnbalancedParenthesis", pos_, "branch with no preceding atom");
      branch_stack_.push_back(prev_);
      ++pos_;
    } else if (c == ')') {
      if (branch_stack_.empty()) fail("UnbalancedParenthesis", pos_, "unmatched ')'");
      if (pending_bond_ != 0.0) fail("UnknownAtomToken", pos_, "dangling bond before ')'");
      prev_ = branch_stack_.back();
      branch_stack_.pop_back();
      ++pos_;
    } else if (c == '.') {
      if (pending_bond_ != 0.0) fail("UnknownAtomToken", pos_, "dangling bond before '.'");
      prev_ = -1;
      ++pos_;
    } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '/' || c == '\\') {
      // stereo slashes carry no information we keep; they bond as single
      pending_bond_ = (c == '-' || c == '/' || c == '\\') ? 1.0 : (c == '=' ? 2.0 : (c == '#' ? 3.0 : 1.5));
      pending_bond_offset_ = pos_;
      ++pos_;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      ring_closure(c - '0', pos_);
      ++pos_;
    } else if (c == '%') {
      if (pos_ + 2 >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) ||
          !std::isdigit(static_cast<unsigned char>(s_[pos_ + 2]))) {
        fail("UnmatchedRingClosure", pos_, "'%' needs two digits");
      }
      ring_closure((s_[pos_ + 1] - '0') * 10 + (s_[pos_ + 2] - '0'), pos_);
      pos_ += 3;
    } else if (c == '[') {
      bracket_atom();
    } else if (std::isupper(static_cast<unsigned char>(c)) || is_organic_aromatic(c)) {
      organic_atom();
    } else {
      fail("UnknownAtomToken", pos_, std::string("unexpected character '") + c + "'");
    }
  }

  void organic_atom() {
    const std::size_t start = pos_;
    const char c = s_[pos_];
    std::string symbol;
    bool aromatic = false;
    if (std::isupper(static_cast<unsigned char>(c))) {
      symbol = c;
      if (pos_ + 1 < s_.size()) {
        const char n = s_[pos_ + 1];
        if ((c == 'C' && n == 'l') || (c == 'B' && n == 'r')) symbol += n;
      }
      static const std::vector<std::string> organic = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"};
      if (std::find(organic.begin(), organic.end(), symbol) == organic.end()) {
        fail("UnknownAtomToken", start, "'" + symbol + "' is not in the organic subset; bracket it");
      }
    } else {
      aromatic = true;
      symbol = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    pos_ += symbol.size();
    add_atom(symbol, aromatic, /*bracket=*/false, /*hcount=*/-1, /*charge=*/0, start);
  }

  void bracket_atom() {
    const std::size_t start = pos_;
    const std::size_t close = s_.find(']', pos_);
    if (close == std::string::npos) fail("UnknownAtomToken", start, "unterminated bracket atom");
    std::size_t i = pos_ + 1;
    // isotope
    while (i < close && std::isdigit(static_cast<unsigned char>(s_[i]))) ++i;
    if (i >= close) fail("UnknownAtomToken", start, "bracket atom without element symbol");
    std::string symbol;
    bool aromatic = false;
    const char c = s_[i];
    if (std::islower(static_cast<unsigned char>(c))) {
      aromatic = true;
      if ((c == 's' && i + 1 < close && s_[i + 1] == 'e') ||
          (c == 'a' && i + 1 < close && s_[i + 1] == 's')) {
        symbol = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        symbol += s_[i + 1];
        i += 2;
      } else if (is_organic_aromatic(c)) {
        symbol = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        ++i;
      } else {
        fail("UnknownAtomToken", i, std::string("'") + c + "' cannot be aromatic");
      }
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      symbol = c;
      ++i;
      if (i < close && std::islower(static_cast<unsigned char>(s_[i]))) {
        symbol += s_[i];
        ++i;
      }
    } else {
      fail("UnknownAtomToken", i, "expected element symbol");
    }
    int hcount = 0;
    int charge = 0;
    while (i < close) {
      const char t = s_[i];
      if (t == '@') {
        ++i;  // chirality, discarded
        while (i < close && s_[i] == '@') ++i;
        static const std::vector<std::string> classes = {"TH", "AL", "SP", "TB", "OH"};
        for (const std::string& cls : classes) {
          if (s_.compare(i, cls.size(), cls) == 0 && i + cls.size() < close &&
              std::isdigit(static_cast<unsigned char>(s_[i + cls.size()]))) {
            i += cls.size();
            while (i < close && std::isdigit(static_cast<unsigned char>(s_[i]))) ++i;
            break;
          }
        }
      } else if (t == 'H') {
        ++i;
        hcount = 1;
        if (i < close && std::isdigit(static_cast<unsigned char>(s_[i]))) {
          hcount = 0;
          while (i < close && std::isdigit(static_cast<unsigned char>(s_[i]))) {
            hcount = hcount * 10 + (s_[i] - '0');
            ++i;
          }
        }
      } else if (t == '+' || t == '-') {
        const int sign = t == '+' ? 1 : -1;
        ++i;
        if (i < close && std::isdigit(static_cast<unsigned char>(s_[i]))) {
          int mag = 0;
          while (i < close && std::isdigit(static_cast<unsigned char>(s_[i]))) {
            mag = mag * 10 + (s_[i] - '0');
            ++i;
          }
          charge = sign * mag;
        } else {
          charge = sign;
          while (i < close && s_[i] == t) {
            charge += sign;
            ++i;
          }
        }
      } else if (t == ':') {
        ++i;  // atom map number, discarded
        while (i < close && std::isdigit(static_cast<unsigned char>(s_[i]))) ++i;
      } else {
        fail("UnknownAtomToken", i, std::string("unexpected '") + t + "' in bracket atom");
      }
    }
    pos_ = close + 1;
    add_atom(symbol, aromatic, /*bracket=*/true, hcount, charge, start);
  }

  void add_atom(const std::string& symbol, bool aromatic, bool bracket, int hcount, int charge,
                std::size_t offset) {
    Atom a;
    a.element = symbol;
    a.aromatic = aromatic;
    a.bracket = bracket;
    a.charge = charge;
    a.implicit_h = bracket ? std::max(hcount, 0) : 0;
    atoms_.push_back(a);
    const int idx = static_cast<int>(atoms_.size() - 1);
    if (prev_ >= 0) {
      double order = pending_bond_;
      if (order == 0.0) order = (atoms_[prev_].aromatic && aromatic) ? 1.5 : 1.0;
      add_bond(prev_, idx, order, offset);
    } else if (pending_bond_ != 0.0) {
      fail("UnknownAtomToken", pending_bond_offset_, "bond with no preceding atom");
    }
    pending_bond_ = 0.0;
    prev_ = idx;
  }

  void ring_closure(int number, std::size_t offset) {
    if (prev_ < 0) fail("UnmatchedRingClosure", offset, "ring closure with no preceding atom");
    auto it = open_rings_.find(number);
    if (it == open_rings_.end()) {
      open_rings_[number] = PendingRing{prev_, pending_bond_, offset};
      pending_bond_ = 0.0;
      return;
    }
    const PendingRing open = it->second;
    open_rings_.erase(it);
    if (open.atom == prev_) fail("UnmatchedRingClosure", offset, "ring closure bonds an atom to itself");
    double order = 0.0;
    if (open.order != 0.0 && pending_bond_ != 0.0 && open.order != pending_bond_) {
      fail("UnmatchedRingClosure", offset, "conflicting bond orders on ring closure");
    }
    order = open.order != 0.0 ? open.order : pending_bond_;
    if (order == 0.0) {
      order = (atoms_[open.atom].aromatic && atoms_[prev_].aromatic) ? 1.5 : 1.0;
    }
    add_bond(open.atom, prev_, order, offset);
    pending_bond_ = 0.0;
  }

  void add_bond(int a, int b, double order, std::size_t offset) {
    for (const Bond& e : bonds_) {
      if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) {
        fail("UnmatchedRingClosure", offset, "duplicate bond between atoms");
      }
    }
    bonds_.push_back(Bond{a, b, order});
  }

  void finish_checks() {
    if (!branch_stack_.empty()) fail("UnbalancedParenthesis", s_.size(), "unclosed '('");
    if (pending_bond_ != 0.0) fail("UnknownAtomToken", pending_bond_offset_, "dangling bond at end");
    if (!open_rings_.empty()) {
      const auto& [number, ring] = *open_rings_.begin();
      fail("UnmatchedRingClosure", ring.offset, "ring bond " + std::to_string(number) + " never closed");
    }
    if (atoms_.empty()) fail("EmptyInput", 0, "no atoms parsed");
  }

  MolecularGraph build() {
    const std::size_t v = atoms_.size();
    std::vector<double> order_sum(v, 0.0);
    MolecularGraph g;
    g.adjacency = Tensor(v, v);
    for (const Bond& e : bonds_) {
      g.adjacency.at(e.a, e.b) = 1.0;
      g.adjacency.at(e.b, e.a) = 1.0;
      order_sum[e.a] += e.order;
      order_sum[e.b] += e.order;
      ++atoms_[e.a].degree;
      ++atoms_[e.b].degree;
    }
    for (std::size_t i = 0; i < v; ++i) {
      Atom& a = atoms_[i];
      if (!a.bracket) {
        a.implicit_h = implicit_h_for(a.element, a.aromatic, order_sum[i]);
        a.implicit_valence = a.implicit_h;
      } else {
        a.implicit_valence = 0;
      }
    }
    g.features = Tensor(v, kAtomFeatureDim);
    for (std::size_t i = 0; i < v; ++i) {
      const Tensor row = featurize_atom(atoms_[i]);
      for (std::size_t c = 0; c < kAtomFeatureDim; ++c) g.features.at(i, c) = row.at(0, c);
      g.atom_symbols.push_back(atoms_[i].element);
    }
    g.atoms = std::move(atoms_);
    g.edge_count = bonds_.size();
    return g;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int prev_ = -1;
  double pending_bond_ = 0.0;
  std::size_t pending_bond_offset_ = 0;
  std::vector<int> branch_stack_;
  std::map<int, PendingRing> open_rings_;
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
};

}  // namespace

const std::vector<std::string>& atom_feature_elements() {
  static const std::vector<std::string> elements = {
      "C",  "N",  "O",  "S",  "F",  "Si", "P",  "Cl", "Br", "Mg", "Na",
      "Ca", "Fe", "As", "Al", "I",  "B",  "V",  "K",  "Tl", "Yb", "Sb",
      "Sn", "Ag", "Pd", "Co", "Se", "Ti", "Zn", "H",  "Li", "Ge", "Cu",
      "Au", "Ni", "Cd", "In", "Mn", "Zr", "Cr", "Pt", "Hg", "Pb", "Unknown"};
  return elements;
}

Tensor featurize_atom(const Atom& a) {
  const std::vector<std::string>& elements = atom_feature_elements();
  Tensor row(1, kAtomFeatureDim);
  std::size_t slot = elements.size() - 1;  // "Unknown"
  for (std::size_t i = 0; i + 1 < elements.size(); ++i) {
    if (elements[i] == a.element) {
      slot = i;
      break;
    }
  }
  row.at(0, slot) = 1.0;
  const auto clamp = [](int v) { return std::min(std::max(v, 0), kMaxCountFeature); };
  std::size_t base = elements.size();
  row.at(0, base + clamp(a.degree)) = 1.0;
  base += kMaxCountFeature + 1;
  row.at(0, base + clamp(a.implicit_h)) = 1.0;
  base += kMaxCountFeature + 1;
  row.at(0, base + clamp(a.implicit_valence)) = 1.0;
  row.at(0, kAtomFeatureDim - 1) = a.aromatic ? 1.0 : 0.0;
  return row;
}

MolecularGraph parse_smiles(const std::string& smiles) {
  return Parser(smiles).run();
}

}  // namespace mdsyn
