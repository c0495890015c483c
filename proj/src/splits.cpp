#include "mdsyn/splits.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "mdsyn/errors.hpp"
#include "mdsyn/rng.hpp"

namespace mdsyn {

namespace {

// descending by count, ties ascending by key
template <class K>
std::vector<K> top_keys(const std::map<K, std::size_t>& counts, std::size_t n) {
  std::vector<std::pair<K, std::size_t>> items(counts.begin(), counts.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<K> out;
  for (std::size_t i = 0; i < std::min(n, items.size()); ++i) out.push_back(items[i].first);
  return out;
}

}  // namespace

Protocol protocol_from_string(const std::string& tag) {
  if (tag == "kfold5") return Protocol::kfold5;
  if (tag == "ldco") return Protocol::leave_drug_combo;
  if (tag == "ldo") return Protocol::leave_drug;
  if (tag == "lclo") return Protocol::leave_cell_line;
  if (tag == "lto") return Protocol::leave_tissue;
  throw ConfigError("unknown protocol '" + tag + "' (expected kfold5|ldco|ldo|lclo|lto)");
}

std::string protocol_name(Protocol p) {
  switch (p) {
    case Protocol::kfold5: return "kfold5";
    case Protocol::leave_drug_combo: return "leave_drug_combo";
    case Protocol::leave_drug: return "leave_drug";
    case Protocol::leave_cell_line: return "leave_cell_line";
    case Protocol::leave_tissue: return "leave_tissue";
  }
  return "?";
}

SplitPlan split_kfold5(const std::vector<TripletRecord>& triplets, std::uint64_t seed) {
  if (triplets.size() < 5) throw DataError("kfold5 needs at least 5 triplets");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    (triplets[i].label == 1 ? pos : neg).push_back(i);
  }
  Rng rng = Rng::derive(seed, "kfold5");
  rng.shuffle(pos);
  rng.shuffle(neg);

  SplitPlan plan;
  plan.protocol = Protocol::kfold5;
  plan.folds.resize(5);
  std::vector<std::set<std::size_t>> test_sets(5);
  std::size_t next = 0;
  for (const auto* cls : {&pos, &neg}) {
    for (std::size_t i = 0; i < cls->size(); ++i) {
      test_sets[next % 5].insert((*cls)[i]);
      ++next;
    }
  }
  for (std::size_t k = 0; k < 5; ++k) {
    plan.folds[k].held_out = "fold " + std::to_string(k);
    for (std::size_t i = 0; i < triplets.size(); ++i) {
      (test_sets[k].count(i) > 0 ? plan.folds[k].test : plan.folds[k].train).push_back(i);
    }
  }
  return plan;
}

SplitPlan split_leave_drug_combo(const std::vector<TripletRecord>& triplets) {
  std::map<std::pair<std::string, std::string>, std::size_t> counts;
  for (const TripletRecord& t : triplets) ++counts[t.pair_key()];
  if (counts.size() < 15) {
    throw DataError("leave-drug-combination-out needs at least 15 distinct drug pairs, found " +
                    std::to_string(counts.size()));
  }
  const auto ranked = top_keys(counts, 15);

  SplitPlan plan;
  plan.protocol = Protocol::leave_drug_combo;
  for (std::size_t g = 0; g < 5; ++g) {
    SplitFold fold;
    std::set<std::pair<std::string, std::string>> held(ranked.begin() + g * 3,
                                                       ranked.begin() + g * 3 + 3);
    for (const auto& pair : held) {
      if (!fold.held_out.empty()) fold.held_out += ";";
      fold.held_out += pair.first + "+" + pair.second;
    }
    for (std::size_t i = 0; i < triplets.size(); ++i) {
      (held.count(triplets[i].pair_key()) > 0 ? fold.test : fold.train).push_back(i);
    }
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

namespace {

SplitPlan leave_entity_out(const std::vector<TripletRecord>& triplets, Protocol protocol,
                           const std::function<std::vector<std::string>(const TripletRecord&)>& keys_of) {
  std::map<std::string, std::size_t> counts;
  for (const TripletRecord& t : triplets) {
    for (const std::string& k : keys_of(t)) ++counts[k];
  }
  if (counts.size() < 5) {
    throw DataError(protocol_name(protocol) + " needs at least 5 distinct entities, found " +
                    std::to_string(counts.size()));
  }
  const auto top = top_keys(counts, 5);
  SplitPlan plan;
  plan.protocol = protocol;
  for (const std::string& entity : top) {
    SplitFold fold;
    fold.held_out = entity;
    for (std::size_t i = 0; i < triplets.size(); ++i) {
      const auto keys = keys_of(triplets[i]);
      const bool hit = std::find(keys.begin(), keys.end(), entity) != keys.end();
      (hit ? fold.test : fold.train).push_back(i);
    }
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

}  // namespace

SplitPlan split_leave_drug(const std::vector<TripletRecord>& triplets) {
  return leave_entity_out(triplets, Protocol::leave_drug, [](const TripletRecord& t) {
    return std::vector<std::string>{t.drug_a, t.drug_b};
  });
}

SplitPlan split_leave_cell_line(const std::vector<TripletRecord>& triplets) {
  return leave_entity_out(triplets, Protocol::leave_cell_line, [](const TripletRecord& t) {
    return std::vector<std::string>{t.cell_line};
  });
}

SplitPlan split_leave_tissue(const std::vector<TripletRecord>& triplets,
                             const std::map<std::string, std::string>& tissue_map) {
  std::set<std::string> missing;
  for (const TripletRecord& t : triplets) {
    if (tissue_map.find(t.cell_line) == tissue_map.end()) missing.insert(t.cell_line);
  }
  if (!missing.empty()) {
    std::string msg = "tissue map is missing cell lines:";
    for (const auto& m : missing) msg += " " + m;
    throw MissingTissueError(msg);
  }
  SplitPlan plan = leave_entity_out(triplets, Protocol::leave_tissue, [&](const TripletRecord& t) {
    return std::vector<std::string>{tissue_map.at(t.cell_line)};
  });
  return plan;
}

void validate_plan(const SplitPlan& plan, const std::vector<TripletRecord>& triplets,
                   const std::map<std::string, std::string>* tissue_map) {
  const auto fail = [&](std::size_t fold, const std::string& why) {
    throw DataError("split plan (" + protocol_name(plan.protocol) + ") fold " +
                    std::to_string(fold) + " violates its invariant: " + why);
  };
  std::set<std::size_t> all_tested;
  for (std::size_t k = 0; k < plan.folds.size(); ++k) {
    const SplitFold& fold = plan.folds[k];
    std::set<std::size_t> train(fold.train.begin(), fold.train.end());
    std::set<std::size_t> test(fold.test.begin(), fold.test.end());
    for (std::size_t i : test) {
      if (train.count(i) > 0) fail(k, "train and test overlap");
      all_tested.insert(i);
    }
    if (train.size() + test.size() > triplets.size()) fail(k, "indices repeat");

    switch (plan.protocol) {
      case Protocol::kfold5:
        if (train.size() + test.size() != triplets.size()) fail(k, "fold does not cover the data");
        break;
      case Protocol::leave_drug_combo: {
        std::set<std::pair<std::string, std::string>> held;
        for (std::size_t i : fold.test) held.insert(triplets[i].pair_key());
        for (std::size_t i : fold.train) {
          if (held.count(triplets[i].pair_key()) > 0) fail(k, "held-out pair appears in training");
        }
        break;
      }
      case Protocol::leave_drug: {
        const std::string& drug = fold.held_out;
        for (std::size_t i : fold.train) {
          if (triplets[i].drug_a == drug || triplets[i].drug_b == drug) {
            fail(k, "held-out drug appears in training");
          }
        }
        for (std::size_t i : fold.test) {
          if (triplets[i].drug_a != drug && triplets[i].drug_b != drug) {
            fail(k, "test triplet lacks the held-out drug");
          }
        }
        break;
      }
      case Protocol::leave_cell_line: {
        for (std::size_t i : fold.train) {
          if (triplets[i].cell_line == fold.held_out) fail(k, "held-out cell line in training");
        }
        for (std::size_t i : fold.test) {
          if (triplets[i].cell_line != fold.held_out) fail(k, "foreign cell line in test");
        }
        break;
      }
      case Protocol::leave_tissue: {
        if (tissue_map == nullptr) fail(k, "tissue map required for validation");
        for (std::size_t i : fold.train) {
          if (tissue_map->at(triplets[i].cell_line) == fold.held_out) {
            fail(k, "held-out tissue in training");
          }
        }
        for (std::size_t i : fold.test) {
          if (tissue_map->at(triplets[i].cell_line) != fold.held_out) {
            fail(k, "foreign tissue in test");
          }
        }
        break;
      }
    }
  }
  if (plan.protocol == Protocol::kfold5 && all_tested.size() != triplets.size()) {
    throw DataError("kfold5 test folds do not partition the data");
  }
}

}  // namespace mdsyn
