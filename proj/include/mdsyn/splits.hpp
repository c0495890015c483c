#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mdsyn/dataset.hpp"

namespace mdsyn {

enum class Protocol { kfold5, leave_drug_combo, leave_drug, leave_cell_line, leave_tissue };

Protocol protocol_from_string(const std::string& tag);
std::string protocol_name(Protocol p);

struct SplitFold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::string held_out;  // provenance: what this fold holds out
};

struct SplitPlan {
  Protocol protocol = Protocol::kfold5;
  std::vector<SplitFold> folds;
};

// Label-stratified random partition into 5 folds.
SplitPlan split_kfold5(const std::vector<TripletRecord>& triplets, std::uint64_t seed);

// Unordered pairs ranked by triplet count (ties lexicographic); the top 15
// pairs are chunked into 5 groups of 3 in rank order.
SplitPlan split_leave_drug_combo(const std::vector<TripletRecord>& triplets);

// Top 5 drugs by triplet count (either pair position); fold k tests every
// triplet containing drug k and trains on the complement.
SplitPlan split_leave_drug(const std::vector<TripletRecord>& triplets);

SplitPlan split_leave_cell_line(const std::vector<TripletRecord>& triplets);

// Top 5 tissues by triplet count. Throws MissingTissueError listing cell
// lines absent from the map.
SplitPlan split_leave_tissue(const std::vector<TripletRecord>& triplets,
                             const std::map<std::string, std::string>& tissue_map);

// Re-checks the defining exclusion invariant of the plan; throws on violation.
void validate_plan(const SplitPlan& plan, const std::vector<TripletRecord>& triplets,
                   const std::map<std::string, std::string>* tissue_map = nullptr);

}  // namespace mdsyn
