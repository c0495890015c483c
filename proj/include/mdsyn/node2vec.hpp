#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdsyn/rng.hpp"
#include "mdsyn/tensor.hpp"

namespace mdsyn {

// Undirected, unweighted gene-gene network. Node order is the canonical gene
// order shared with the expression panel.
struct PpiNetwork {
  std::vector<std::string> genes;
  std::vector<std::pair<int, int>> edges;      // a < b, deduplicated, no self-edges
  std::vector<std::vector<int>> neighbors;     // sorted adjacency lists

  void build_neighbors();
  std::size_t degree(std::size_t node) const { return neighbors[node].size(); }
};

struct Node2VecParams {
  double p = 1.0;
  double q = 1.0;
  int walk_length = 80;
  int walks_per_node = 10;
  int window = 10;
  int negatives = 5;
  int epochs = 5;
  int dim = 128;
  double learning_rate = 0.025;
};

// Second-order biased random walks: return weight 1/p, distance-1 weight 1,
// distance-2 weight 1/q. Every node starts walks_per_node walks; isolated
// nodes yield length-1 walks.
std::vector<std::vector<int>> node2vec_walks(const PpiNetwork& net, const Node2VecParams& params,
                                             std::uint64_t seed);

// Skip-gram with negative sampling over the walk corpus; negatives drawn from
// the unigram^0.75 distribution. Returns the input-embedding matrix
// (nodes x dim). Zero epochs returns the random initialization.
// If epoch_losses is non-null, the mean SGNS loss of each epoch is appended.
Tensor train_skipgram(const std::vector<std::vector<int>>& walks, std::size_t num_nodes,
                      const Node2VecParams& params, std::uint64_t seed,
                      std::vector<double>* epoch_losses = nullptr);

// walks + skip-gram in one call.
Tensor node2vec_embedding(const PpiNetwork& net, const Node2VecParams& params, std::uint64_t seed);

}  // namespace mdsyn
