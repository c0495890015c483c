#include "mdsyn/node2vec.hpp"

#include <algorithm>
#include <cmath>

#include "mdsyn/errors.hpp"

namespace mdsyn {

void PpiNetwork::build_neighbors() {
  neighbors.assign(genes.size(), {});
  for (const auto& [a, b] : edges) {
    neighbors[a].push_back(b);
    neighbors[b].push_back(a);
  }
  for (auto& adj : neighbors) std::sort(adj.begin(), adj.end());
}

namespace {

bool adjacent(const PpiNetwork& net, int a, int b) {
  const auto& adj = net.neighbors[a];
  return std::binary_search(adj.begin(), adj.end(), b);
}

std::vector<int> one_walk(const PpiNetwork& net, int start, const Node2VecParams& params, Rng& rng) {
  std::vector<int> walk{start};
  if (net.neighbors[start].empty()) return walk;
  std::vector<double> weights;
  while (static_cast<int>(walk.size()) < params.walk_length) {
    const int cur = walk.back();
    const auto& adj = net.neighbors[cur];
    if (adj.empty()) break;
    int next;
    if (walk.size() == 1) {
      next = adj[rng.uniform_int(adj.size())];
    } else {
      const int prev = walk[walk.size() - 2];
      weights.clear();
      double total = 0.0;
      for (int cand : adj) {
        double w;
        if (cand == prev) {
          w = 1.0 / params.p;
        } else if (adjacent(net, cand, prev)) {
          w = 1.0;
        } else {
          w = 1.0 / params.q;
        }
        weights.push_back(w);
        total += w;
      }
      double pick = rng.uniform() * total;
      std::size_t k = 0;
      for (; k + 1 < weights.size(); ++k) {
        pick -= weights[k];
        if (pick <= 0.0) break;
      }
      next = adj[k];
    }
    walk.push_back(next);
  }
  return walk;
}

}  // namespace

std::vector<std::vector<int>> node2vec_walks(const PpiNetwork& net, const Node2VecParams& params,
                                             std::uint64_t seed) {
  std::vector<std::vector<int>> walks;
  walks.reserve(net.genes.size() * static_cast<std::size_t>(params.walks_per_node));
  for (int w = 0; w < params.walks_per_node; ++w) {
    for (std::size_t node = 0; node < net.genes.size(); ++node) {
      // per-(round, start) stream keeps walks independent of generation order
      Rng rng = Rng::derive(seed, "walk:" + std::to_string(w) + ":" + std::to_string(node));
      walks.push_back(one_walk(net, static_cast<int>(node), params, rng));
    }
  }
  return walks;
}

Tensor train_skipgram(const std::vector<std::vector<int>>& walks, std::size_t num_nodes,
                      const Node2VecParams& params, std::uint64_t seed,
                      std::vector<double>* epoch_losses) {
  if (walks.empty()) throw DataError("train_skipgram: empty walk corpus");
  const std::size_t dim = static_cast<std::size_t>(params.dim);
  Rng init_rng = Rng::derive(seed, "skipgram-init");
  Tensor input(num_nodes, dim);
  Tensor output(num_nodes, dim);
  for (std::size_t i = 0; i < input.size(); ++i) {
    input[i] = (init_rng.uniform() - 0.5) / static_cast<double>(dim);
  }

  // unigram^0.75 negative-sampling table as a cumulative distribution
  std::vector<double> counts(num_nodes, 0.0);
  std::size_t corpus_tokens = 0;
  for (const auto& walk : walks) {
    for (int node : walk) {
      counts[node] += 1.0;
      ++corpus_tokens;
    }
  }
  std::vector<double> cdf(num_nodes);
  double acc = 0.0;
  for (std::size_t i = 0; i < num_nodes; ++i) {
    acc += std::pow(counts[i], 0.75);
    cdf[i] = acc;
  }
  if (acc <= 0.0) throw DataError("train_skipgram: walk corpus covers no nodes");
  Rng train_rng = Rng::derive(seed, "skipgram-train");
  const auto sample_negative = [&]() {
    const double pick = train_rng.uniform() * acc;
    return static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), pick) - cdf.begin());
  };

  // total center-context pairs per epoch, for the linear lr decay
  std::size_t pairs_per_epoch = 0;
  for (const auto& walk : walks) {
    const int len = static_cast<int>(walk.size());
    for (int c = 0; c < len; ++c) {
      const int lo = std::max(0, c - params.window);
      const int hi = std::min(len - 1, c + params.window);
      pairs_per_epoch += static_cast<std::size_t>(hi - lo);
    }
  }
  const double total_pairs = static_cast<double>(pairs_per_epoch) * std::max(params.epochs, 1);

  const auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  std::vector<double> center_grad(dim);
  std::size_t pair_counter = 0;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::size_t epoch_pairs = 0;
    for (const auto& walk : walks) {
      const int len = static_cast<int>(walk.size());
      for (int c = 0; c < len; ++c) {
        const int center = walk[c];
        const int lo = std::max(0, c - params.window);
        const int hi = std::min(len - 1, c + params.window);
        for (int o = lo; o <= hi; ++o) {
          if (o == c) continue;
          const double lr = params.learning_rate *
                            std::max(1.0 - static_cast<double>(pair_counter) / total_pairs, 1e-4);
          ++pair_counter;
          ++epoch_pairs;
          const int context = walk[o];
          std::fill(center_grad.begin(), center_grad.end(), 0.0);
          double* vc = input.data() + static_cast<std::size_t>(center) * dim;
          // positive pair plus sampled negatives
          for (int k = 0; k <= params.negatives; ++k) {
            int target;
            double label;
            if (k == 0) {
              target = context;
              label = 1.0;
            } else {
              target = sample_negative();
              if (target == context) continue;
              label = 0.0;
            }
            double* uo = output.data() + static_cast<std::size_t>(target) * dim;
            double s = 0.0;
            for (std::size_t d = 0; d < dim; ++d) s += vc[d] * uo[d];
            const double pred = sigmoid(s);
            epoch_loss -= label > 0.5 ? std::log(std::max(pred, 1e-12))
                                      : std::log(std::max(1.0 - pred, 1e-12));
            const double g = (pred - label) * lr;
            for (std::size_t d = 0; d < dim; ++d) {
              center_grad[d] += g * uo[d];
              uo[d] -= g * vc[d];
            }
          }
          for (std::size_t d = 0; d < dim; ++d) vc[d] -= center_grad[d];
        }
      }
    }
    if (epoch_losses != nullptr) {
      epoch_losses->push_back(epoch_pairs > 0 ? epoch_loss / static_cast<double>(epoch_pairs) : 0.0);
    }
  }
  (void)corpus_tokens;
  return input;
}

Tensor node2vec_embedding(const PpiNetwork& net, const Node2VecParams& params, std::uint64_t seed) {
  const auto walks = node2vec_walks(net, params, seed);
  return train_skipgram(walks, net.genes.size(), params, seed);
}

}  // namespace mdsyn
