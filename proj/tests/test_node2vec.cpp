#include <doctest.h>

#include <cmath>

#include "mdsyn/node2vec.hpp"

using namespace mdsyn;

namespace {

PpiNetwork barbell(int clique_size) {
  PpiNetwork net;
  const int n = clique_size * 2;
  for (int i = 0; i < n; ++i) net.genes.push_back("N" + std::to_string(i));
  for (int block = 0; block < 2; ++block) {
    const int base = block * clique_size;
    for (int i = 0; i < clique_size; ++i) {
      for (int j = i + 1; j < clique_size; ++j) net.edges.push_back({base + i, base + j});
    }
  }
  net.edges.push_back({clique_size - 1, clique_size});  // the bridge
  net.build_neighbors();
  return net;
}

double cosine(const Tensor& emb, int a, int b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t c = 0; c < emb.cols(); ++c) {
    dot += emb.at(a, c) * emb.at(b, c);
    na += emb.at(a, c) * emb.at(a, c);
    nb += emb.at(b, c) * emb.at(b, c);
  }
  return dot / (std::sqrt(na) * std::sqrt(nb) + 1e-12);
}

}  // namespace

TEST_SUITE("node2vec") {

TEST_CASE("isolated node yields length-1 walks, walks_per_node of them") {
  PpiNetwork net;
  net.genes = {"solo"};
  net.build_neighbors();
  Node2VecParams params;
  params.walks_per_node = 4;
  const auto walks = node2vec_walks(net, params, 1);
  REQUIRE(walks.size() == 4);
  for (const auto& w : walks) {
    REQUIRE(w.size() == 1);
    CHECK(w[0] == 0);
  }
}

TEST_CASE("two-node edge walks strictly alternate endpoints") {
  PpiNetwork net;
  net.genes = {"a", "b"};
  net.edges = {{0, 1}};
  net.build_neighbors();
  Node2VecParams params;
  params.walk_length = 20;
  params.walks_per_node = 3;
  const auto walks = node2vec_walks(net, params, 2);
  REQUIRE(walks.size() == 6);
  for (const auto& w : walks) {
    REQUIRE(w.size() == 20);
    for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] == 1 - w[i - 1]);
  }
}

TEST_CASE("every node starts walks_per_node walks") {
  const PpiNetwork net = barbell(5);
  Node2VecParams params;
  params.walks_per_node = 7;
  params.walk_length = 10;
  const auto walks = node2vec_walks(net, params, 3);
  std::vector<int> starts(net.genes.size(), 0);
  for (const auto& w : walks) ++starts[w[0]];
  for (int s : starts) CHECK(s == 7);
}

TEST_CASE("triangle next-hop distribution is uniform over both neighbors at p=q=1") {
  PpiNetwork net;
  net.genes = {"a", "b", "c"};
  net.edges = {{0, 1}, {1, 2}, {0, 2}};
  net.build_neighbors();
  Node2VecParams params;
  params.walk_length = 200;
  params.walks_per_node = 20;  // ~ 1.2e4 transitions
  const auto walks = node2vec_walks(net, params, 5);
  std::size_t back = 0, onward = 0;
  for (const auto& w : walks) {
    for (std::size_t i = 2; i < w.size(); ++i) {
      (w[i] == w[i - 2] ? back : onward) += 1;
    }
  }
  const double frac = static_cast<double>(back) / static_cast<double>(back + onward);
  CHECK(frac == doctest::Approx(0.5).epsilon(0.06));  // within +-3 percentage points
}

TEST_CASE("zero epochs returns the random initialization") {
  const PpiNetwork net = barbell(4);
  Node2VecParams params;
  params.epochs = 0;
  params.dim = 16;
  params.walk_length = 10;
  params.walks_per_node = 2;
  const Tensor emb = node2vec_embedding(net, params, 9);
  CHECK(emb.rows() == net.genes.size());
  CHECK(emb.cols() == 16);
  double norm = 0.0;
  for (std::size_t i = 0; i < emb.size(); ++i) norm += emb[i] * emb[i];
  CHECK(norm > 0.0);  // untrained but initialized
}

TEST_CASE("skip-gram loss decreases over epochs") {
  // small per-epoch corpus so convergence spans several epochs
  const PpiNetwork net = barbell(5);
  Node2VecParams params;
  params.dim = 32;
  params.walk_length = 8;
  params.walks_per_node = 1;
  params.window = 4;
  params.epochs = 6;
  const auto walks = node2vec_walks(net, params, 11);
  std::vector<double> losses;
  train_skipgram(walks, net.genes.size(), params, 11, &losses);
  REQUIRE(losses.size() == 6);
  CHECK(losses.back() < losses.front());
}

TEST_CASE("barbell cliques separate: intra-clique cosine beats inter-clique") {
  const PpiNetwork net = barbell(5);
  Node2VecParams params;
  params.dim = 32;
  params.walk_length = 40;
  params.walks_per_node = 8;
  params.epochs = 5;
  const Tensor emb = node2vec_embedding(net, params, 21);
  double intra = 0.0, inter = 0.0;
  int n_intra = 0, n_inter = 0;
  for (int i = 0; i < 10; ++i) {
    for (int j = i + 1; j < 10; ++j) {
      const bool same = (i < 5) == (j < 5);
      if (same) {
        intra += cosine(emb, i, j);
        ++n_intra;
      } else {
        inter += cosine(emb, i, j);
        ++n_inter;
      }
    }
  }
  CHECK(intra / n_intra > inter / n_inter);
}

TEST_CASE("embedding generation is deterministic in the seed") {
  const PpiNetwork net = barbell(4);
  Node2VecParams params;
  params.dim = 16;
  params.walk_length = 15;
  params.walks_per_node = 3;
  params.epochs = 2;
  const Tensor a = node2vec_embedding(net, params, 33);
  const Tensor b = node2vec_embedding(net, params, 33);
  CHECK(a.values() == b.values());
}

}  // TEST_SUITE
