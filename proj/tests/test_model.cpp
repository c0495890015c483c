#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "mdsyn/errors.hpp"
#include "mdsyn/harness.hpp"
#include "mdsyn/model.hpp"
#include "mdsyn/trainer.hpp"
#include "support/fixtures.hpp"

using namespace mdsyn;
namespace fs = std::filesystem;

namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.gcn_hidden_units = {78, 32, 128};
  c.attention_heads = 2;
  c.encoder_layers = 1;
  c.encoder_hidden = 16;
  c.dropout = 0.0;
  c.batch_size = 8;
  c.max_epochs = 3;
  c.val_fraction = 0.0;
  c.node2vec.walk_length = 10;
  c.node2vec.walks_per_node = 2;
  c.node2vec.epochs = 1;
  return c;
}

DatasetBundle tiny_bundle(const std::string& name, std::size_t genes = 10, std::size_t triplets = 24) {
  mdsyn::testing::ToyBundleSpec spec;
  spec.genes = genes;
  spec.drugs = 6;
  spec.cells = 4;
  spec.triplets = triplets;
  const std::string dir = mdsyn::testing::temp_dir(name);
  mdsyn::testing::write_toy_bundle(dir, spec);
  return load_bundle(dir, Strictness::strict);
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("zero weights and zero input give probs [0.5, 0.5]") {
  ModelConfig config = tiny_config();
  ModelState state = ModelState::initialize(config, Variant::one_d, EncoderMode1D::fallback, 10, 1);
  for (const std::string& name : state.param_names()) {
    Parameter& p = state.param(name);
    std::fill(p.value.values().begin(), p.value.values().end(), 0.0);
  }
  state.standardizer.mean = Tensor(1, 10);
  state.standardizer.stdev = Tensor::full(1, 10, 1.0);

  TripletInputs in;
  const std::string sa = "CC", sb = "CO";
  const Tensor expr(1, 10);
  in.smiles_a = &sa;
  in.smiles_b = &sb;
  in.expr_std = &expr;
  ForwardOptions opt;
  Tape tape;
  const TripletForward f = forward_triplet(tape, state, in, opt);
  CHECK(tape.value(f.probs).at(0, 0) == doctest::Approx(0.5));
  CHECK(tape.value(f.probs).at(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("classifier logits match a straight-line recomputation of the MLP + softmax") {
  ModelConfig config = tiny_config();
  ModelState state = ModelState::initialize(config, Variant::two_d_no_trans,
                                            EncoderMode1D::fallback, 8, 5);
  Rng rng(2);
  Tensor features(1, kPoolOutDim);
  for (std::size_t i = 0; i < features.size(); ++i) features[i] = rng.normal();

  // tape path: feed the classifier via the 2d_no_trans wiring is indirect, so
  // recompute the classifier stack by hand from the same parameters
  const auto relu_vec = [](Tensor t) {
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::max(t[i], 0.0);
    return t;
  };
  auto p = state.classifier();
  const Tensor h1 = relu_vec(add_rowvec(matmul(features, p.w1->value), p.b1->value));
  const Tensor h2 = relu_vec(add_rowvec(matmul(h1, p.w2->value), p.b2->value));
  const Tensor logits = add_rowvec(matmul(h2, p.w3->value), p.b3->value);
  const Tensor probs = softmax_rows(logits);

  Tape tape;
  ForwardOptions opt;
  TripletForward out;
  // classify() is internal; drive it through forward_triplet with a stub 2D path
  // by zeroing the pool projection so features == activated pool output.
  // Instead check the exposed path: hidden sizes and probs of the hand computation.
  const auto x = tape.constant(features);
  auto h = tape.add_rowvec(tape.matmul(x, tape.param(*p.w1)), tape.param(*p.b1));
  h = tape.relu(h);
  h = tape.add_rowvec(tape.matmul(h, tape.param(*p.w2)), tape.param(*p.b2));
  h = tape.relu(h);
  h = tape.add_rowvec(tape.matmul(h, tape.param(*p.w3)), tape.param(*p.b3));
  const auto soft = tape.softmax_rows(h);
  double diff = 0.0;
  for (std::size_t c = 0; c < 2; ++c) diff = std::max(diff, std::abs(tape.value(soft).at(0, c) - probs.at(0, c)));
  CHECK(diff <= 1e-10);
}

TEST_CASE("probabilities sum to one for many random states") {
  ModelConfig config = tiny_config();
  const std::string sa = "CC(=O)O", sb = "c1ccccc1";
  Rng seeder(10);
  for (int trial = 0; trial < 25; ++trial) {
    ModelState state = ModelState::initialize(config, Variant::two_d, EncoderMode1D::fallback, 7,
                                              seeder.next());
    const MolecularGraph ga = parse_smiles(sa);
    const MolecularGraph gb = parse_smiles(sb);
    const Tensor adj_a = normalize_adjacency(ga.adjacency, true);
    const Tensor adj_b = normalize_adjacency(gb.adjacency, true);
    Rng rng(trial + 1);
    Tensor ppi(7, kNodeDim);
    for (std::size_t i = 0; i < ppi.size(); ++i) ppi[i] = rng.normal();
    TripletInputs in;
    in.feat_a = &ga.features;
    in.norm_adj_a = &adj_a;
    in.feat_b = &gb.features;
    in.norm_adj_b = &adj_b;
    in.ppi_embedding = &ppi;
    Tape tape;
    ForwardOptions opt;
    const TripletForward f = forward_triplet(tape, state, in, opt);
    const Tensor& probs = tape.value(f.probs);
    CHECK(std::abs(probs.at(0, 0) + probs.at(0, 1) - 1.0) < 1e-9);
  }
}

TEST_CASE("end-to-end single-triplet gradients pass finite differences for every block") {
  ModelConfig config = tiny_config();
  DatasetBundle bundle = tiny_bundle("model_grad", 6, 12);
  ensure_ppi_embedding(bundle, config, 3, "");
  ModelState state =
      ModelState::initialize(config, Variant::full, EncoderMode1D::fallback, bundle.panel_size(), 9);
  std::vector<const std::vector<double>*> rows;
  for (const auto& [cell, values] : bundle.expression) rows.push_back(&values);
  state.standardizer = Standardizer::fit(rows);

  FeatureCache cache(bundle, config, Variant::full, EncoderMode1D::fallback);
  cache.standardize(state.standardizer);
  const TripletRecord& t = bundle.triplets[0];

  const auto loss = [&](bool with_grad) {
    ForwardOptions opt;
    opt.activation = config.activation;
    Tape tape;
    const TripletForward f = forward_triplet(tape, state, cache.inputs_for(t), opt);
    const auto l = tape.cross_entropy(f.probs, {t.label});
    if (with_grad) tape.backward(l);
    return tape.value(l).at(0, 0);
  };
  Rng pick(55);
  std::string worst;
  const double err = mdsyn::testing::max_rel_grad_error(state.trainable(), loss, 2, pick, &worst);
  INFO("worst parameter: ", worst);
  CHECK(err < 1e-4);
}

TEST_CASE("training is deterministic and the checkpoint round-trips bit-exactly") {
  ModelConfig config = tiny_config();
  DatasetBundle bundle = tiny_bundle("model_train", 10, 24);
  ensure_ppi_embedding(bundle, config, 0, "");
  std::vector<std::size_t> all(bundle.triplets.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  TrainResult r1 = train_model(bundle, all, config, Variant::full, EncoderMode1D::fallback, 4);
  TrainResult r2 = train_model(bundle, all, config, Variant::full, EncoderMode1D::fallback, 4);
  REQUIRE(r1.log.size() == r2.log.size());
  CHECK(r1.log[0].train_loss == r2.log[0].train_loss);
  CHECK(r1.initial_loss == r2.initial_loss);
  for (const std::string& name : r1.state.param_names()) {
    CHECK(r1.state.param(name).value.values() == r2.state.param(name).value.values());
  }

  const std::string dir = mdsyn::testing::temp_dir("model_ckpt");
  const std::string path = dir + "/model.ckpt";
  r1.state.save(path);
  ModelState loaded = ModelState::load(path);
  CHECK(loaded.variant == Variant::full);
  CHECK(loaded.panel_size == bundle.panel_size());
  for (const std::string& name : r1.state.param_names()) {
    CHECK(loaded.param(name).value.values() == r1.state.param(name).value.values());
  }
  CHECK(loaded.standardizer.mean.values() == r1.state.standardizer.mean.values());

  const auto p1 = predict_batch(r1.state, bundle, bundle.triplets);
  const auto p2 = predict_batch(loaded, bundle, bundle.triplets);
  REQUIRE(p1.size() == p2.size());
  for (std::size_t i = 0; i < p1.size(); ++i) {
    CHECK(p1[i].prob_synergy == p2[i].prob_synergy);
  }
}

TEST_CASE("corrupted fingerprint is rejected at load") {
  ModelConfig config = tiny_config();
  ModelState state = ModelState::initialize(config, Variant::one_d, EncoderMode1D::fallback, 10, 1);
  state.standardizer.mean = Tensor(1, 10);
  state.standardizer.stdev = Tensor::full(1, 10, 1.0);
  const std::string dir = mdsyn::testing::temp_dir("model_fpr");
  const std::string path = dir + "/m.ckpt";
  state.save(path);
  // flip a config byte inside the manifest: learning_rate digit
  std::ifstream in(path, std::ios::binary);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  const std::size_t pos = data.find("\"max_epochs\":3");
  REQUIRE(pos != std::string::npos);
  data.replace(pos, 14, "\"max_epochs\":4");
  std::ofstream out(path, std::ios::binary);
  out << data;
  out.close();
  CHECK_THROWS_AS(ModelState::load(path), ConfigError);
}

TEST_CASE("monotone overfit: training loss is non-increasing over 50-epoch windows") {
  ModelConfig config = tiny_config();
  config.max_epochs = 90;
  config.batch_size = 16;
  config.learning_rate = 1e-3;
  DatasetBundle bundle = tiny_bundle("model_overfit", 8, 40);
  ensure_ppi_embedding(bundle, config, 1, "");
  std::vector<std::size_t> all(bundle.triplets.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const TrainResult r = train_model(bundle, all, config, Variant::full, EncoderMode1D::fallback, 7);
  REQUIRE(r.log.size() == 90);
  for (std::size_t i = 0; i + 50 < r.log.size(); ++i) {
    CHECK(r.log[i + 50].train_loss <= r.log[i].train_loss + 1e-3);
  }
}

TEST_CASE("predict_batch preserves order, reports gaps per row, probabilities sum to 1") {
  ModelConfig config = tiny_config();
  DatasetBundle bundle = tiny_bundle("model_pred", 10, 20);
  ensure_ppi_embedding(bundle, config, 0, "");
  std::vector<std::size_t> all(bundle.triplets.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  TrainResult r = train_model(bundle, all, config, Variant::full, EncoderMode1D::fallback, 2);

  std::vector<TripletRecord> rows = bundle.triplets;
  TripletRecord ghost;
  ghost.drug_a = "NOPE";
  ghost.drug_b = rows[0].drug_b;
  ghost.cell_line = rows[0].cell_line;
  ghost.label = 1;
  rows.insert(rows.begin() + 3, ghost);
  const auto preds = predict_batch(r.state, bundle, rows);
  REQUIRE(preds.size() == rows.size());
  CHECK_FALSE(preds[3].ok);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!preds[i].ok) continue;
    CHECK(preds[i].triplet_id == rows[i].id());
    CHECK(preds[i].prob_synergy + preds[i].prob_antagonism == doctest::Approx(1.0).epsilon(1e-9));
  }

  // permuting input order permutes outputs identically
  std::vector<TripletRecord> reversed(bundle.triplets.rbegin(), bundle.triplets.rend());
  const auto fwd = predict_batch(r.state, bundle, bundle.triplets);
  const auto rev = predict_batch(r.state, bundle, reversed);
  for (std::size_t i = 0; i < fwd.size(); ++i) {
    CHECK(fwd[i].prob_synergy == rev[rev.size() - 1 - i].prob_synergy);
  }
}

TEST_CASE("ppi embedding rows stay bit-identical through a training epoch") {
  ModelConfig config = tiny_config();
  config.max_epochs = 2;
  DatasetBundle bundle = tiny_bundle("model_frozen", 8, 16);
  ensure_ppi_embedding(bundle, config, 5, "");
  const std::vector<double> before = bundle.ppi_embedding.values();
  std::vector<std::size_t> all(bundle.triplets.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  train_model(bundle, all, config, Variant::full, EncoderMode1D::fallback, 3);
  CHECK(bundle.ppi_embedding.values() == before);
}

TEST_CASE("variant wiring: classifier widths and attention parameter presence") {
  ModelConfig config = tiny_config();
  ModelState full = ModelState::initialize(config, Variant::full, EncoderMode1D::fallback, 10, 1);
  ModelState d1 = ModelState::initialize(config, Variant::one_d, EncoderMode1D::fallback, 10, 1);
  ModelState d2 = ModelState::initialize(config, Variant::two_d, EncoderMode1D::fallback, 10, 1);
  ModelState nt = ModelState::initialize(config, Variant::two_d_no_trans, EncoderMode1D::fallback,
                                         10, 1);
  CHECK(full.param("clf.w1").value.rows() == 2048);
  CHECK(d1.param("clf.w1").value.rows() == 1792);
  CHECK(d2.param("clf.w1").value.rows() == 256);
  CHECK(nt.param("clf.w1").value.rows() == 256);
  CHECK_FALSE(d1.has_param("gcn.w1"));
  CHECK_FALSE(d1.has_param("enc0.h0.wq"));
  CHECK(d2.has_param("enc0.h0.wq"));
  CHECK_FALSE(nt.has_param("enc0.h0.wq"));  // no attention parameters at all
  CHECK_FALSE(d2.has_param("cell.w1"));
  int attention_params = 0;
  for (const std::string& name : nt.param_names()) {
    if (name.find("enc") == 0) ++attention_params;
  }
  CHECK(attention_params == 0);
}

TEST_CASE("train aborts with DataGap listing every offender") {
  ModelConfig config = tiny_config();
  config.drug_1d_encoder = "precomputed";
  DatasetBundle bundle = tiny_bundle("model_gap", 8, 16);
  ensure_ppi_embedding(bundle, config, 0, "");
  // no drug_embeddings in the bundle -> every drug is a gap in precomputed mode
  std::vector<std::size_t> all(bundle.triplets.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  try {
    train_model(bundle, all, config, Variant::full, EncoderMode1D::precomputed, 1);
    FAIL("expected DataGapError");
  } catch (const DataGapError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("no precomputed 768-dim embedding") != std::string::npos);
  }
}

}  // TEST_SUITE
