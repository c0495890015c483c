#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mdsyn/dataset.hpp"
#include "mdsyn/errors.hpp"
#include "support/fixtures.hpp"

using namespace mdsyn;
namespace fs = std::filesystem;

namespace {

RawScoreRecord raw(const std::string& a, const std::string& b, const std::string& c,
                   const std::string& score, std::size_t line = 0) {
  return RawScoreRecord{a, b, c, score, line};
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("duplicates average across swapped pair order; thresholds label") {
  PreprocessStats stats;
  const auto out = preprocess(
      {
          raw("A", "B", "C1", "8", 2),
          raw("B", "A", "C1", "16", 3),   // same unordered group -> avg 12 -> positive
          raw("A", "B", "C2", "5", 4),    // midzone -> dropped
          raw("A", "C", "C1", "-3.5", 5), // negative
          raw("A", "B", "C3", "oops", 6), // malformed -> skipped
          raw("D", "D", "C1", "20", 7),   // self pair -> skipped
      },
      10.0, 0.0, &stats);
  REQUIRE(out.size() == 2);
  CHECK(out[0].drug_a == "A");
  CHECK(out[0].drug_b == "B");
  CHECK(out[0].score == doctest::Approx(12.0));
  CHECK(out[0].label == 1);
  CHECK(out[1].drug_b == "C");
  CHECK(out[1].label == 0);
  CHECK(stats.rows_read == 6);
  CHECK(stats.malformed == 1);
  CHECK(stats.self_pairs == 1);
  CHECK(stats.dropped_midzone == 1);
  CHECK(stats.positives == 1);
  CHECK(stats.negatives == 1);
  bool logged_line_6 = false;
  for (const auto& m : stats.messages) logged_line_6 |= m.find("line 6") != std::string::npos;
  CHECK(logged_line_6);
}

TEST_CASE("boundary scores are dropped, strict inequalities label") {
  const auto out = preprocess({raw("A", "B", "C", "10"), raw("A", "C", "C", "0"),
                               raw("A", "D", "C", "10.0001"), raw("A", "E", "C", "-0.0001")});
  REQUIRE(out.size() == 2);
  CHECK(out[0].label == 1);   // A,D
  CHECK(out[1].label == 0);   // A,E
}

TEST_CASE("preprocess is idempotent on its own output") {
  Rng rng(17);
  std::vector<RawScoreRecord> input;
  for (int i = 0; i < 200; ++i) {
    const int a = static_cast<int>(rng.uniform_int(8));
    int b = static_cast<int>(rng.uniform_int(8));
    if (a == b) b = (b + 1) % 8;
    input.push_back(raw("D" + std::to_string(a), "D" + std::to_string(b),
                        "C" + std::to_string(rng.uniform_int(4)),
                        std::to_string(rng.uniform(-30.0, 30.0))));
  }
  const auto first = preprocess(input);
  std::vector<RawScoreRecord> again;
  for (const auto& t : first) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", t.score);
    again.push_back(raw(t.drug_a, t.drug_b, t.cell_line, buf));
  }
  const auto second = preprocess(again);
  REQUIRE(second.size() == first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(second[i].drug_a == first[i].drug_a);
    CHECK(second[i].drug_b == first[i].drug_b);
    CHECK(second[i].cell_line == first[i].cell_line);
    CHECK(second[i].label == first[i].label);
    CHECK(second[i].score == first[i].score);
  }
}

TEST_CASE("swapping pair order in half the rows changes nothing") {
  Rng rng(23);
  std::vector<RawScoreRecord> canonical, swapped;
  for (int i = 0; i < 120; ++i) {
    const std::string a = "D" + std::to_string(i % 7);
    const std::string b = "E" + std::to_string(i % 5);
    const std::string c = "C" + std::to_string(i % 3);
    const std::string s = std::to_string(rng.uniform(-25.0, 25.0));
    canonical.push_back(raw(a, b, c, s));
    swapped.push_back(i % 2 == 0 ? raw(b, a, c, s) : raw(a, b, c, s));
  }
  const auto x = preprocess(canonical);
  const auto y = preprocess(swapped);
  REQUIRE(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(x[i].drug_a == y[i].drug_a);
    CHECK(x[i].score == y[i].score);
    CHECK(x[i].label == y[i].label);
  }
}

TEST_CASE("bundle round trip with integrity checking") {
  const std::string dir = mdsyn::testing::temp_dir("bundle_roundtrip");
  mdsyn::testing::ToyBundleSpec spec;
  spec.genes = 12;
  spec.drugs = 5;
  spec.cells = 4;
  spec.triplets = 20;
  mdsyn::testing::write_toy_bundle(dir, spec);

  LoadSummary summary;
  const DatasetBundle bundle = load_bundle(dir, Strictness::strict, &summary);
  CHECK(bundle.triplets.size() == 20);
  CHECK(bundle.genes.size() == 12);
  CHECK(bundle.smiles.size() == 5);
  CHECK(bundle.expression.size() == 4);
  CHECK(bundle.ppi.genes.size() == 12);
  CHECK(summary.dropped_triplets == 0);

  SUBCASE("unknown drug aborts strict load naming the drug") {
    std::ofstream app(fs::path(dir) / "triplets.csv", std::ios::app);
    app << "GHOST,D01,CL00,12.0,1\n";
    app.close();
    try {
      load_bundle(dir, Strictness::strict);
      FAIL("expected IntegrityError");
    } catch (const IntegrityError& e) {
      CHECK(std::string(e.what()).find("GHOST") != std::string::npos);
    }
    LoadSummary lenient;
    const DatasetBundle b2 = load_bundle(dir, Strictness::lenient, &lenient);
    CHECK(lenient.dropped_triplets == 1);
    CHECK(b2.triplets.size() == 20);
  }

  SUBCASE("short expression row reports the expected width") {
    // rewrite one expression row with a missing value
    const fs::path path = fs::path(dir) / "expression.tsv";
    std::ifstream in(path);
    std::string line, content;
    std::getline(in, line);
    content = line + "\n";
    std::getline(in, line);
    content += line.substr(0, line.rfind('\t')) + "\n";
    while (std::getline(in, line)) content += line + "\n";
    in.close();
    std::ofstream out(path);
    out << content;
    out.close();
    try {
      load_bundle(dir, Strictness::strict);
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("expected 12") != std::string::npos);
      CHECK(msg.find("got 11") != std::string::npos);
    }
  }

  SUBCASE("ppi edges outside the manifest are dropped with a count") {
    std::ofstream app(fs::path(dir) / "ppi_edges.tsv", std::ios::app);
    app << "NOT_A_GENE\tG0001\n";
    app.close();
    LoadSummary s2;
    load_bundle(dir, Strictness::strict, &s2);
    CHECK(s2.ppi_dropped_edges == 1);
  }
}

TEST_CASE("missing bundle files raise FileError") {
  const std::string dir = mdsyn::testing::temp_dir("bundle_missing");
  CHECK_THROWS_AS(load_bundle(dir, Strictness::strict), FileError);
}

TEST_CASE("embedding tsv round trips bit-exactly") {
  const std::string dir = mdsyn::testing::temp_dir("emb_roundtrip");
  Rng rng(3);
  Tensor emb(7, 16);
  for (std::size_t i = 0; i < emb.size(); ++i) emb[i] = rng.normal() * 1e3;
  std::vector<std::string> keys;
  for (int i = 0; i < 7; ++i) keys.push_back("K" + std::to_string(i));
  const std::string path = dir + "/emb.tsv";
  write_embedding_tsv(path, keys, emb);
  const Tensor back = read_embedding_tsv(path, keys, 16);
  CHECK(back.values() == emb.values());
}

}  // TEST_SUITE
