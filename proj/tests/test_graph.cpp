#include <doctest.h>

#include <cmath>

#include "amlgnn/error.hpp"
#include "amlgnn/graph.hpp"
#include "helpers.hpp"
#include "scratch.hpp"

using namespace amlgnn;
using testing::make_graph;
using testing::ScratchDir;

namespace {

// Five transactions a..e with ids 10..14; c is step 2, d and e step 3.
const char* kFeatures =
    "10,1,0.1,0.2\n"
    "11,1,0.3,0.4\n"
    "12,2,0.5,0.6\n"
    "13,3,0.7,0.8\n"
    "14,3,0.9,1.0\n";
const char* kClasses =
    "txId,class\n"
    "10,1\n"
    "11,2\n"
    "12,unknown\n"
    "13,unknown\n"
    "14,2\n";
const char* kEdges =
    "txId1,txId2\n"
    "10,11\n"
    "11,10\n"
    "11,12\n"
    "12,12\n";

std::vector<std::int32_t> nbrs(const TransactionGraph& g, std::size_t i) {
  auto s = g.neighbors(i);
  return {s.begin(), s.end()};
}

}  // namespace

TEST_CASE("toy CSVs: symmetrise, dedup and drop self-loops") {
  ScratchDir dir("graph_toy");
  std::vector<std::string> warnings;
  const auto g = load_elliptic(dir.write("f.csv", kFeatures), dir.write("c.csv", kClasses),
                               dir.write("e.csv", kEdges), &warnings);
  CHECK(g.num_nodes == 5);
  CHECK(g.feat_dim == 2);
  CHECK(g.num_steps == 3);
  CHECK(g.input_edges == 4);
  CHECK(g.num_undirected_edges() == 2);
  CHECK(nbrs(g, 0) == std::vector<std::int32_t>{1});
  CHECK(nbrs(g, 1) == std::vector<std::int32_t>{0, 2});
  CHECK(nbrs(g, 2) == std::vector<std::int32_t>{1});
  CHECK(g.degree(3) == 0);
  CHECK(g.labels == std::vector<std::uint8_t>{0, 1, 2, 2, 1});
  CHECK(g.time_steps == std::vector<std::int32_t>{1, 1, 2, 3, 3});
  CHECK(g.feature_row(4)[1] == doctest::Approx(1.0));
  CHECK(g.cross_step_edges == 1);
  CHECK_FALSE(warnings.empty());  // arity 2 != 166, and a cross-step edge
  g.validate();
}

TEST_CASE("loader is insensitive to row order") {
  ScratchDir dir("graph_order");
  const auto a = load_elliptic(dir.write("f.csv", kFeatures), dir.write("c.csv", kClasses),
                               dir.write("e.csv", kEdges));
  const auto b = load_elliptic(
      dir.write("f2.csv", "14,3,0.9,1.0\n12,2,0.5,0.6\n10,1,0.1,0.2\n13,3,0.7,0.8\n11,1,0.3,0.4\n"),
      dir.write("c2.csv", "txId,class\n13,unknown\n14,2\n10,1\n12,unknown\n11,2\n"),
      dir.write("e2.csv", "txId1,txId2\n12,12\n11,12\n11,10\n10,11\n"));
  CHECK(a == b);
}

TEST_CASE("loader errors") {
  ScratchDir dir("graph_err");
  const auto f = dir.write("f.csv", kFeatures);
  const auto c = dir.write("c.csv", kClasses);
  const auto e = dir.write("e.csv", kEdges);

  auto kind_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& err) {
      return err.kind();
    }
    FAIL("no error");
    return ErrorKind::NonFinite;
  };
  CHECK(kind_of([&] { load_elliptic(f, c, dir.write("bad_e.csv", "10,99\n")); }) == ErrorKind::UnknownTxId);
  CHECK(kind_of([&] { load_elliptic(f, dir.write("bad_c.csv", "10,7\n"), e); }) == ErrorKind::MalformedCsv);
  CHECK(kind_of([&] { load_elliptic(dir.write("ragged.csv", "10,1,0.1\n11,1,0.1,0.2\n"), c, e); }) ==
        ErrorKind::MalformedCsv);
  CHECK(kind_of([&] { load_elliptic(dir.write("dup.csv", "10,1,0.1\n10,1,0.2\n"), c, e); }) ==
        ErrorKind::MalformedCsv);
  CHECK(kind_of([&] { load_elliptic(dir.write("empty.csv", ""), c, e); }) == ErrorKind::EmptyGraph);
  CHECK(kind_of([&] { load_elliptic(dir.write("nan.csv", "10,1,abc\n"), c, e); }) == ErrorKind::MalformedCsv);
}

TEST_CASE("single node with empty edge list") {
  ScratchDir dir("graph_one");
  const auto g = load_elliptic(dir.write("f.csv", "5,1,0.5\n"), dir.write("c.csv", "txId,class\n5,1\n"),
                               dir.write("e.csv", "txId1,txId2\n"));
  CHECK(g.num_nodes == 1);
  CHECK(g.num_edge_slots() == 0);
  CHECK(g.degree(0) == 0);
}

TEST_CASE("temporal split") {
  SUBCASE("hand-applied mask rules") {
    const auto g = make_graph(5, {}, {0, 1, 2, 2, 1}, {1, 1, 2, 3, 3});
    const auto s = temporal_split(g, 1, 1, 1);
    CHECK(TemporalSplit::indices(s.train_mask) == std::vector<std::int32_t>{0, 1});
    CHECK(TemporalSplit::indices(s.val_mask).empty());
    CHECK(TemporalSplit::indices(s.test_mask) == std::vector<std::int32_t>{4});
    CHECK(s.test_steps.first == 3);
    CHECK(s.test_steps.last == 3);
  }
  SUBCASE("one step per part when all labeled") {
    const auto g = make_graph(6, {}, {0, 1, 1, 0, 1, 1}, {1, 2, 3, 1, 2, 3});
    const auto s = temporal_split(g, 1, 1, 1);
    CHECK(TemporalSplit::indices(s.train_mask) == std::vector<std::int32_t>{0, 3});
    CHECK(TemporalSplit::indices(s.val_mask) == std::vector<std::int32_t>{1, 4});
    CHECK(TemporalSplit::indices(s.test_mask) == std::vector<std::int32_t>{2, 5});
  }
  SUBCASE("bad partitions") {
    const auto g = make_graph(3, {}, {0, 1, 1}, {1, 2, 3});
    CHECK_THROWS_AS(temporal_split(g, 1, 1, 2), Error);
    CHECK_THROWS_AS(temporal_split(g, 0, 2, 1), Error);
    CHECK_THROWS_AS(temporal_split(g, 2, 2, -1), Error);
    try {
      temporal_split(g, 2, 2, -1);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::BadPartition);
    }
  }
  SUBCASE("default partition") {
    CHECK(default_partition(49) == std::array<int, 3>{29, 10, 10});
    for (int t = 3; t < 80; ++t) {
      const auto p = default_partition(t);
      CHECK(p[0] + p[1] + p[2] == t);
      CHECK(p[0] >= 1);
      CHECK(p[1] >= 1);
      CHECK(p[2] >= 1);
    }
  }
}

TEST_CASE("synthetic generator") {
  SynthParams p;  // seed 42, 500 nodes, 10 steps, 0.02, 0.77, 16, 0.8
  const auto g = synth_graph(p);
  const auto s = graph_stats(g);
  CHECK(s.label_counts[0] == 10);
  CHECK(s.label_counts[2] == 385);
  CHECK(s.label_counts[1] == 105);
  CHECK(g.num_steps == 10);
  CHECK(g.feat_dim == 16);
  CHECK(s.cross_step_edges == 0);
  g.validate();

  SynthParams q;
  q.seed = 7;
  CHECK(synth_graph(q) == synth_graph(q));
  CHECK_FALSE(synth_graph(q) == g);

  SynthParams clean;
  clean.illicit_frac = 0.0;
  clean.unknown_frac = 0.0;
  const auto all_licit = synth_graph(clean);
  for (auto l : all_licit.labels) CHECK(l == 1);

  SynthParams bad;
  bad.illicit_frac = 0.5;
  bad.unknown_frac = 0.6;
  CHECK_THROWS_AS(synth_graph(bad), Error);
}

TEST_CASE("graph stats") {
  const auto path = make_graph(3, {{0, 1}, {1, 2}});
  const auto s = graph_stats(path);
  CHECK(s.degree_max == 2);
  CHECK(s.degree_min == 1);
  CHECK(s.homophily == doctest::Approx(1.0));

  const auto mixed = make_graph(3, {{0, 1}, {1, 2}}, {0, 1, 1});
  CHECK(graph_stats(mixed).homophily == doctest::Approx(0.5));

  const auto unlabeled = make_graph(2, {{0, 1}}, {2, 2});
  CHECK(std::isnan(graph_stats(unlabeled).homophily));
}

TEST_CASE("binary cache round trip and corruption") {
  ScratchDir dir("graph_cache");
  const auto g = synth_graph(SynthParams{});
  save_graph(g, dir.path / "g.bin");
  CHECK(load_graph(dir.path / "g.bin") == g);

  auto bytes = testing::slurp(dir.path / "g.bin");
  dir.write("trunc.bin", bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(load_graph(dir.path / "trunc.bin"), Error);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  dir.write("magic.bin", bad_magic);
  CHECK_THROWS_AS(load_graph(dir.path / "magic.bin"), Error);
  auto bad_version = bytes;
  bad_version[8] = 99;
  dir.write("version.bin", bad_version);
  CHECK_THROWS_AS(load_graph(dir.path / "version.bin"), Error);
}
