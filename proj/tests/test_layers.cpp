#include <doctest.h>

#include <cmath>
#include <map>

#include "amlgnn/error.hpp"
#include "amlgnn/model.hpp"
#include "helpers.hpp"
#include "scratch.hpp"

using namespace amlgnn;
using namespace amlgnn::ad;
using testing::gradient_error;
using testing::make_graph;

namespace {

void fill(Tensor t, std::vector<double> v) { std::copy(v.begin(), v.end(), t.value().begin()); }

std::vector<double> values(const Tensor& t) { return {t.value().begin(), t.value().end()}; }

}  // namespace

TEST_CASE("gcn hand examples") {
  SUBCASE("isolated node passes its input through") {
    const auto g = make_graph(1, {}, {}, {}, 2, {0.7, -1.3});
    const auto ops = GraphOperators::build(g);
    auto p = make_gcn(2, 2);
    fill(p.weight, {1, 0, 0, 1});
    Tape t;
    auto out = gcn_forward(t, p, ops.gcn, Tensor::from(1, 2, g.features));
    CHECK(values(out) == std::vector<double>{0.7, -1.3});
  }
  SUBCASE("single edge averages with symmetric normalisation") {
    const auto g = make_graph(2, {{0, 1}}, {}, {}, 1, {1.0, 3.0});
    const auto ops = GraphOperators::build(g);
    for (double c : ops.gcn.coefficients()) CHECK(c == doctest::Approx(0.5));
    auto p = make_gcn(1, 1);
    fill(p.weight, {1.0});
    Tape t;
    auto out = gcn_forward(t, p, ops.gcn, Tensor::from(2, 1, g.features));
    CHECK(out.value()[0] == doctest::Approx(2.0));
    CHECK(out.value()[1] == doctest::Approx(2.0));
  }
}

TEST_CASE("gat hand examples") {
  SUBCASE("isolated node attends to itself") {
    const auto g = make_graph(1, {}, {}, {}, 1, {2.0});
    const auto ops = GraphOperators::build(g);
    auto p = make_gat(1, 1, 1, false);
    fill(p.heads[0].weight, {3.0});
    fill(p.heads[0].att_src, {0.4});
    fill(p.heads[0].att_dst, {-0.9});
    fill(p.bias, {0.5});
    Tape t;
    auto out = gat_forward(t, p, ops.self_loops, Tensor::from(1, 1, g.features));
    CHECK(out.value()[0] == doctest::Approx(6.5));
  }
  SUBCASE("zero attention vectors give the neighborhood mean") {
    Rng rng(4);
    const auto g = testing::random_graph(7, 0.4, 3, rng);
    const auto ops = GraphOperators::build(g);
    auto p = make_gat(3, 2, 1, false);
    fill(p.heads[0].weight, testing::random_values(6, rng));
    fill(p.bias, {0.1, -0.2});
    Tape t;
    auto h = Tensor::from(7, 3, g.features);
    auto out = gat_forward(t, p, ops.self_loops, h);
    auto z = t.matmul(h, p.heads[0].weight);
    for (std::size_t i = 0; i < 7; ++i) {
      for (std::size_t c = 0; c < 2; ++c) {
        double s = z.at(i, c);
        for (auto j : g.neighbors(i)) s += z.at(static_cast<std::size_t>(j), c);
        const double expect = s / static_cast<double>(g.degree(i) + 1) + p.bias.value()[c];
        CHECK(out.at(i, c) == doctest::Approx(expect).epsilon(1e-12));
      }
    }
  }
  SUBCASE("3-node star matches the scalar oracle") {
    const auto g = make_graph(3, {{0, 1}, {0, 2}}, {}, {}, 1, {1.0, 2.0, 3.0});
    const auto ops = GraphOperators::build(g);
    auto p = make_gat(1, 1, 1, false);
    fill(p.heads[0].weight, {2.0});
    fill(p.heads[0].att_src, {0.5});
    fill(p.heads[0].att_dst, {-1.0});
    Tape t;
    auto out = gat_forward(t, p, ops.self_loops, Tensor::from(3, 1, g.features));
    const double expect[] = {3.480412999279474, 2.802624679775096, 2.6719264594643017};
    for (int i = 0; i < 3; ++i) CHECK(std::abs(out.value()[i] - expect[i]) < 1e-10);
  }
}

TEST_CASE("sage hand examples") {
  const auto g = make_graph(3, {{0, 1}, {1, 2}}, {}, {}, 1, {1.0, 5.0, 3.0});
  const auto ops = GraphOperators::build(g);
  auto p = make_sage(1, 1);
  fill(p.w_neigh, {1.0});
  Tape t;
  const auto h = Tensor::from(3, 1, g.features);
  CHECK(values(sage_forward(t, p, ops, h, Aggregator::Mean)) == std::vector<double>{5, 2, 5});
  CHECK(values(sage_forward(t, p, ops, h, Aggregator::Max)) == std::vector<double>{5, 3, 5});

  const auto iso = make_graph(1, {}, {}, {}, 1, {4.0});
  auto q = make_sage(1, 1);
  fill(q.w_self, {0.5});
  fill(q.w_neigh, {9.0});
  fill(q.bias, {1.0});
  const auto iso_ops = GraphOperators::build(iso);
  for (auto agg : {Aggregator::Mean, Aggregator::Max}) {
    CHECK(sage_forward(t, q, iso_ops, Tensor::from(1, 1, {4.0}), agg).item() == 3.0);
  }
  CHECK(parse_aggregator("max") == Aggregator::Max);
  CHECK_THROWS_AS(parse_aggregator("sum"), Error);
}

TEST_CASE("graphnorm") {
  const std::vector<double> input{0.3, -1.2, 2.0, 1.1, 0.4, -0.5, -0.7, 2.2, 0.9, 0.05, -0.3, 1.7, 1.9, 0.8, -1.1};
  SUBCASE("normalisation identity") {
    // Output variance is v / (v + eps); columns with v >= 10 keep it within 1e-6.
    std::vector<double> wide(input);
    for (auto& v : wide) v *= 10.0;
    auto p = make_graphnorm(3);
    Tape t;
    auto out = graphnorm_forward(t, p, Tensor::from(5, 3, wide));
    for (std::size_t c = 0; c < 3; ++c) {
      double m = 0, v = 0;
      for (std::size_t i = 0; i < 5; ++i) m += out.at(i, c) / 5;
      for (std::size_t i = 0; i < 5; ++i) v += (out.at(i, c) - m) * (out.at(i, c) - m) / 5;
      CHECK(std::abs(m) < 1e-10);
      CHECK(std::abs(v - 1.0) < 1e-6);
    }
  }
  SUBCASE("constant column collapses to beta") {
    auto p = make_graphnorm(1);
    fill(p.beta, {0.75});
    Tape t;
    auto out = graphnorm_forward(t, p, Tensor::from(4, 1, {2.5, 2.5, 2.5, 2.5}));
    for (double v : out.value()) CHECK(v == 0.75);
  }
  SUBCASE("scalar oracle and parameter gradients") {
    auto p = make_graphnorm(3);
    fill(p.alpha, {0.5, 0.5, 0.5});
    fill(p.gamma, {2.0, 2.0, 2.0});
    fill(p.beta, {1.0, 1.0, 1.0});
    const double expect[] = {1.0750549950601493, -1.4144628625752587, 3.7204265963380814, 2.790597739292136,
                             1.3647749648494996, -0.2802007512179203, -1.0693734352298336, 4.491417520702353,
                             1.9601505634134404, 0.5389478874876537,  0.14885841535116784, 3.240351314631361,
                             4.506140483524122,  2.059584421705689,   -1.240351314631361};
    Tape t;
    auto out = graphnorm_forward(t, p, Tensor::from(5, 3, input));
    for (std::size_t i = 0; i < 15; ++i) CHECK(std::abs(out.value()[i] - expect[i]) < 1e-12);

    auto h = Tensor::parameter(5, 3, input);
    auto loss = [&](Tape& tp) {
      auto y = graphnorm_forward(tp, p, h);
      return tp.sum(tp.mul(y, y));
    };
    CHECK(gradient_error(loss, {p.alpha, p.gamma, p.beta}) < 1e-6);
    CHECK(gradient_error(loss, {h}) < 1e-6);
  }
}

TEST_CASE("initialisation laws") {
  Rng rng(99);
  const auto x = xavier_uniform(100, 200, 1.0, rng);
  const double bound = 0.1414213562373095;
  for (double v : x) CHECK_FALSE(std::abs(v) > bound);
  for (double v : xavier_uniform(10, 10, 0.0, rng)) CHECK(v == 0.0);

  const auto big = xavier_uniform(500, 500, 1.0, rng);
  double s2 = 0;
  for (double v : big) s2 += v * v;
  CHECK(std::abs(s2 / big.size() / 0.002 - 1.0) < 0.05);

  const auto kai = kaiming_uniform(3, 1000, rng);
  for (double v : kai) CHECK_FALSE(std::abs(v) > 1.4142135623730951);

  auto sage = make_sage(100, 8);
  Rng r1(5), r2(5);
  reset_default(sage, r1);
  for (double v : sage.w_self.value()) CHECK_FALSE(std::abs(v) > 0.1);
  auto again = make_sage(100, 8);
  reset_default(again, r2);
  CHECK(values(sage.w_self) == values(again.w_self));
  CHECK(values(sage.w_neigh) == values(again.w_neigh));

  auto gn = make_graphnorm(4);
  fill(gn.gamma, {3, 3, 3, 3});
  reset_default(gn);
  for (double v : gn.gamma.value()) CHECK(v == 1.0);
  for (double v : gn.beta.value()) CHECK(v == 0.0);
  for (double v : gn.alpha.value()) CHECK(v == 1.0);
}

TEST_CASE("build_model shapes") {
  auto shape_of = [](const Model& m) {
    std::map<std::string, std::pair<std::size_t, std::size_t>> s;
    for (const auto& np : m.named_parameters()) s[np.name] = {np.tensor.rows(), np.tensor.cols()};
    return s;
  };
  auto gcn_cfg = ModelConfig::optimum(LayerType::Gcn);
  gcn_cfg.norm = NormKind::None;
  const auto gcn = shape_of(build_model(gcn_cfg, 166));
  CHECK(gcn.at("gnn.0.weight") == std::pair<std::size_t, std::size_t>{166, 211});
  CHECK(gcn.at("gnn.1.weight") == std::pair<std::size_t, std::size_t>{211, 211});
  CHECK(gcn.at("embedding.weight") == std::pair<std::size_t, std::size_t>{211, 90});
  CHECK(gcn.at("head.weight") == std::pair<std::size_t, std::size_t>{90, 2});
  CHECK(gcn.at("head.bias") == std::pair<std::size_t, std::size_t>{1, 2});
  CHECK(gcn.size() == 8);

  const auto sage = shape_of(build_model(ModelConfig::optimum(LayerType::Sage), 166));
  CHECK(sage.at("gnn.0.w_self") == std::pair<std::size_t, std::size_t>{166, 140});
  CHECK(sage.at("gnn.0.w_neigh") == std::pair<std::size_t, std::size_t>{166, 140});
  CHECK(sage.at("gnn.1.w_self") == std::pair<std::size_t, std::size_t>{140, 140});
  CHECK(sage.at("embedding.weight") == std::pair<std::size_t, std::size_t>{140, 103});
  CHECK(sage.count("norm.1.gamma") == 1);

  auto one = ModelConfig::optimum(LayerType::Gat);
  one.num_layers = 1;
  const auto m1 = build_model(one, 10);
  CHECK(m1.blocks().size() == 1);
  CHECK(m1.embedding().weight.rows() == 148);

  auto two_heads = ModelConfig::optimum(LayerType::Gat);
  two_heads.gat_heads = 2;
  const auto gat2 = shape_of(build_model(two_heads, 10));
  CHECK(gat2.at("gnn.0.bias") == std::pair<std::size_t, std::size_t>{1, 296});  // concatenated
  CHECK(gat2.at("gnn.1.head1.weight") == std::pair<std::size_t, std::size_t>{296, 148});
  CHECK(gat2.at("gnn.1.bias") == std::pair<std::size_t, std::size_t>{1, 148});  // averaged

  auto bad = ModelConfig::optimum(LayerType::Gcn);
  bad.hidden_dim = 300;
  CHECK_THROWS_AS(build_model(bad, 10), Error);
  CHECK_NOTHROW(build_model(bad, 10, false));
  bad.num_layers = 0;
  CHECK_THROWS_AS(build_model(bad, 10, false), Error);
}

TEST_CASE("init schemes select the documented laws") {
  auto cfg = ModelConfig::optimum(LayerType::Sage);
  cfg.hidden_dim = 200;
  cfg.embedding_dim = 100;
  const auto max_abs = [](const Tensor& t) {
    double m = 0;
    for (double v : t.value()) m = std::max(m, std::abs(v));
    return m;
  };
  cfg.init = InitScheme::Default;
  const auto d = build_model(cfg, 50);
  CHECK(max_abs(d.blocks()[0].sage->w_self) <= 1.0 / std::sqrt(50.0));
  CHECK(max_abs(d.head().weight) <= 1.0 / std::sqrt(100.0));
  for (double v : d.head().bias.value()) CHECK(v == 0.0);
  cfg.init = InitScheme::Xavier;
  const auto x = build_model(cfg, 50);
  CHECK(max_abs(x.blocks()[0].sage->w_self) <= std::sqrt(6.0 / 250.0));
  CHECK(max_abs(x.blocks()[0].sage->w_self) > 1.0 / std::sqrt(50.0) * 1.05);
  CHECK(max_abs(x.head().weight) <= std::sqrt(6.0 / 102.0));
  cfg.init = InitScheme::XavierHeadOnly;
  const auto h = build_model(cfg, 50);
  CHECK(values(h.blocks()[0].sage->w_self) == values(d.blocks()[0].sage->w_self));
  CHECK(max_abs(h.head().weight) > 1.0 / std::sqrt(100.0));
}

TEST_CASE("model forward is deterministic and deep_copy detaches") {
  Rng rng(8);
  const auto g = testing::random_graph(12, 0.3, 5, rng);
  const auto ops = GraphOperators::build(g);
  auto cfg = ModelConfig::optimum(LayerType::Gcn);
  const auto m = build_model(cfg, 5);
  const auto x = Tensor::from(12, 5, g.features);
  Tape t1, t2;
  CHECK(values(m.forward(t1, ops, x, true, Rng(1))) == values(m.forward(t2, ops, x, true, Rng(1))));
  auto copy = m.deep_copy();
  copy.parameters()[0].value()[0] += 1.0;
  CHECK(copy.parameters()[0].value()[0] != m.parameters()[0].value()[0]);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  testing::ScratchDir dir("ckpt");
  auto cfg = ModelConfig::optimum(LayerType::Gat);
  cfg.gat_heads = 2;
  const auto m = build_model(cfg, 7);
  AdamState st;
  st.init(m.parameters());
  st.step = 3;
  st.m[0][0] = 0.125;
  st.v[1][0] = 1e-300;
  save_checkpoint(dir.path / "m.ckpt", m, &st, 3);
  const auto back = load_checkpoint(dir.path / "m.ckpt");
  CHECK(back.model.config() == cfg);
  CHECK(back.epochs_completed == 3);
  REQUIRE(back.optimizer.has_value());
  CHECK(*back.optimizer == st);
  const auto a = m.named_parameters(), b = back.model.named_parameters();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    CHECK(values(a[i].tensor) == values(b[i].tensor));
  }
  save_checkpoint(dir.path / "m2.ckpt", back.model, &*back.optimizer, 3);
  CHECK(testing::slurp(dir.path / "m.ckpt") == testing::slurp(dir.path / "m2.ckpt"));

  auto bytes = testing::slurp(dir.path / "m.ckpt");
  dir.write("bad.ckpt", bytes.substr(0, 20));
  CHECK_THROWS_AS(load_checkpoint(dir.path / "bad.ckpt"), Error);
}
