#include <doctest.h>

#include <cmath>
#include <sstream>

#include "amlgnn/config.hpp"
#include "amlgnn/error.hpp"
#include "amlgnn/optim.hpp"
#include "amlgnn/trainer.hpp"
#include "helpers.hpp"
#include "scratch.hpp"

using namespace amlgnn;
using namespace amlgnn::ad;

namespace {

TransactionGraph small_synth(std::size_t n = 200, std::uint64_t seed = 3) {
  SynthParams p;
  p.seed = seed;
  p.n_nodes = n;
  p.n_steps = 6;
  p.illicit_frac = 0.15;
  p.unknown_frac = 0.2;
  p.feat_dim = 8;
  p.class_separation = 3.0;
  return synth_graph(p);
}

ModelConfig small_model(LayerType type) {
  auto c = ModelConfig::optimum(type);
  c.hidden_dim = 16;
  c.embedding_dim = 8;
  c.dropout = 0.1;
  return c;
}

TrainConfig small_train(int epochs) {
  TrainConfig t;
  t.learning_rate = 0.01;
  t.epochs = epochs;
  t.split = std::array<int, 3>{4, 1, 1};
  t.record_wall_time = false;
  return t;
}

}  // namespace

TEST_CASE("class weights") {
  std::vector<std::uint8_t> labels(100, 1);
  for (int i = 0; i < 10; ++i) labels[i] = 0;
  const std::vector<bool> all(100, true);
  const auto w = class_weights(labels, all, ClassWeightMode::InverseFrequency);
  CHECK(w[0] == doctest::Approx(5.0));
  CHECK(w[1] == doctest::Approx(0.5555555555555556));

  std::vector<std::uint8_t> half(10, 1);
  for (int i = 0; i < 5; ++i) half[i] = 0;
  const auto b = class_weights(half, std::vector<bool>(10, true), ClassWeightMode::InverseFrequency);
  CHECK(b[0] == 1.0);
  CHECK(b[1] == 1.0);
  const auto m = class_weights(half, std::vector<bool>(10, true), ClassWeightMode::Manual, {3.0, 1.0});
  CHECK(m[0] == 3.0);
  CHECK(m[1] == 1.0);

  std::vector<std::uint8_t> one_class(4, 1);
  CHECK_THROWS_AS(class_weights(one_class, std::vector<bool>(4, true), ClassWeightMode::InverseFrequency),
                  Error);
}

TEST_CASE("weighted cross-entropy") {
  const std::vector<bool> mask(3, true);
  SUBCASE("scalar oracle") {
    Tape t;
    auto logits = Tensor::from(3, 2, {1.0, 0.0, 0.5, 2.0, -1.0, 0.3});
    const std::vector<std::uint8_t> labels{0, 1, 1};
    CHECK(std::abs(weighted_ce_loss(t, logits, labels, mask, {2.0, 1.0}).item() - 0.26723627671304756) < 1e-12);
  }
  SUBCASE("uniform logits give ln 2") {
    Tape t;
    const std::vector<std::uint8_t> labels{0, 1, 0};
    CHECK(weighted_ce_loss(t, Tensor::zeros(3, 2), labels, mask, {1.0, 1.0}).item() ==
          doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }
  SUBCASE("saturated logits") {
    Tape t;
    const std::vector<std::uint8_t> labels{0, 1, 1};
    auto logits = Tensor::from(3, 2, {20, -20, -20, 20, -20, 20});
    CHECK(weighted_ce_loss(t, logits, labels, mask, {1.0, 1.0}).item() < 1e-8);
  }
  SUBCASE("unlabeled nodes in the mask are rejected") {
    Tape t;
    const std::vector<std::uint8_t> labels{0, 2, 1};
    CHECK_THROWS_AS(weighted_ce_loss(t, Tensor::zeros(3, 2), labels, mask, {1, 1}), Error);
  }
  SUBCASE("gradient") {
    Rng rng(4);
    auto logits = Tensor::parameter(3, 2, testing::random_values(6, rng));
    const std::vector<std::uint8_t> labels{0, 1, 1};
    CHECK(testing::gradient_error(
              [&](Tape& t) { return weighted_ce_loss(t, logits, labels, mask, {2.0, 0.7}); }, {logits}) <
          1e-6);
  }
}

TEST_CASE("adam") {
  SUBCASE("first step moves by about lr") {
    std::vector<double> p{1.0}, g{1.0}, m{0.0}, v{0.0};
    adam_update(p, g, m, v, 1, 0.1, 0.0);
    CHECK(std::abs(p[0] - 0.900000001) < 1e-15);
  }
  SUBCASE("zero gradient leaves the parameter") {
    std::vector<double> p{0.3}, g{0.0}, m{0.0}, v{0.0};
    adam_update(p, g, m, v, 1, 0.1, 0.0);
    CHECK(p[0] == 0.3);
  }
  SUBCASE("two steps with weight decay match the scalar reference") {
    auto w = Tensor::parameter(1, 1, {0.5});
    std::vector<Tensor> params{w};
    AdamState st;
    for (int k = 0; k < 2; ++k) {
      w.grad()[0] = 0.3;
      adam_step(params, st, 0.01, 0.1);
    }
    CHECK(st.step == 2);
    CHECK(std::abs(w.value()[0] - 0.480000756603555) < 1e-15);
  }
}

TEST_CASE("training") {
  const auto g = small_synth();
  const auto tc = small_train(40);
  const auto split = split_for(g, tc);

  SUBCASE("zero epochs returns the initial model and an empty log") {
    auto zero = tc;
    zero.epochs = 0;
    const auto r = train(g, split, small_model(LayerType::Gcn), zero, false);
    CHECK(r.log.records.empty());
    const auto init = build_model(small_model(LayerType::Gcn), g.feat_dim, false);
    for (std::size_t i = 0; i < init.parameters().size(); ++i) {
      const auto a = init.parameters()[i].value(), b = r.final_model.parameters()[i].value();
      CHECK(std::equal(a.begin(), a.end(), b.begin()));
    }
  }
  SUBCASE("identical runs give identical logs") {
    const auto a = train(g, split, small_model(LayerType::Sage), tc, false);
    const auto b = train(g, split, small_model(LayerType::Sage), tc, false);
    CHECK(a.log.to_csv() == b.log.to_csv());
    auto other = tc;
    other.seed = 43;
    auto other_model = small_model(LayerType::Sage);
    other_model.seed = 43;
    CHECK(train(g, split, other_model, other, false).log.to_csv() != a.log.to_csv());
  }
  SUBCASE("log format") {
    auto every = tc;
    every.eval_every = 5;
    every.epochs = 7;
    const auto csv = train(g, split, small_model(LayerType::Gcn), every, false).log.to_csv();
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "epoch,train_loss,val_auprc,val_auc,wall_ms");
    std::getline(in, line);
    CHECK(line.find(",,,0.000") != std::string::npos);  // epoch 1: no evaluation
  }
  SUBCASE("resume from checkpoint equals an uninterrupted run") {
    testing::ScratchDir dir("resume");
    const auto full = train(g, split, small_model(LayerType::Gat), tc, false);
    Trainer first(g, SupervisionMasks::from(split), small_model(LayerType::Gat), tc, false);
    first.run(15);
    save_checkpoint(dir.path / "mid.ckpt", first.model(), &first.optimizer(), first.epochs_completed());
    Trainer second(g, SupervisionMasks::from(split), small_model(LayerType::Gat), tc, false);
    second.restore(load_checkpoint(dir.path / "mid.ckpt"));
    second.run(25);
    const auto a = full.final_model.parameters();
    const auto b = second.model().parameters();
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(std::equal(a[i].value().begin(), a[i].value().end(), b[i].value().begin()));
    }
    CHECK(full.log.records.back().train_loss == second.log().records.back().train_loss);
  }
  SUBCASE("learnable synthetic task: GCN loss falls") {
    auto long_run = tc;
    long_run.epochs = 300;
    auto cfg = small_model(LayerType::Gcn);
    cfg.norm = NormKind::None;
    cfg.dropout = 0.0;
    const auto r = train(g, split, cfg, long_run, false);
    const auto& rec = r.log.records;
    CHECK(rec.back().train_loss < 0.05);
    double early = 0, late = 0;
    for (int i = 0; i < 30; ++i) {
      early += rec[i].train_loss;
      late += rec[rec.size() - 30 + i].train_loss;
    }
    CHECK(late < early);
  }
}

TEST_CASE("configuration JSON") {
  const auto m = ModelConfig::optimum(LayerType::Gat);
  CHECK(model_config_from_json(to_json(m)) == m);
  auto t = TrainConfig::optimum(LayerType::Sage);
  t.class_weight_mode = ClassWeightMode::Manual;
  t.manual_weights = {3.0, 1.0};
  t.split = std::array<int, 3>{2, 1, 1};
  CHECK(train_config_from_json(to_json(t), TrainConfig{}) == t);
  CHECK_THROWS_AS(model_config_from_json(Json{{"hidden", 3}}), Error);
  CHECK(model_config_from_json(Json{{"layer_type", "sage"}}) == ModelConfig::optimum(LayerType::Sage));

  // The tuned optima.
  CHECK(ModelConfig::optimum(LayerType::Gat).hidden_dim == 148);
  CHECK(ModelConfig::optimum(LayerType::Gcn).embedding_dim == 90);
  CHECK(ModelConfig::optimum(LayerType::Sage).dropout == 0.1135);
  CHECK(TrainConfig::optimum(LayerType::Gat).learning_rate == 6.999e-4);
  CHECK(TrainConfig::optimum(LayerType::Gcn).epochs == 497);
  CHECK(TrainConfig::optimum(LayerType::Sage).epochs == 397);
  CHECK(TrainConfig::optimum(LayerType::Sage).weight_decay == 5e-4);
}
