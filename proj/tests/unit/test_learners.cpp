#include <doctest.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "promptroute/core/rng.hpp"
#include "promptroute/learners/model.hpp"
#include "support/paths.hpp"
#include "support/stump_oracle.hpp"

using namespace promptroute;
using learners::GbdtConfig;
using learners::MlpConfig;
using learners::TrainedModel;

namespace {

struct Data {
  std::vector<std::vector<double>> X;
  std::vector<int> y;
};

// Feature 0 decides the label through a noisy threshold; the rest is noise.
Data planted(std::size_t n, std::size_t d, std::uint64_t seed, double noise = 0.0) {
  core::Rng rng(seed);
  Data data;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(d);
    for (double& v : row) v = rng.uniform(-1.0, 1.0);
    int label = row[0] > 0.1 ? 1 : 0;
    if (rng.bernoulli(noise)) label = 1 - label;
    data.X.push_back(std::move(row));
    data.y.push_back(label);
  }
  return data;
}

double log_loss(const TrainedModel& m, const Data& data) {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.X.size(); ++i) {
    const double p = learners::predict(m, data.X[i]);
    loss -= data.y[i] ? std::log(p) : std::log(1.0 - p);
  }
  return loss / static_cast<double>(data.X.size());
}

double accuracy(const TrainedModel& m, const Data& data) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < data.X.size(); ++i) hit += learners::decide(learners::predict(m, data.X[i])) == data.y[i];
  return static_cast<double>(hit) / static_cast<double>(data.X.size());
}

std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

TEST_CASE("presets echo the tuned values") {
  const auto ds = learners::gbdt_preset("ds");
  CHECK(ds.n_estimators == 424);
  CHECK(ds.max_depth == 10);
  CHECK(ds.learning_rate == 0.0287);
  CHECK(ds.subsample == 0.951);
  CHECK(ds.colsample_bytree == 0.615);
  CHECK(ds.min_child_weight == 9.51);
  CHECK(ds.l2_lambda == 1.0);
  CHECK(ds.min_gain == 0.0);
  const auto llama = learners::gbdt_preset("llama");
  CHECK(llama.n_estimators == 101);
  CHECK(llama.max_depth == 3);
  CHECK(llama.learning_rate == 0.0188);
  CHECK(llama.subsample == 0.700);
  CHECK(llama.colsample_bytree == 0.996);
  CHECK(llama.min_child_weight == 4.71);

  const auto mds = learners::mlp_preset("ds");
  CHECK(mds.hidden_layers == std::vector<int>{100, 50});
  CHECK(mds.l2_alpha == 8.94e-5);
  CHECK(mds.initial_learning_rate == 3.27e-3);
  const auto mll = learners::mlp_preset("llama");
  CHECK(mll.hidden_layers == std::vector<int>{100});
  CHECK(mll.l2_alpha == 4.19e-5);
  CHECK(mll.initial_learning_rate == 5.44e-3);

  CHECK_THROWS_AS(learners::gbdt_preset("gpt"), core::ConfigError);
  CHECK(GbdtConfig::from_json(ds.to_json()).to_json() == ds.to_json());
  CHECK(MlpConfig::from_json(mds.to_json()).to_json() == mds.to_json());
}

TEST_CASE("config and data validation") {
  GbdtConfig c;
  c.subsample = 0.0;
  CHECK_THROWS_AS(c.validate(), core::ConfigError);
  c = {};
  c.colsample_bytree = 1.5;
  CHECK_THROWS_AS(c.validate(), core::ConfigError);
  MlpConfig m;
  m.hidden_layers = {0};
  CHECK_THROWS_AS(m.validate(), core::ConfigError);

  std::vector<std::vector<double>> X{{1.0}, {2.0}, {3.0}};
  std::vector<int> same{1, 1, 1};
  CHECK_THROWS_WITH_AS(learners::train_gbdt(X, same, GbdtConfig{}), doctest::Contains("single class"),
                       core::DataError);
  std::vector<int> y{0, 1, 0};
  X[1][0] = std::nan("");
  CHECK_THROWS_AS(learners::train_gbdt(X, y, GbdtConfig{}), core::DataError);
  X[1][0] = INFINITY;
  CHECK_THROWS_AS(learners::train_mlp(X, y, MlpConfig{}), core::DataError);
}

TEST_CASE("prior-only forest predicts the class prior") {
  std::vector<std::vector<double>> X(10, std::vector<double>{0.0});
  std::vector<int> y{1, 1, 1, 1, 1, 1, 1, 0, 0, 0};
  GbdtConfig c;
  c.n_estimators = 0;
  const auto m = learners::train_gbdt(X, y, c);
  core::Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> x{rng.uniform(-100, 100)};
    CHECK(learners::predict(m, x) == doctest::Approx(0.7).epsilon(1e-12));
  }
}

TEST_CASE("depth-1 single round equals the brute-force stump") {
  core::Rng rng(2024);
  int split = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = testing::random_stump_instance(rng);
    const auto m = learners::train_gbdt(inst.X, inst.y, testing::stump_config(inst));
    const auto oracle = testing::brute_force_stump(inst);
    CAPTURE(trial);
    CHECK(testing::stump_matches(m, oracle));
    split += oracle.feature.has_value();
  }
  CHECK(split > 100);  // the oracle really is choosing splits
}

TEST_CASE("1-D separable data splits at the separating midpoint") {
  std::vector<std::vector<double>> X{{0.1}, {0.4}, {0.3}, {0.9}, {0.7}, {1.3}};
  std::vector<int> y{0, 0, 0, 1, 1, 1};
  GbdtConfig c;
  c.n_estimators = 1;
  c.max_depth = 1;
  c.min_child_weight = 0.0;
  const auto m = learners::train_gbdt(X, y, c);
  const auto& root = m.gbdt.trees[0].nodes[0];
  CHECK(root.feature == 0);
  CHECK(root.threshold == 0.55);
}

TEST_CASE("hand-built monotone stump") {
  TrainedModel m;
  m.kind = learners::ModelKind::gbdt;
  m.feature_names = {"x"};
  m.gbdt.base_score = 0.0;
  learners::Tree t;
  t.nodes = {{0, 0.5, 1, 2, 0.0, 1.0, 1.0}, {-1, 0, -1, -1, -0.8, 0, 0}, {-1, 0, -1, -1, 1.1, 0, 0}};
  m.gbdt.trees.push_back(t);
  const double low = learners::predict(m, std::vector<double>{0.2});
  const double high = learners::predict(m, std::vector<double>{0.9});
  CHECK(low < high);
  CHECK(low == doctest::Approx(learners::sigmoid(-0.8)));
  CHECK(learners::predict(m, std::vector<double>{0.5}) == high);  // threshold goes right
  CHECK_THROWS_AS(learners::predict(m, std::vector<double>{0.1, 0.2}), core::DataError);
}

TEST_CASE("full-batch training loss never increases") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = planted(300, 6, seed, 0.15);
    for (double lr : {0.1, 0.5, 1.0}) {
      GbdtConfig c;
      c.max_depth = 3;
      c.learning_rate = lr;
      c.min_child_weight = 0.5;
      double previous = INFINITY;
      for (int rounds = 0; rounds <= 12; ++rounds) {
        c.n_estimators = rounds;
        const double loss = log_loss(learners::train_gbdt(data.X, data.y, c), data);
        CAPTURE(seed);
        CAPTURE(lr);
        CAPTURE(rounds);
        CHECK(loss <= previous + 1e-12);
        previous = loss;
      }
    }
  }
}

TEST_CASE("gbdt learns a planted threshold and credits that feature") {
  const auto train = planted(600, 8, 3);
  const auto test = planted(400, 8, 4);
  GbdtConfig c = learners::gbdt_preset("llama");
  c.learning_rate = 0.3;
  c.seed = 9;
  const auto m = learners::train_gbdt(train.X, train.y, c);
  CHECK(accuracy(m, test) > 0.97);
  REQUIRE(m.importance.size() == 8);
  CHECK(m.importance[0] >= 0.99);
  CHECK(std::accumulate(m.importance.begin(), m.importance.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("constant feature gets zero importance") {
  auto data = planted(200, 3, 5, 0.1);
  for (auto& row : data.X) row[2] = 4.0;
  GbdtConfig c;
  c.n_estimators = 20;
  const auto m = learners::train_gbdt(data.X, data.y, c);
  CHECK(m.importance[2] == 0.0);

  MlpConfig mc;
  mc.hidden_layers = {8};
  mc.max_epochs = 30;
  const auto mlp = learners::train_mlp(data.X, data.y, mc);
  const auto imp = learners::feature_importance(mlp, data.X, data.y);
  CHECK(imp[2] == 0.0);
  CHECK(std::accumulate(imp.begin(), imp.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(imp[0] > imp[1]);
  CHECK_THROWS_AS(learners::feature_importance(mlp), core::DataError);
}

TEST_CASE("training is seed-deterministic and subsampling depends on the seed") {
  const auto data = planted(300, 10, 6, 0.2);
  GbdtConfig c = learners::gbdt_preset("ds");
  c.n_estimators = 30;
  c.seed = 1;
  std::ostringstream a, b, other;
  learners::save_model(a, learners::train_gbdt(data.X, data.y, c));
  learners::save_model(b, learners::train_gbdt(data.X, data.y, c));
  c.seed = 2;
  learners::save_model(other, learners::train_gbdt(data.X, data.y, c));
  CHECK(a.str() == b.str());
  CHECK(a.str() != other.str());

  MlpConfig mc;
  mc.hidden_layers = {6, 4};
  mc.max_epochs = 5;
  std::ostringstream ma, mb;
  learners::save_model(ma, learners::train_mlp(data.X, data.y, mc));
  learners::save_model(mb, learners::train_mlp(data.X, data.y, mc));
  CHECK(ma.str() == mb.str());
}

TEST_CASE("save/load round trip and corruption") {
  const auto data = planted(200, 5, 8, 0.1);
  GbdtConfig c;
  c.n_estimators = 15;
  c.subsample = 0.8;
  const auto gbdt = learners::train_gbdt(data.X, data.y, c);
  MlpConfig mc;
  mc.hidden_layers = {7, 3};
  mc.max_epochs = 10;
  const auto mlp = learners::train_mlp(data.X, data.y, mc);

  core::Rng rng(77);
  for (const auto* m : {&gbdt, &mlp}) {
    std::ostringstream out;
    learners::save_model(out, *m);
    std::istringstream in(out.str());
    const auto back = learners::load_model(in);
    CHECK(back == *m);
    for (int i = 0; i < 1000; ++i) {
      std::vector<double> x(5);
      for (double& v : x) v = rng.uniform(-2, 2);
      REQUIRE(learners::predict(back, x) == learners::predict(*m, x));
    }

    const std::string text = out.str();
    std::istringstream truncated(text.substr(0, text.size() - 40));
    CHECK_THROWS_WITH_AS(learners::load_model(truncated), doctest::Contains("checksum"),
                         learners::ModelFormatError);
    std::string flipped = text;
    flipped[flipped.size() / 2 + 50] ^= 1;
    std::istringstream corrupt(flipped);
    CHECK_THROWS_AS(learners::load_model(corrupt), learners::ModelFormatError);
    std::string v2 = text;
    v2.replace(0, 20, "promptroute-model v2");
    std::istringstream future(v2);
    CHECK_THROWS_WITH_AS(learners::load_model(future), doctest::Contains("version"), learners::ModelFormatError);
  }
}

TEST_CASE("named prediction is invariant to column order") {
  const auto data = planted(200, 4, 10, 0.1);
  GbdtConfig c;
  c.n_estimators = 10;
  const std::vector<std::string> names{"a", "b", "c", "d"};
  const auto m = learners::train_gbdt(data.X, data.y, c, names);
  const std::vector<std::string> permuted{"c", "a", "d", "b", "extra"};
  for (const auto& row : data.X) {
    const std::vector<double> x{row[2], row[0], row[3], row[1], 99.0};
    CHECK(learners::predict_named(m, permuted, x) == learners::predict(m, row));
  }
  const std::vector<std::string> missing{"a", "b", "c"};
  CHECK_THROWS_AS(learners::predict_named(m, missing, std::vector<double>{1, 2, 3}), core::DataError);
}

TEST_CASE("zero-weight network predicts one half") {
  const auto data = planted(50, 3, 11);
  MlpConfig mc;
  mc.hidden_layers = {4};
  mc.max_epochs = 1;
  auto m = learners::train_mlp(data.X, data.y, mc);
  auto params = learners::flatten_parameters(m.mlp);
  std::fill(params.begin(), params.end(), 0.0);
  learners::assign_parameters(m.mlp, params);
  core::Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> x{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
    CHECK(learners::predict(m, x) == 0.5);
  }
}

TEST_CASE("mlp analytic gradient matches central differences") {
  core::Rng rng(99);
  for (int config = 0; config < 10; ++config) {
    learners::MlpModel net;
    std::size_t in = 7;
    std::vector<std::size_t> widths;
    for (std::size_t k = 0, depth = 1 + rng.below(2); k < depth; ++k) widths.push_back(2 + rng.below(5));
    widths.push_back(1);
    for (std::size_t w : widths) {
      learners::DenseLayer L;
      L.in = in;
      L.out = w;
      for (std::size_t k = 0; k < in * w; ++k) L.weights.push_back(rng.uniform(-1, 1));
      for (std::size_t k = 0; k < w; ++k) L.bias.push_back(rng.uniform(-0.5, 0.5));
      net.layers.push_back(L);
      in = w;
    }
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    for (int r = 0; r < 5; ++r) {
      std::vector<double> row(7);
      for (double& v : row) v = rng.uniform(-2, 2);
      X.push_back(row);
      y.push_back(static_cast<int>(rng.below(2)));
    }
    const double alpha = 1e-3;
    const auto lg = learners::mlp_loss_gradient(net, X, y, alpha);
    auto params = learners::flatten_parameters(net);
    REQUIRE(lg.gradient.size() == params.size());
    const double h = 1e-6;
    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto p = params;
      p[k] = params[k] + h;
      learners::assign_parameters(net, p);
      const double up = learners::mlp_loss_gradient(net, X, y, alpha).loss;
      p[k] = params[k] - h;
      learners::assign_parameters(net, p);
      const double down = learners::mlp_loss_gradient(net, X, y, alpha).loss;
      const double numeric = (up - down) / (2 * h);
      const double err = std::abs(numeric - lg.gradient[k]) / std::max({std::abs(numeric), std::abs(lg.gradient[k]), 1e-4});
      worst = std::max(worst, err);
    }
    learners::assign_parameters(net, params);
    CAPTURE(config);
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("mlp separates a linearly separable blob") {
  core::Rng rng(12);
  Data data;
  for (int i = 0; i < 400; ++i) {
    const int label = i % 2;
    const double cx = label ? 2.0 : -2.0;
    data.X.push_back({cx + rng.uniform(-1.5, 1.5), cx + rng.uniform(-1.5, 1.5)});
    data.y.push_back(label);
  }
  MlpConfig mc = learners::mlp_preset("llama");
  mc.max_epochs = 200;
  const auto m = learners::train_mlp(data.X, data.y, mc);
  CHECK(accuracy(m, data) >= 0.99);
  CHECK(m.metadata.at("epochs_run").get<int>() <= 200);
}

TEST_CASE("strong L2 pulls predictions toward the prior") {
  const auto data = planted(200, 3, 13, 0.1);
  const double prior = std::accumulate(data.y.begin(), data.y.end(), 0.0) / 200.0;
  std::vector<double> spread;
  for (double alpha : {1e-4, 1e-1, 1e2}) {
    MlpConfig mc;
    mc.hidden_layers = {8};
    mc.l2_alpha = alpha;
    mc.max_epochs = 150;
    mc.initial_learning_rate = 1e-2;
    const auto m = learners::train_mlp(data.X, data.y, mc);
    double dev = 0.0;
    for (const auto& row : data.X) dev += std::abs(learners::predict(m, row) - prior);
    spread.push_back(dev / 200.0);
  }
  CHECK(spread[0] > spread[1]);
  CHECK(spread[1] > spread[2]);
  CHECK(spread[2] < 0.05);
}

TEST_CASE("committed fixture model reproduces golden predictions") {
  const auto model_path = testing::fixture("model_fixture.txt");
  const auto golden_path = testing::golden("model_fixture_predictions.txt");
  const auto probe = planted(50, 4, 2718);
  if (std::getenv("PROMPTROUTE_UPDATE_GOLDEN") != nullptr) {
    const auto train = planted(300, 4, 31415, 0.1);
    GbdtConfig c;
    c.n_estimators = 12;
    c.max_depth = 3;
    c.subsample = 0.8;
    c.colsample_bytree = 0.75;
    c.seed = 5;
    const auto m = learners::train_gbdt(train.X, train.y, c, {"alpha", "beta", "gamma", "delta"});
    learners::save_model(model_path, m);
    std::ofstream out(golden_path);
    for (const auto& row : probe.X) out << shortest(learners::predict(m, row)) << '\n';
  }
  const auto m = learners::load_model(model_path);
  std::ifstream in(golden_path);
  REQUIRE(in);
  std::string line;
  std::size_t i = 0;
  while (std::getline(in, line)) {
    REQUIRE(i < probe.X.size());
    CHECK(shortest(learners::predict(m, probe.X[i])) == line);
    ++i;
  }
  CHECK(i == probe.X.size());
}
