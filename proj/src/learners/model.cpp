#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "promptroute/core/hash.hpp"
#include "promptroute/core/rng.hpp"
#include "promptroute/learners/model.hpp"

namespace promptroute::learners {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "promptroute-model v1";
constexpr std::string_view kMagicPrefix = "promptroute-model v";

void require(bool ok, const std::string& msg) {
  if (!ok) throw core::ConfigError(msg);
}

bool in_unit_interval(double v) { return v > 0.0 && v <= 1.0; }

}  // namespace

void GbdtConfig::validate() const {
  require(n_estimators >= 0, "gbdt: n_estimators must be >= 0");
  require(max_depth >= 1, "gbdt: max_depth must be >= 1");
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "gbdt: learning_rate must be > 0");
  require(in_unit_interval(subsample), "gbdt: subsample must be in (0,1]");
  require(in_unit_interval(colsample_bytree), "gbdt: colsample_bytree must be in (0,1]");
  require(min_child_weight >= 0.0, "gbdt: min_child_weight must be >= 0");
  require(l2_lambda >= 0.0, "gbdt: l2_lambda must be >= 0");
  require(min_gain >= 0.0, "gbdt: min_gain must be >= 0");
}

json GbdtConfig::to_json() const {
  return {{"n_estimators", n_estimators},   {"max_depth", max_depth},
          {"learning_rate", learning_rate}, {"subsample", subsample},
          {"colsample_bytree", colsample_bytree}, {"min_child_weight", min_child_weight},
          {"l2_lambda", l2_lambda},         {"min_gain", min_gain},
          {"seed", seed}};
}

GbdtConfig GbdtConfig::from_json(const json& j) {
  GbdtConfig c;
  c.n_estimators = j.value("n_estimators", c.n_estimators);
  c.max_depth = j.value("max_depth", c.max_depth);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.subsample = j.value("subsample", c.subsample);
  c.colsample_bytree = j.value("colsample_bytree", c.colsample_bytree);
  c.min_child_weight = j.value("min_child_weight", c.min_child_weight);
  c.l2_lambda = j.value("l2_lambda", c.l2_lambda);
  c.min_gain = j.value("min_gain", c.min_gain);
  c.seed = j.value("seed", c.seed);
  return c;
}

void MlpConfig::validate() const {
  require(!hidden_layers.empty(), "mlp: hidden_layers must not be empty");
  for (int w : hidden_layers) require(w >= 1, "mlp: layer widths must be >= 1");
  require(l2_alpha > 0.0, "mlp: l2_alpha must be > 0");
  require(initial_learning_rate > 0.0, "mlp: initial_learning_rate must be > 0");
  require(max_epochs >= 1, "mlp: max_epochs must be >= 1");
  require(batch_size >= 1, "mlp: batch_size must be >= 1");
  require(tolerance >= 0.0, "mlp: tolerance must be >= 0");
  require(patience >= 1, "mlp: patience must be >= 1");
}

json MlpConfig::to_json() const {
  return {{"hidden_layers", hidden_layers}, {"l2_alpha", l2_alpha},
          {"initial_learning_rate", initial_learning_rate},
          {"max_epochs", max_epochs}, {"batch_size", batch_size},
          {"tolerance", tolerance}, {"patience", patience}, {"seed", seed}};
}

MlpConfig MlpConfig::from_json(const json& j) {
  MlpConfig c;
  c.hidden_layers = j.value("hidden_layers", c.hidden_layers);
  c.l2_alpha = j.value("l2_alpha", c.l2_alpha);
  c.initial_learning_rate = j.value("initial_learning_rate", c.initial_learning_rate);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.tolerance = j.value("tolerance", c.tolerance);
  c.patience = j.value("patience", c.patience);
  c.seed = j.value("seed", c.seed);
  return c;
}

GbdtConfig gbdt_preset(std::string_view name) {
  GbdtConfig c;
  if (name == "ds") {
    c.n_estimators = 424;
    c.max_depth = 10;
    c.learning_rate = 2.87e-2;
    c.subsample = 0.951;
    c.colsample_bytree = 0.615;
    c.min_child_weight = 9.51;
  } else if (name == "llama") {
    c.n_estimators = 101;
    c.max_depth = 3;
    c.learning_rate = 1.88e-2;
    c.subsample = 0.700;
    c.colsample_bytree = 0.996;
    c.min_child_weight = 4.71;
  } else {
    throw core::ConfigError("unknown gbdt preset '" + std::string(name) + "' (expected ds or llama)");
  }
  return c;
}

MlpConfig mlp_preset(std::string_view name) {
  MlpConfig c;
  if (name == "ds") {
    c.hidden_layers = {100, 50};
    c.l2_alpha = 8.94e-5;
    c.initial_learning_rate = 3.27e-3;
  } else if (name == "llama") {
    c.hidden_layers = {100};
    c.l2_alpha = 4.19e-5;
    c.initial_learning_rate = 5.44e-3;
  } else {
    throw core::ConfigError("unknown mlp preset '" + std::string(name) + "' (expected ds or llama)");
  }
  return c;
}

std::string_view to_string(ModelKind k) { return k == ModelKind::gbdt ? "gbdt" : "mlp"; }

std::optional<ModelKind> parse_model_kind(std::string_view s) {
  if (s == "gbdt") return ModelKind::gbdt;
  if (s == "mlp") return ModelKind::mlp;
  return std::nullopt;
}

void check_training_data(Rows X, Labels y) {
  if (X.size() != y.size()) throw core::DataError("feature rows and labels differ in length");
  if (X.size() < 2) throw core::DataError("need at least two training rows");
  const std::size_t d = X.front().size();
  if (d == 0) throw core::DataError("training rows have no features");
  bool zero = false;
  bool one = false;
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (X[i].size() != d) throw core::DataError("row " + std::to_string(i) + " has the wrong width");
    for (std::size_t j = 0; j < d; ++j) {
      if (!std::isfinite(X[i][j])) {
        throw core::DataError("non-finite value at row " + std::to_string(i) + ", feature " + std::to_string(j));
      }
    }
    if (y[i] == 0) zero = true;
    else if (y[i] == 1) one = true;
    else throw core::DataError("label at row " + std::to_string(i) + " is not 0 or 1");
  }
  if (!zero || !one) throw core::DataError("training labels contain a single class");
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double predict(const TrainedModel& model, std::span<const double> x) {
  if (x.size() != model.n_features()) {
    throw core::DataError("feature vector has " + std::to_string(x.size()) + " values, model expects " +
                          std::to_string(model.n_features()));
  }
  const double z = model.kind == ModelKind::gbdt ? model.gbdt.margin(x) : model.mlp.logit(x);
  const double p = sigmoid(z);
  constexpr double lo = std::numeric_limits<double>::denorm_min();
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(p, lo, hi);
}

double predict_named(const TrainedModel& model, std::span<const std::string> names, std::span<const double> x) {
  if (names.size() != x.size()) throw core::DataError("feature names and values differ in length");
  std::map<std::string_view, double> by_name;
  for (std::size_t i = 0; i < names.size(); ++i) by_name.emplace(names[i], x[i]);
  std::vector<double> aligned;
  aligned.reserve(model.n_features());
  for (const auto& n : model.feature_names) {
    auto it = by_name.find(n);
    if (it == by_name.end()) throw core::DataError("input lacks model feature '" + n + "'");
    aligned.push_back(it->second);
  }
  return predict(model, aligned);
}

std::vector<double> feature_importance(const TrainedModel& model, Rows X_val, Labels y_val, int permutations,
                                       std::uint64_t seed) {
  const std::size_t d = model.n_features();
  std::vector<double> score(d, 0.0);
  if (model.kind == ModelKind::gbdt) {
    for (const auto& t : model.gbdt.trees) {
      for (const auto& node : t.nodes) {
        if (node.feature >= 0) score[static_cast<std::size_t>(node.feature)] += node.gain;
      }
    }
  } else {
    if (X_val.empty() || X_val.size() != y_val.size()) {
      throw core::DataError("permutation importance needs a nonempty validation set");
    }
    const std::size_t n = X_val.size();
    const auto accuracy = [&](const std::vector<std::vector<double>>& rows) {
      std::size_t hit = 0;
      for (std::size_t i = 0; i < n; ++i) hit += decide(predict(model, rows[i])) == y_val[i];
      return static_cast<double>(hit) / static_cast<double>(n);
    };
    std::vector<std::vector<double>> rows(X_val.begin(), X_val.end());
    const double baseline = accuracy(rows);
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<double> column(n);
      for (std::size_t i = 0; i < n; ++i) column[i] = X_val[i][j];
      double drop = 0.0;
      for (int k = 0; k < permutations; ++k) {
        core::Rng rng(core::mix_seed(seed, j * 1000003ULL + static_cast<std::uint64_t>(k)));
        std::vector<double> shuffled = column;
        rng.shuffle(std::span(shuffled));
        for (std::size_t i = 0; i < n; ++i) rows[i][j] = shuffled[i];
        drop += baseline - accuracy(rows);
      }
      for (std::size_t i = 0; i < n; ++i) rows[i][j] = column[i];
      score[j] = std::max(0.0, drop / permutations);
    }
  }
  double total = 0.0;
  for (double s : score) total += s;
  if (total > 0.0) {
    for (double& s : score) s /= total;
  }
  return score;
}

std::vector<std::pair<std::string, double>> group_importance(
    const TrainedModel& model, const std::function<std::string(std::string_view)>& group_of) {
  std::map<std::string, double> sums;
  for (std::size_t j = 0; j < model.importance.size() && j < model.feature_names.size(); ++j) {
    sums[group_of(model.feature_names[j])] += model.importance[j];
  }
  std::vector<std::pair<std::string, double>> out(sums.begin(), sums.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

namespace {

json tree_to_json(const Tree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value, n.gain, n.cover}));
  }
  return nodes;
}

Tree tree_from_json(const json& j, std::size_t n_features) {
  Tree t;
  for (const auto& a : j) {
    TreeNode n;
    n.feature = a.at(0).get<int>();
    n.threshold = a.at(1).get<double>();
    n.left = a.at(2).get<int>();
    n.right = a.at(3).get<int>();
    n.value = a.at(4).get<double>();
    n.gain = a.at(5).get<double>();
    n.cover = a.at(6).get<double>();
    t.nodes.push_back(n);
  }
  const int size = static_cast<int>(t.nodes.size());
  for (const auto& n : t.nodes) {
    if (n.feature >= 0 && (static_cast<std::size_t>(n.feature) >= n_features || n.left <= 0 || n.right <= 0 ||
                           n.left >= size || n.right >= size)) {
      throw ModelFormatError("tree node references an invalid feature or child");
    }
  }
  return t;
}

json layer_to_json(const DenseLayer& L) {
  return {{"in", L.in}, {"out", L.out}, {"weights", L.weights}, {"bias", L.bias}};
}

json payload(const TrainedModel& m) {
  json j;
  j["kind"] = to_string(m.kind);
  j["feature_names"] = m.feature_names;
  j["importance"] = m.importance;
  j["metadata"] = m.metadata;
  if (m.kind == ModelKind::gbdt) {
    json trees = json::array();
    for (const auto& t : m.gbdt.trees) trees.push_back(tree_to_json(t));
    j["gbdt"] = {{"base_score", m.gbdt.base_score}, {"trees", trees}};
  } else {
    json layers = json::array();
    for (const auto& L : m.mlp.layers) layers.push_back(layer_to_json(L));
    j["mlp"] = {{"mean", m.mlp.mean}, {"scale", m.mlp.scale}, {"layers", layers}};
  }
  return j;
}

TrainedModel from_payload(const json& j) {
  TrainedModel m;
  const auto kind = parse_model_kind(j.at("kind").get<std::string>());
  if (!kind) throw ModelFormatError("unknown model kind");
  m.kind = *kind;
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.importance = j.at("importance").get<std::vector<double>>();
  m.metadata = j.at("metadata");
  const std::size_t d = m.feature_names.size();
  if (m.kind == ModelKind::gbdt) {
    m.gbdt.base_score = j.at("gbdt").at("base_score").get<double>();
    for (const auto& t : j.at("gbdt").at("trees")) m.gbdt.trees.push_back(tree_from_json(t, d));
  } else {
    const json& mj = j.at("mlp");
    m.mlp.mean = mj.at("mean").get<std::vector<double>>();
    m.mlp.scale = mj.at("scale").get<std::vector<double>>();
    std::size_t expect_in = d;
    for (const auto& lj : mj.at("layers")) {
      DenseLayer L;
      L.in = lj.at("in").get<std::size_t>();
      L.out = lj.at("out").get<std::size_t>();
      L.weights = lj.at("weights").get<std::vector<double>>();
      L.bias = lj.at("bias").get<std::vector<double>>();
      if (L.in != expect_in || L.weights.size() != L.in * L.out || L.bias.size() != L.out) {
        throw ModelFormatError("mlp layer shape is inconsistent");
      }
      expect_in = L.out;
      m.mlp.layers.push_back(std::move(L));
    }
    if (m.mlp.mean.size() != d || m.mlp.scale.size() != d || m.mlp.layers.empty() || expect_in != 1) {
      throw ModelFormatError("mlp shape does not match the feature count");
    }
  }
  if (!m.importance.empty() && m.importance.size() != d) {
    throw ModelFormatError("importance vector does not match the feature count");
  }
  return m;
}

}  // namespace

// Line 1: format tag. Line 2: "sha256 <hex>" of the payload line. Line 3: the
// payload as compact JSON (doubles round-trip exactly).
void save_model(std::ostream& out, const TrainedModel& model) {
  const std::string body = payload(model).dump();
  out << kMagic << '\n' << "sha256 " << core::sha256_hex(body) << '\n' << body << '\n';
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw core::InputError("cannot write " + path.string());
  save_model(out, model);
  if (!out) throw core::InputError("write failed: " + path.string());
}

TrainedModel load_model(std::istream& in, const std::string& source) {
  if (!in) throw core::InputError("cannot read " + source);
  std::string magic, sum_line, body;
  std::getline(in, magic);
  if (magic != kMagic) {
    if (magic.starts_with(kMagicPrefix)) {
      throw ModelFormatError(source + ": unsupported model format version '" + magic + "'");
    }
    throw ModelFormatError(source + ": not a model file");
  }
  std::getline(in, sum_line);
  std::getline(in, body);
  if (!sum_line.starts_with("sha256 ")) throw ModelFormatError(source + ": checksum line missing");
  if (core::sha256_hex(body) != sum_line.substr(7)) {
    throw ModelFormatError(source + ": checksum mismatch (file corrupted or truncated)");
  }
  try {
    return from_payload(json::parse(body));
  } catch (const json::exception& e) {
    throw ModelFormatError(source + ": malformed model payload: " + e.what());
  }
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw core::InputError("cannot open " + path.string());
  return load_model(in, path.string());
}

}  // namespace promptroute::learners
