#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "promptroute/core/rng.hpp"
#include "promptroute/learners/model.hpp"

namespace promptroute::learners {

namespace {

using Index = std::uint32_t;

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Midpoint between two consecutive distinct values; b when the midpoint
// rounds down onto a.
double midpoint(double a, double b) {
  const double m = 0.5 * (a + b);
  return m > a ? m : b;
}

double leaf_score(double g, double h, double lambda) { return g * g / (h + lambda); }

class TreeBuilder {
 public:
  TreeBuilder(Rows X, const std::vector<double>& g, const std::vector<double>& h, const GbdtConfig& c)
      : X_(X), g_(g), h_(h), c_(c) {}

  // `sorted[k]` lists the node's rows ordered by (value of features[k], row).
  Tree build(std::vector<Index> rows, const std::vector<int>& features) {
    features_ = features;
    std::vector<std::vector<Index>> sorted(features.size());
    for (std::size_t k = 0; k < features.size(); ++k) {
      const int f = features[k];
      sorted[k] = rows;
      std::stable_sort(sorted[k].begin(), sorted[k].end(),
                       [&](Index a, Index b) { return X_[a][f] < X_[b][f]; });
    }
    tree_.nodes.clear();
    grow(std::move(rows), std::move(sorted), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<Index> rows, std::vector<std::vector<Index>> sorted, int depth) {
    // Totals in row-index order so leaf values do not depend on feature order.
    double G = 0.0;
    double H = 0.0;
    for (Index i : rows) {
      G += g_[i];
      H += h_[i];
    }
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes[id].cover = H;

    Split best;
    if (depth < c_.max_depth && rows.size() >= 2) best = find_split(sorted, G, H);
    if (best.feature < 0) {
      tree_.nodes[id].value = -G / (H + c_.l2_lambda) * c_.learning_rate;
      return id;
    }

    std::vector<char> goes_left(X_.size(), 0);
    std::vector<Index> left_rows, right_rows;
    for (Index i : rows) {
      const bool left = X_[i][best.feature] < best.threshold;
      goes_left[i] = left ? 1 : 0;
      (left ? left_rows : right_rows).push_back(i);
    }
    std::vector<std::vector<Index>> left_sorted(sorted.size()), right_sorted(sorted.size());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      left_sorted[k].reserve(left_rows.size());
      right_sorted[k].reserve(right_rows.size());
      for (Index i : sorted[k]) (goes_left[i] ? left_sorted[k] : right_sorted[k]).push_back(i);
    }
    sorted.clear();
    rows.clear();

    tree_.nodes[id].feature = best.feature;
    tree_.nodes[id].threshold = best.threshold;
    tree_.nodes[id].gain = best.gain;
    const int l = grow(std::move(left_rows), std::move(left_sorted), depth + 1);
    const int r = grow(std::move(right_rows), std::move(right_sorted), depth + 1);
    tree_.nodes[id].left = l;
    tree_.nodes[id].right = r;
    return id;
  }

  // Scans features in ascending index order and thresholds in ascending order;
  // a later candidate wins only with a strictly larger gain (beyond a relative
  // 1e-10 tolerance), so ties go to the lowest feature, then lowest threshold.
  Split find_split(const std::vector<std::vector<Index>>& sorted, double G, double H) const {
    const double lambda = c_.l2_lambda;
    const double parent = leaf_score(G, H, lambda);
    Split best;
    bool have = false;
    for (std::size_t k = 0; k < features_.size(); ++k) {
      const int f = features_[k];
      const auto& order = sorted[k];
      double GL = 0.0;
      double HL = 0.0;
      for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
        GL += g_[order[pos]];
        HL += h_[order[pos]];
        const double a = X_[order[pos]][f];
        const double b = X_[order[pos + 1]][f];
        if (!(a < b)) continue;
        const double GR = G - GL;
        const double HR = H - HL;
        if (HL < c_.min_child_weight || HR < c_.min_child_weight) continue;
        const double sl = leaf_score(GL, HL, lambda);
        const double sr = leaf_score(GR, HR, lambda);
        const double gain = 0.5 * (sl + sr - parent);
        // Gains that are zero up to rounding are not splits.
        const double noise = 1e-12 * (sl + sr + parent);
        if (!(gain > c_.min_gain + noise)) continue;
        if (!have || gain > best.gain + 1e-10 * std::abs(best.gain)) {
          best = {f, midpoint(a, b), gain};
          have = true;
        }
      }
    }
    return best;
  }

  Rows X_;
  const std::vector<double>& g_;
  const std::vector<double>& h_;
  const GbdtConfig& c_;
  std::vector<int> features_;
  Tree tree_;
};

}  // namespace

TrainedModel train_gbdt(Rows X, Labels y, const GbdtConfig& config, std::vector<std::string> feature_names) {
  config.validate();
  check_training_data(X, y);
  const std::size_t n = X.size();
  const std::size_t d = X.front().size();
  if (feature_names.empty()) {
    for (std::size_t j = 0; j < d; ++j) feature_names.push_back("f" + std::to_string(j));
  }
  if (feature_names.size() != d) throw core::DataError("feature name count does not match the data");

  const double positives = static_cast<double>(std::count(y.begin(), y.end(), 1));
  const double prior = positives / static_cast<double>(n);

  TrainedModel model;
  model.kind = ModelKind::gbdt;
  model.feature_names = std::move(feature_names);
  model.gbdt.base_score = std::log(prior / (1.0 - prior));
  model.metadata = {{"config", config.to_json()}, {"importance_method", "total_gain"}};

  std::vector<double> margin(n, model.gbdt.base_score);
  std::vector<double> g(n), h(n);
  const auto n_rows = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(config.subsample * static_cast<double>(n) + 1e-9)));
  const auto n_cols = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(config.colsample_bytree * static_cast<double>(d) + 1e-9)));

  std::vector<Index> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), Index{0});
  std::vector<int> all_cols(d);
  std::iota(all_cols.begin(), all_cols.end(), 0);

  for (int round = 0; round < config.n_estimators; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      g[i] = p - y[i];
      h[i] = p * (1.0 - p);
    }
    core::Rng rng(core::mix_seed(config.seed, static_cast<std::uint64_t>(round)));
    std::vector<Index> rows = all_rows;
    if (n_rows < n) {
      rng.shuffle(std::span(rows));
      rows.resize(n_rows);
      std::sort(rows.begin(), rows.end());
    }
    std::vector<int> cols = all_cols;
    if (n_cols < d) {
      rng.shuffle(std::span(cols));
      cols.resize(n_cols);
      std::sort(cols.begin(), cols.end());
    }
    TreeBuilder builder(X, g, h, config);
    Tree tree = builder.build(std::move(rows), cols);
    for (std::size_t i = 0; i < n; ++i) margin[i] += tree.predict(X[i]);
    model.gbdt.trees.push_back(std::move(tree));
  }
  model.importance = feature_importance(model);
  return model;
}

double Tree::predict(std::span<const double> x) const {
  if (nodes.empty()) return 0.0;
  int id = 0;
  while (nodes[id].feature >= 0) {
    const TreeNode& node = nodes[id];
    id = x[node.feature] < node.threshold ? node.left : node.right;
  }
  return nodes[id].value;
}

double GbdtModel::margin(std::span<const double> x) const {
  double m = base_score;
  for (const auto& t : trees) m += t.predict(x);
  return m;
}

}  // namespace promptroute::learners
