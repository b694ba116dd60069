#pragma once

// Exhaustive best-gain stump for one boosting round from the prior, written
// without the production tree builder: every feature, every midpoint between
// consecutive distinct values, sums taken in row order.

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "promptroute/core/rng.hpp"
#include "promptroute/learners/model.hpp"

namespace promptroute::testing {

struct StumpInstance {
  std::vector<std::vector<double>> X;
  std::vector<int> y;
  double lambda = 1.0;
  double learning_rate = 0.3;
  double min_child_weight = 0.0;
};

struct Stump {
  double base = 0.0;
  std::optional<int> feature;
  double threshold = 0.0;
  double left = 0.0;   // leaf values; `left` doubles as the single leaf when unsplit
  double right = 0.0;
};

inline Stump brute_force_stump(const StumpInstance& inst) {
  const std::size_t n = inst.X.size();
  const std::size_t d = inst.X.front().size();
  double pos = 0;
  for (int v : inst.y) pos += v;
  const double prior = pos / static_cast<double>(n);
  Stump s;
  s.base = std::log(prior / (1.0 - prior));
  const double p = learners::sigmoid(s.base);
  std::vector<double> g(n), h(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = p - inst.y[i];
    h[i] = p * (1.0 - p);
  }
  const auto score = [&](double G, double H) { return G * G / (H + inst.lambda); };
  const auto leaf = [&](double G, double H) { return -G / (H + inst.lambda) * inst.learning_rate; };

  double G = 0, H = 0;
  for (std::size_t i = 0; i < n; ++i) {
    G += g[i];
    H += h[i];
  }
  s.left = leaf(G, H);

  bool have = false;
  double best = 0.0;
  for (std::size_t f = 0; f < d; ++f) {
    std::set<double> values;
    for (const auto& row : inst.X) values.insert(row[f]);
    for (auto it = values.begin(); std::next(it) != values.end(); ++it) {
      const double a = *it;
      const double b = *std::next(it);
      double thr = (a + b) / 2.0;
      if (!(thr > a)) thr = b;
      double GL = 0, HL = 0, GR = 0, HR = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (inst.X[i][f] < thr) {
          GL += g[i];
          HL += h[i];
        } else {
          GR += g[i];
          HR += h[i];
        }
      }
      if (HL < inst.min_child_weight || HR < inst.min_child_weight) continue;
      const double sl = score(GL, HL), sr = score(GR, HR), sp = score(G, H);
      const double gain = (sl + sr - sp) / 2.0;
      if (!(gain > 1e-12 * (sl + sr + sp))) continue;
      if (!have || gain > best + 1e-10 * std::abs(best)) {
        have = true;
        best = gain;
        s.feature = static_cast<int>(f);
        s.threshold = thr;
        s.left = leaf(GL, HL);
        s.right = leaf(GR, HR);
      }
    }
  }
  return s;
}

// Random instance with both classes; half the time values come from a small
// integer grid so ties are common.
inline StumpInstance random_stump_instance(core::Rng& rng) {
  StumpInstance inst;
  const std::size_t n = 2 + rng.below(63);
  const std::size_t d = 1 + rng.below(5);
  const bool grid = rng.bernoulli(0.5);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(d);
    for (double& v : row) v = grid ? static_cast<double>(rng.below(6)) : rng.uniform(-3.0, 3.0);
    inst.X.push_back(row);
    inst.y.push_back(rng.bernoulli(0.4) ? 1 : 0);
  }
  inst.y[0] = 0;
  inst.y[1] = 1;
  const double lambdas[] = {0.0, 1.0, 2.5};
  inst.lambda = lambdas[rng.below(3)];
  inst.learning_rate = rng.bernoulli(0.5) ? 0.3 : 1.0;
  const double weights[] = {0.0, 0.5, 1.0};
  inst.min_child_weight = weights[rng.below(3)];
  return inst;
}

inline learners::GbdtConfig stump_config(const StumpInstance& inst) {
  learners::GbdtConfig c;
  c.n_estimators = 1;
  c.max_depth = 1;
  c.learning_rate = inst.learning_rate;
  c.subsample = 1.0;
  c.colsample_bytree = 1.0;
  c.min_child_weight = inst.min_child_weight;
  c.l2_lambda = inst.lambda;
  c.min_gain = 0.0;
  return c;
}

// True when the trained single-tree model equals the oracle stump exactly.
inline bool stump_matches(const learners::TrainedModel& m, const Stump& s) {
  if (m.gbdt.base_score != s.base || m.gbdt.trees.size() != 1) return false;
  const auto& nodes = m.gbdt.trees[0].nodes;
  if (!s.feature) return nodes.size() == 1 && nodes[0].feature < 0 && nodes[0].value == s.left;
  if (nodes.size() != 3 || nodes[0].feature != *s.feature || nodes[0].threshold != s.threshold) return false;
  return nodes[nodes[0].left].value == s.left && nodes[nodes[0].right].value == s.right;
}

}  // namespace promptroute::testing
