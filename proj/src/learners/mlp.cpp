#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "promptroute/core/rng.hpp"
#include "promptroute/learners/model.hpp"

namespace promptroute::learners {

namespace {

// Forward pass over standardized input; keeps every activation for backprop.
std::vector<std::vector<double>> forward(const MlpModel& m, std::span<const double> x) {
  std::vector<std::vector<double>> acts;
  acts.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const DenseLayer& L = m.layers[l];
    const auto& in = acts.back();
    std::vector<double> out(L.out);
    for (std::size_t o = 0; o < L.out; ++o) {
      double z = L.bias[o];
      const double* w = &L.weights[o * L.in];
      for (std::size_t i = 0; i < L.in; ++i) z += w[i] * in[i];
      const bool hidden = l + 1 < m.layers.size();
      out[o] = hidden ? std::max(0.0, z) : z;
    }
    acts.push_back(std::move(out));
  }
  return acts;
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

std::vector<double> standardized(const MlpModel& m, std::span<const double> x) {
  std::vector<double> s(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) s[j] = (x[j] - m.mean[j]) / m.scale[j];
  return s;
}

}  // namespace

double MlpModel::logit(std::span<const double> x) const {
  return forward(*this, standardized(*this, x)).back()[0];
}

std::vector<double> flatten_parameters(const MlpModel& model) {
  std::vector<double> p;
  for (const auto& L : model.layers) {
    p.insert(p.end(), L.weights.begin(), L.weights.end());
    p.insert(p.end(), L.bias.begin(), L.bias.end());
  }
  return p;
}

void assign_parameters(MlpModel& model, std::span<const double> params) {
  std::size_t k = 0;
  for (auto& L : model.layers) {
    if (k + L.weights.size() + L.bias.size() > params.size()) break;
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(k), L.weights.size(), L.weights.begin());
    k += L.weights.size();
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(k), L.bias.size(), L.bias.begin());
    k += L.bias.size();
  }
  if (k != params.size()) throw core::DataError("parameter vector does not match the network shape");
}

LossGradient mlp_loss_gradient(const MlpModel& model, Rows X, Labels y, double alpha) {
  const std::size_t n = X.size();
  std::vector<DenseLayer> grads = model.layers;
  for (auto& G : grads) {
    std::fill(G.weights.begin(), G.weights.end(), 0.0);
    std::fill(G.bias.begin(), G.bias.end(), 0.0);
  }
  double loss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto acts = forward(model, X[r]);
    const double z = acts.back()[0];
    // Cross-entropy with logits: softplus(z) - y z.
    loss += softplus(z) - static_cast<double>(y[r]) * z;
    std::vector<double> delta{sigmoid(z) - static_cast<double>(y[r])};
    for (std::size_t l = model.layers.size(); l-- > 0;) {
      const DenseLayer& L = model.layers[l];
      DenseLayer& G = grads[l];
      const auto& in = acts[l];
      for (std::size_t o = 0; o < L.out; ++o) {
        G.bias[o] += delta[o];
        double* gw = &G.weights[o * L.in];
        for (std::size_t i = 0; i < L.in; ++i) gw[i] += delta[o] * in[i];
      }
      if (l == 0) break;
      std::vector<double> prev(L.in, 0.0);
      for (std::size_t o = 0; o < L.out; ++o) {
        const double* w = &L.weights[o * L.in];
        for (std::size_t i = 0; i < L.in; ++i) prev[i] += w[i] * delta[o];
      }
      // ReLU derivative taken as 0 at exactly 0.
      for (std::size_t i = 0; i < L.in; ++i) {
        if (!(in[i] > 0.0)) prev[i] = 0.0;
      }
      delta = std::move(prev);
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  LossGradient out;
  out.loss = loss * inv_n;
  for (std::size_t l = 0; l < grads.size(); ++l) {
    const DenseLayer& L = model.layers[l];
    for (std::size_t k = 0; k < L.weights.size(); ++k) {
      out.loss += alpha * L.weights[k] * L.weights[k];
      out.gradient.push_back(grads[l].weights[k] * inv_n + 2.0 * alpha * L.weights[k]);
    }
    for (double b : grads[l].bias) out.gradient.push_back(b * inv_n);
  }
  return out;
}

TrainedModel train_mlp(Rows X, Labels y, const MlpConfig& config, std::vector<std::string> feature_names) {
  config.validate();
  check_training_data(X, y);
  const std::size_t n = X.size();
  const std::size_t d = X.front().size();
  if (feature_names.empty()) {
    for (std::size_t j = 0; j < d; ++j) feature_names.push_back("f" + std::to_string(j));
  }
  if (feature_names.size() != d) throw core::DataError("feature name count does not match the data");

  TrainedModel model;
  model.kind = ModelKind::mlp;
  model.feature_names = std::move(feature_names);
  MlpModel& m = model.mlp;

  // z-score with population std; constant columns keep scale 1.
  m.mean.assign(d, 0.0);
  m.scale.assign(d, 0.0);
  for (const auto& row : X) {
    for (std::size_t j = 0; j < d; ++j) m.mean[j] += row[j];
  }
  for (double& v : m.mean) v /= static_cast<double>(n);
  for (const auto& row : X) {
    for (std::size_t j = 0; j < d; ++j) m.scale[j] += (row[j] - m.mean[j]) * (row[j] - m.mean[j]);
  }
  for (double& v : m.scale) {
    v = std::sqrt(v / static_cast<double>(n));
    if (!(v > 1e-12)) v = 1.0;
  }
  std::vector<std::vector<double>> Xs;
  Xs.reserve(n);
  for (const auto& row : X) Xs.push_back(standardized(m, row));

  core::Rng rng(config.seed);
  std::size_t fan_in = d;
  std::vector<int> widths = config.hidden_layers;
  widths.push_back(1);
  for (int w : widths) {
    DenseLayer L;
    L.in = fan_in;
    L.out = static_cast<std::size_t>(w);
    const double limit = std::sqrt(6.0 / static_cast<double>(L.in + L.out));
    L.weights.resize(L.in * L.out);
    for (double& v : L.weights) v = rng.uniform(-limit, limit);
    L.bias.assign(L.out, 0.0);
    m.layers.push_back(std::move(L));
    fan_in = static_cast<std::size_t>(w);
  }

  std::vector<double> params = flatten_parameters(m);
  std::vector<double> m1(params.size(), 0.0), m2(params.size(), 0.0);
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long long step = 0;

  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  double best_loss = std::numeric_limits<double>::infinity();
  int stale = 0;
  int epochs = 0;
  bool converged = false;
  std::vector<std::vector<double>> bx;
  std::vector<int> by;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    ++epochs;
    rng.shuffle(std::span(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      bx.clear();
      by.clear();
      for (std::size_t k = start; k < end; ++k) {
        bx.push_back(Xs[order[k]]);
        by.push_back(y[order[k]]);
      }
      const LossGradient lg = mlp_loss_gradient(m, bx, by, config.l2_alpha);
      epoch_loss += lg.loss * static_cast<double>(end - start);
      ++step;
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t k = 0; k < params.size(); ++k) {
        m1[k] = beta1 * m1[k] + (1.0 - beta1) * lg.gradient[k];
        m2[k] = beta2 * m2[k] + (1.0 - beta2) * lg.gradient[k] * lg.gradient[k];
        params[k] -= config.initial_learning_rate * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + eps);
      }
      assign_parameters(m, params);
    }
    epoch_loss /= static_cast<double>(n);
    if (epoch_loss > best_loss - config.tolerance) {
      if (++stale >= config.patience) {
        converged = true;
        break;
      }
    } else {
      stale = 0;
    }
    best_loss = std::min(best_loss, epoch_loss);
  }

  model.metadata = {{"config", config.to_json()},
                    {"epochs_run", epochs},
                    {"stopped_early", converged},
                    {"best_epoch_loss", best_loss},
                    {"importance_method", "permutation"}};
  return model;
}

}  // namespace promptroute::learners
