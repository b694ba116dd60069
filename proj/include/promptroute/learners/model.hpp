#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "promptroute/core/errors.hpp"

namespace promptroute::learners {

// Rows of equal length; labels are 0 (native) or 1 (translate).
using Rows = std::span<const std::vector<double>>;
using Labels = std::span<const int>;

struct GbdtConfig {
  int n_estimators = 100;
  int max_depth = 6;
  double learning_rate = 0.3;
  double subsample = 1.0;
  double colsample_bytree = 1.0;
  double min_child_weight = 1.0;
  double l2_lambda = 1.0;
  double min_gain = 0.0;
  std::uint64_t seed = 0;

  void validate() const;  // throws core::ConfigError
  nlohmann::json to_json() const;
  static GbdtConfig from_json(const nlohmann::json& j);
};

struct MlpConfig {
  std::vector<int> hidden_layers{100};
  double l2_alpha = 1e-4;
  double initial_learning_rate = 1e-3;
  int max_epochs = 200;
  int batch_size = 200;  // clipped to the number of rows
  double tolerance = 1e-4;
  int patience = 10;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static MlpConfig from_json(const nlohmann::json& j);
};

// Tuned values per backbone; "ds" and "llama".
GbdtConfig gbdt_preset(std::string_view name);
MlpConfig mlp_preset(std::string_view name);

struct TreeNode {
  int feature = -1;  // -1 for a leaf
  double threshold = 0.0;
  int left = -1;  // x[feature] < threshold
  int right = -1;
  double value = 0.0;  // leaf weight, already scaled by the learning rate
  double gain = 0.0;
  double cover = 0.0;  // hessian sum

  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict(std::span<const double> x) const;
  bool operator==(const Tree&) const = default;
};

struct GbdtModel {
  double base_score = 0.0;  // margin
  std::vector<Tree> trees;

  double margin(std::span<const double> x) const;
  bool operator==(const GbdtModel&) const = default;
};

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;     // out

  bool operator==(const DenseLayer&) const = default;
};

struct MlpModel {
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<DenseLayer> layers;  // hidden layers (ReLU), then one sigmoid unit

  double logit(std::span<const double> x) const;  // x is unscaled
  bool operator==(const MlpModel&) const = default;
};

enum class ModelKind { gbdt, mlp };
std::string_view to_string(ModelKind k);
std::optional<ModelKind> parse_model_kind(std::string_view s);

struct TrainedModel {
  ModelKind kind = ModelKind::gbdt;
  std::vector<std::string> feature_names;
  GbdtModel gbdt;
  MlpModel mlp;
  // Per feature, in feature order; empty until computed.
  std::vector<double> importance;
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t n_features() const { return feature_names.size(); }
  bool operator==(const TrainedModel&) const = default;
};

// Throws core::DataError on shape problems, non-finite values, labels outside
// {0,1} or a single class.
void check_training_data(Rows X, Labels y);

TrainedModel train_gbdt(Rows X, Labels y, const GbdtConfig& config,
                        std::vector<std::string> feature_names = {});
TrainedModel train_mlp(Rows X, Labels y, const MlpConfig& config,
                       std::vector<std::string> feature_names = {});

// Probability of class 1 (translate), strictly inside (0,1).
double predict(const TrainedModel& model, std::span<const double> x);
// Aligns x to the model's feature order by name; names absent from the model
// are ignored, model features absent from `names` are an error.
double predict_named(const TrainedModel& model, std::span<const std::string> names, std::span<const double> x);
inline int decide(double p) { return p >= 0.5 ? 1 : 0; }

double sigmoid(double z);

// Mean cross-entropy plus alpha * sum of squared weights (biases excluded) on
// already-standardized inputs, with the gradient in parameter order: for each
// layer, weights then biases.
struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};
LossGradient mlp_loss_gradient(const MlpModel& model, Rows X_scaled, Labels y, double alpha);
std::vector<double> flatten_parameters(const MlpModel& model);
void assign_parameters(MlpModel& model, std::span<const double> params);

// Gain share (gbdt) or clipped permutation accuracy drop (mlp), normalized to
// sum 1 unless all zero. X_val/y_val are required for mlp.
std::vector<double> feature_importance(const TrainedModel& model, Rows X_val = {}, Labels y_val = {},
                                       int permutations = 5, std::uint64_t seed = 0);

// Sums importance by group; groups sorted by descending score then name.
std::vector<std::pair<std::string, double>> group_importance(
    const TrainedModel& model, const std::function<std::string(std::string_view)>& group_of);

class ModelFormatError : public core::DataError {
 public:
  using core::DataError::DataError;
};

void save_model(std::ostream& out, const TrainedModel& model);
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(std::istream& in, const std::string& source = "<stream>");
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace promptroute::learners
