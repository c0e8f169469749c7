#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "rashomon/dataset.hpp"
#include "rashomon/rng.hpp"

namespace rashomon {

enum class Family { linear, tree, forest, network };

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

/// Ordinary least squares with intercept.
struct LinearFit {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  /// Entry 0 is the intercept; entries 1..p follow the coefficients.
  Eigen::VectorXd standard_errors;
  Eigen::VectorXd t_statistics;
  Eigen::VectorXd p_values;
  double residual_variance = 0.0;
  int residual_df = 0;
};

struct TreeNode {
  /// -1 marks a leaf.
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  /// Mean training target of the node.
  double value = 0.0;
  int count = 0;
  int depth = 0;

  bool is_leaf() const { return feature < 0; }
};

/// Binary regression tree; node 0 is the root. Rows with
/// x[feature] <= threshold go left.
struct TreeFit {
  std::vector<TreeNode> nodes;
  /// -1 means unlimited.
  int max_depth = 3;
  int min_split = 250;

  double predict_row(std::span<const double> row) const;
  int depth() const;
  /// Feature indices used by internal nodes, in node order.
  std::vector<int> split_features() const;
};

struct ForestFit {
  std::vector<TreeFit> trees;
  /// Row indices drawn for each tree, in draw order.
  std::vector<std::vector<std::uint32_t>> bootstrap;
  int mtry = 1;
  int min_node = 5;
  bool bootstrapped = true;
  double oob_mse = 0.0;
  /// Rows that were out of bag for at least one tree.
  int oob_rows = 0;
};

/// Fully connected network: logistic hidden layers, identity output.
/// weights[l] is (layers[l+1] x layers[l]).
struct NetworkFit {
  std::vector<int> layers;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  double grad_threshold = 0.05;
  long max_epochs = 100000;
  long epochs = 0;
  bool converged = false;
  /// Largest absolute partial derivative of the loss at the final weights.
  double max_gradient = 0.0;
};

/// A fitted predictor of one of the four families.
struct Model {
  Family family = Family::linear;
  std::string label;
  std::vector<std::string> feature_names;
  std::string target_name = "y";
  std::uint64_t seed = 0;
  std::variant<LinearFit, TreeFit, ForestFit, NetworkFit> fit;

  template <typename T>
  const T& as() const {
    return std::get<T>(fit);
  }
  int n_features() const { return static_cast<int>(feature_names.size()); }
};

struct TreeParams {
  int max_depth = 3;
  int min_split = 250;
};

struct ForestParams {
  int n_trees = 100;
  /// 0 selects max(1, floor(p / 3)).
  int mtry = 0;
  int min_node = 5;
  /// Debug switch: grow every tree on the full training set.
  bool bootstrap = true;
  std::uint64_t seed = 1568;
  std::size_t threads = 0;
};

/// RPROP+ constants.
struct RpropConstants {
  double eta_plus = 1.2;
  double eta_minus = 0.5;
  double delta_init = 0.1;
  double delta_max = 50.0;
  double delta_min = 1e-6;
};

struct NetworkParams {
  std::vector<int> hidden{8, 4};
  double grad_threshold = 0.05;
  long max_epochs = 100000;
  std::uint64_t seed = 1568;
  RpropConstants rprop{};
};

Model fit_linear(const Dataset& train);
Model fit_tree(const Dataset& train, const TreeParams& params = {});
Model fit_forest(const Dataset& train, const ForestParams& params = {});
Model fit_network(const Dataset& train, const NetworkParams& params = {});

/// One prediction per row of `x`, which must have the model's feature count.
Eigen::VectorXd predict(const Model& model, const Eigen::MatrixXd& x);
/// Predicts on the dataset's feature columns after checking their names.
Eigen::VectorXd predict(const Model& model, const Dataset& data);

namespace linear {
/// Coefficients (intercept first) solved from X'X b = X'y.
Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& x,
                                       const Eigen::VectorXd& y);
/// Coefficients (intercept first) from a Householder QR of [1 X].
/// Throws SingularError if [1 X] is rank deficient.
Eigen::VectorXd solve_qr(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
}  // namespace linear

namespace tree {

/// Options for growing one tree. mtry = 0 tries every feature at each split.
struct GrowOptions {
  int max_depth = -1;
  int min_split = 2;
  int mtry = 0;
};

/// Greedy SSE-reduction tree on the given rows (repeats allowed). `rng` is
/// required when 0 < mtry < p.
TreeFit grow(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
             std::span<const Eigen::Index> rows, const GrowOptions& options,
             Rng* rng);

}  // namespace tree

namespace network {

/// Fresh network with every weight and bias drawn from N(0, 1).
NetworkFit initialize(const std::vector<int>& layers, std::uint64_t seed);

Eigen::VectorXd forward(const NetworkFit& net, const Eigen::MatrixXd& x);

/// Parameters in a fixed order: for each layer, weights column-major, then
/// biases.
Eigen::VectorXd flatten(const NetworkFit& net);
void unflatten(NetworkFit& net, const Eigen::VectorXd& params);

/// Loss 0.5 * sum (out - y)^2 and its gradient in flatten() order.
double loss_and_gradient(const NetworkFit& net, const Eigen::MatrixXd& x,
                         const Eigen::VectorXd& y, Eigen::VectorXd* gradient);

/// Trains `net` in place with full-batch RPROP+.
void train_rprop(NetworkFit& net, const Eigen::MatrixXd& x,
                 const Eigen::VectorXd& y, const RpropConstants& constants);

}  // namespace network

}  // namespace rashomon
