#include <cmath>
#include <limits>

#include "rashomon/error.hpp"
#include "rashomon/model.hpp"
#include "rashomon/rng.hpp"

namespace rashomon {
namespace network {
namespace {

using MatrixMap = Eigen::Map<const Eigen::MatrixXd>;
using VectorMap = Eigen::Map<const Eigen::VectorXd>;

Eigen::Index parameter_count(const std::vector<int>& layers) {
  Eigen::Index count = 0;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l)
    count += static_cast<Eigen::Index>(layers[l + 1]) * (layers[l] + 1);
  return count;
}

// Forward and backward pass over a flat parameter vector. Buffers are kept
// between calls so training allocates only once.
class Evaluator {
 public:
  explicit Evaluator(std::vector<int> layers) : layers_(std::move(layers)) {
    activations_.resize(layers_.size());
    deltas_.resize(layers_.size());
  }

  double run(const Eigen::VectorXd& params, const Eigen::MatrixXd& x,
             const Eigen::VectorXd* y, Eigen::VectorXd* gradient,
             Eigen::VectorXd* output) {
    const std::size_t n_layers = layers_.size() - 1;
    activations_[0] = x;
    Eigen::Index offset = 0;
    offsets_.clear();
    for (std::size_t l = 0; l < n_layers; ++l) {
      const int in = layers_[l], out = layers_[l + 1];
      offsets_.push_back(offset);
      const MatrixMap w(params.data() + offset, out, in);
      const VectorMap b(params.data() + offset + static_cast<Eigen::Index>(out) * in, out);
      offset += static_cast<Eigen::Index>(out) * (in + 1);
      auto& next = activations_[l + 1];
      next.noalias() = activations_[l] * w.transpose();
      next.rowwise() += b.transpose();
      if (l + 1 < n_layers)
        next = (1.0 + (-next.array()).exp()).inverse().matrix();
    }
    const auto& out = activations_.back();
    if (output) *output = out.col(0);
    if (!y) return 0.0;

    auto& delta = deltas_[n_layers];
    delta = out;
    delta.col(0) -= *y;
    const double loss = 0.5 * delta.squaredNorm();
    if (!gradient) return loss;

    gradient->resize(params.size());
    for (std::size_t l = n_layers; l-- > 0;) {
      const int in = layers_[l], out_size = layers_[l + 1];
      const Eigen::Index o = offsets_[l];
      Eigen::Map<Eigen::MatrixXd> gw(gradient->data() + o, out_size, in);
      Eigen::Map<Eigen::VectorXd> gb(
          gradient->data() + o + static_cast<Eigen::Index>(out_size) * in, out_size);
      const auto& d = deltas_[l + 1];
      gw.noalias() = d.transpose() * activations_[l];
      gb = d.colwise().sum().transpose();
      if (l == 0) break;
      const MatrixMap w(params.data() + o, out_size, in);
      auto& prev = deltas_[l];
      prev.noalias() = d * w;
      const auto& a = activations_[l];
      prev.array() *= a.array() * (1.0 - a.array());
    }
    return loss;
  }

 private:
  std::vector<int> layers_;
  std::vector<Eigen::MatrixXd> activations_;
  std::vector<Eigen::MatrixXd> deltas_;
  std::vector<Eigen::Index> offsets_;
};

void check_layers(const std::vector<int>& layers) {
  if (layers.size() < 2) throw InvalidArgument("network needs >= 2 layers");
  for (int size : layers)
    if (size < 1) throw InvalidArgument("layer sizes must be positive");
  if (layers.back() != 1) throw InvalidArgument("network output must be scalar");
}

}  // namespace

NetworkFit initialize(const std::vector<int>& layers, std::uint64_t seed) {
  check_layers(layers);
  NetworkFit net;
  net.layers = layers;
  Rng rng = substream(seed, "network/init");
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    Eigen::MatrixXd w(layers[l + 1], layers[l]);
    Eigen::VectorXd b(layers[l + 1]);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.normal();
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = rng.normal();
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  return net;
}

Eigen::VectorXd flatten(const NetworkFit& net) {
  Eigen::VectorXd params(parameter_count(net.layers));
  Eigen::Index o = 0;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const auto& w = net.weights[l];
    params.segment(o, w.size()) = w.reshaped();
    o += w.size();
    params.segment(o, net.biases[l].size()) = net.biases[l];
    o += net.biases[l].size();
  }
  return params;
}

void unflatten(NetworkFit& net, const Eigen::VectorXd& params) {
  if (params.size() != parameter_count(net.layers))
    throw SchemaError("parameter vector has wrong length");
  net.weights.resize(net.layers.size() - 1);
  net.biases.resize(net.layers.size() - 1);
  Eigen::Index o = 0;
  for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) {
    const int in = net.layers[l], out = net.layers[l + 1];
    net.weights[l] = MatrixMap(params.data() + o, out, in);
    o += static_cast<Eigen::Index>(out) * in;
    net.biases[l] = VectorMap(params.data() + o, out);
    o += out;
  }
}

Eigen::VectorXd forward(const NetworkFit& net, const Eigen::MatrixXd& x) {
  if (x.cols() != net.layers.front())
    throw SchemaError("network expects " + std::to_string(net.layers.front()) +
                      " input columns");
  Evaluator eval(net.layers);
  Eigen::VectorXd out;
  eval.run(flatten(net), x, nullptr, nullptr, &out);
  return out;
}

double loss_and_gradient(const NetworkFit& net, const Eigen::MatrixXd& x,
                         const Eigen::VectorXd& y, Eigen::VectorXd* gradient) {
  Evaluator eval(net.layers);
  return eval.run(flatten(net), x, &y, gradient, nullptr);
}

// RPROP+ (with weight backtracking): a sign change of the partial derivative
// shrinks the step and reverts the previous update; an unchanged sign grows it.
void train_rprop(NetworkFit& net, const Eigen::MatrixXd& x,
                 const Eigen::VectorXd& y, const RpropConstants& c) {
  Evaluator eval(net.layers);
  Eigen::VectorXd params = flatten(net);
  const Eigen::Index m = params.size();
  Eigen::VectorXd step = Eigen::VectorXd::Constant(m, c.delta_init);
  Eigen::VectorXd prev_grad = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd prev_update = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd grad;

  net.converged = false;
  net.epochs = 0;
  for (;;) {
    eval.run(params, x, &y, &grad, nullptr);
    const double max_grad = grad.cwiseAbs().maxCoeff();
    net.max_gradient = max_grad;
    if (!std::isfinite(max_grad)) break;
    if (max_grad < net.grad_threshold) {
      net.converged = true;
      break;
    }
    if (net.epochs >= net.max_epochs) break;

    for (Eigen::Index i = 0; i < m; ++i) {
      const double g = grad(i);
      const double sign_change = g * prev_grad(i);
      if (sign_change > 0.0) {
        step(i) = std::min(step(i) * c.eta_plus, c.delta_max);
        prev_update(i) = g > 0.0 ? -step(i) : (g < 0.0 ? step(i) : 0.0);
        params(i) += prev_update(i);
        prev_grad(i) = g;
      } else if (sign_change < 0.0) {
        step(i) = std::max(step(i) * c.eta_minus, c.delta_min);
        params(i) -= prev_update(i);
        prev_update(i) = 0.0;
        prev_grad(i) = 0.0;
      } else {
        prev_update(i) = g > 0.0 ? -step(i) : (g < 0.0 ? step(i) : 0.0);
        params(i) += prev_update(i);
        prev_grad(i) = g;
      }
    }
    ++net.epochs;
  }
  unflatten(net, params);
}

}  // namespace network

Model fit_network(const Dataset& train, const NetworkParams& params) {
  if (train.rows() < 1) throw InvalidArgument("fit_network needs >= 1 row");
  if (params.max_epochs < 0) throw InvalidArgument("max_epochs must be >= 0");
  const Eigen::MatrixXd x = train.features();
  std::vector<int> layers{static_cast<int>(x.cols())};
  layers.insert(layers.end(), params.hidden.begin(), params.hidden.end());
  layers.push_back(1);

  NetworkFit net = network::initialize(layers, params.seed);
  net.grad_threshold = params.grad_threshold;
  net.max_epochs = params.max_epochs;
  network::train_rprop(net, x, train.target(), params.rprop);

  Model model;
  model.family = Family::network;
  model.label = "neural network";
  model.feature_names = train.feature_names();
  model.target_name = train.target_name();
  model.seed = params.seed;
  model.fit = std::move(net);
  return model;
}

}  // namespace rashomon
