#include <cmath>

#include "doctest.h"
#include "rashomon/error.hpp"
#include "rashomon/eval.hpp"
#include "rashomon/model.hpp"
#include "rashomon/rng.hpp"

using namespace rashomon;

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Eigen::MatrixXd gaussian(Rng& rng, int n, int p) {
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
  return x;
}

Dataset make(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::MatrixXd v(x.rows(), x.cols() + 1);
  v.col(0) = y;
  v.rightCols(x.cols()) = x;
  std::vector<std::string> names{"y"};
  for (Eigen::Index j = 0; j < x.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
  return Dataset(names, "y", v);
}

}  // namespace

TEST_CASE("forward pass matches a hand computation") {
  NetworkFit net = network::initialize({2, 2, 1}, 1);
  net.weights[0] << 0.5, -1.0, 2.0, 0.25;
  net.biases[0] << 0.1, -0.2;
  net.weights[1] << 1.5, -0.5;
  net.biases[1] << 0.3;
  Eigen::MatrixXd x(1, 2);
  x << 0.4, -0.8;
  const double h0 = logistic(0.5 * 0.4 - 1.0 * -0.8 + 0.1);
  const double h1 = logistic(2.0 * 0.4 + 0.25 * -0.8 - 0.2);
  const double expected = 1.5 * h0 - 0.5 * h1 + 0.3;
  CHECK(network::forward(net, x)(0) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("flatten order and round trip") {
  NetworkFit net = network::initialize({3, 8, 4, 1}, 9);
  const Eigen::VectorXd flat = network::flatten(net);
  CHECK(flat.size() == 3 * 8 + 8 + 8 * 4 + 4 + 4 + 1);
  // Column-major weights of the first layer, then its biases.
  CHECK(flat(0) == net.weights[0](0, 0));
  CHECK(flat(1) == net.weights[0](1, 0));
  CHECK(flat(8) == net.weights[0](0, 1));
  CHECK(flat(24) == net.biases[0](0));
  CHECK(flat(32) == net.weights[1](0, 0));
  NetworkFit other = network::initialize({3, 8, 4, 1}, 10);
  network::unflatten(other, flat);
  CHECK(network::flatten(other) == flat);
}

TEST_CASE("initial weights are standard normal and seeded") {
  const NetworkFit a = network::initialize({3, 8, 4, 1}, 1568);
  const NetworkFit b = network::initialize({3, 8, 4, 1}, 1568);
  const NetworkFit c = network::initialize({3, 8, 4, 1}, 1569);
  CHECK(network::flatten(a) == network::flatten(b));
  CHECK(network::flatten(a) != network::flatten(c));
  double s2 = 0.0;
  int n = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Eigen::VectorXd f = network::flatten(network::initialize({3, 8, 4, 1}, seed));
    s2 += f.squaredNorm();
    n += static_cast<int>(f.size());
  }
  CHECK(std::abs(s2 / n - 1.0) < 0.05);
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(31);
  const Eigen::MatrixXd x = gaussian(rng, 30, 3);
  Eigen::VectorXd y(30);
  for (int i = 0; i < 30; ++i) y(i) = std::sin(x(i, 0)) + 0.1 * rng.normal();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    NetworkFit net = network::initialize({3, 8, 4, 1}, seed);
    Eigen::VectorXd grad;
    network::loss_and_gradient(net, x, y, &grad);
    const Eigen::VectorXd base = network::flatten(net);
    const double h = 1e-6;
    for (Eigen::Index k = 0; k < base.size(); ++k) {
      Eigen::VectorXd plus = base, minus = base;
      plus(k) += h;
      minus(k) -= h;
      network::unflatten(net, plus);
      const double lp = network::loss_and_gradient(net, x, y, nullptr);
      network::unflatten(net, minus);
      const double lm = network::loss_and_gradient(net, x, y, nullptr);
      const double numeric = (lp - lm) / (2.0 * h);
      const double scale = std::max({std::abs(numeric), std::abs(grad(k)), 1e-3});
      CHECK(std::abs(numeric - grad(k)) / scale < 1e-4);
    }
    network::unflatten(net, base);
    const Eigen::VectorXd out = network::forward(net, x);
    CHECK(network::loss_and_gradient(net, x, y, nullptr) ==
          doctest::Approx(0.5 * (out - y).squaredNorm()).epsilon(1e-12));
  }
}

TEST_CASE("network learns a noise free linear target") {
  Rng rng(12);
  const Eigen::MatrixXd x = gaussian(rng, 200, 3);
  const Eigen::VectorXd y = x.col(0);
  NetworkParams p;
  p.grad_threshold = 0.01;
  const Model m = fit_network(make(x, y), p);
  CHECK(m.as<NetworkFit>().converged);
  const Eigen::MatrixXd xt = gaussian(rng, 500, 3);
  CHECK(score(predict(m, xt), xt.col(0)).r2 >= 0.99);
}

TEST_CASE("training lowers the loss and honours the epoch limit") {
  Rng rng(13);
  const Eigen::MatrixXd x = gaussian(rng, 100, 3);
  Eigen::VectorXd y(100);
  for (int i = 0; i < 100; ++i) y(i) = std::sin(x(i, 0) + 0.3 * x(i, 1));
  NetworkParams p;
  p.max_epochs = 10;
  const Model m = fit_network(make(x, y), p);
  const auto& fit = m.as<NetworkFit>();
  CHECK(fit.epochs == 10);
  CHECK_FALSE(fit.converged);
  const NetworkFit init = network::initialize({3, 8, 4, 1}, p.seed);
  CHECK(network::loss_and_gradient(fit, x, y, nullptr) <
        network::loss_and_gradient(init, x, y, nullptr));

  NetworkParams q;
  const Model a = fit_network(make(x, y), q);
  const Model b = fit_network(make(x, y), q);
  CHECK(network::flatten(a.as<NetworkFit>()) == network::flatten(b.as<NetworkFit>()));
  CHECK(a.as<NetworkFit>().max_gradient < q.grad_threshold);

  q.max_epochs = -1;
  CHECK_THROWS_AS(fit_network(make(x, y), q), InvalidArgument);
}
