#include <set>

#include "doctest.h"
#include "rashomon/error.hpp"
#include "rashomon/eval.hpp"
#include "rashomon/model.hpp"
#include "rashomon/rng.hpp"
#include "rashomon/synth.hpp"

using namespace rashomon;

namespace {

Dataset small_data(int n, std::uint64_t seed) {
  GenConfig c;
  c.n_train = n;
  c.n_test = 1;
  c.seed = seed;
  return generate(c).first;
}

Eigen::VectorXd row(const Eigen::MatrixXd& x, Eigen::Index i) { return x.row(i).transpose(); }

}  // namespace

TEST_CASE("forest prediction is the mean of its trees") {
  const Dataset train = small_data(300, 3);
  ForestParams p;
  p.n_trees = 25;
  const Model m = fit_forest(train, p);
  const auto& fit = m.as<ForestFit>();
  const Eigen::MatrixXd x = small_data(50, 4).features();
  const Eigen::VectorXd pred = predict(m, x);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::VectorXd r = row(x, i);
    double sum = 0.0;
    for (const auto& t : fit.trees) sum += t.predict_row(std::span<const double>(r.data(), 3));
    CHECK(std::abs(pred(i) - sum / 25.0) < 1e-12);
  }
}

TEST_CASE("out-of-bag error excludes in-bag trees") {
  const Dataset train = small_data(20, 9);
  ForestParams p;
  p.n_trees = 10;
  p.min_node = 2;
  p.seed = 77;
  const Model m = fit_forest(train, p);
  const auto& fit = m.as<ForestFit>();
  const Eigen::MatrixXd x = train.features();
  const Eigen::VectorXd y = train.target();

  // The recorded bootstrap must be the draw of each tree's own stream.
  for (std::size_t t = 0; t < 10; ++t) {
    Rng rng = substream(77, "forest/tree", t);
    REQUIRE(fit.bootstrap[t].size() == 20);
    for (std::size_t i = 0; i < 20; ++i) CHECK(fit.bootstrap[t][i] == rng.uniform_index(20));
  }

  // Exhaustive recomputation over every (row, tree) pair.
  double sse = 0.0;
  int rows = 0;
  for (Eigen::Index i = 0; i < 20; ++i) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t t = 0; t < 10; ++t) {
      const std::set<std::uint32_t> bag(fit.bootstrap[t].begin(), fit.bootstrap[t].end());
      if (bag.count(static_cast<std::uint32_t>(i))) continue;
      const Eigen::VectorXd r = row(x, i);
      sum += fit.trees[t].predict_row(std::span<const double>(r.data(), 3));
      ++count;
    }
    if (count == 0) continue;
    sse += (y(i) - sum / count) * (y(i) - sum / count);
    ++rows;
  }
  CHECK(fit.oob_rows == rows);
  CHECK(fit.oob_mse == doctest::Approx(sse / rows).epsilon(1e-12));
}

TEST_CASE("forest is independent of thread count") {
  const Dataset train = small_data(400, 5);
  ForestParams p;
  p.n_trees = 20;
  p.threads = 1;
  const Model a = fit_forest(train, p);
  p.threads = 8;
  const Model b = fit_forest(train, p);
  const Eigen::MatrixXd x = train.features();
  CHECK((predict(a, x) - predict(b, x)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.as<ForestFit>().oob_mse == b.as<ForestFit>().oob_mse);
  CHECK(a.as<ForestFit>().bootstrap == b.as<ForestFit>().bootstrap);
}

TEST_CASE("without bootstrap or feature sampling every tree is the same") {
  const Dataset train = small_data(100, 6);
  ForestParams p;
  p.n_trees = 4;
  p.bootstrap = false;
  p.mtry = 3;
  const auto fit = fit_forest(train, p).as<ForestFit>();
  CHECK(fit.oob_rows == 0);
  for (std::size_t t = 1; t < 4; ++t) {
    REQUIRE(fit.trees[t].nodes.size() == fit.trees[0].nodes.size());
    for (std::size_t k = 0; k < fit.trees[0].nodes.size(); ++k) {
      CHECK(fit.trees[t].nodes[k].feature == fit.trees[0].nodes[k].feature);
      CHECK(fit.trees[t].nodes[k].value == fit.trees[0].nodes[k].value);
    }
  }
}

TEST_CASE("default mtry and node size") {
  const Dataset train = small_data(200, 7);
  ForestParams p;
  p.n_trees = 5;
  const auto fit = fit_forest(train, p).as<ForestFit>();
  CHECK(fit.mtry == 1);
  for (const auto& t : fit.trees)
    for (const auto& node : t.nodes)
      if (!node.is_leaf()) CHECK(node.count >= 5);
  p.n_trees = 0;
  CHECK_THROWS_AS(fit_forest(train, p), InvalidArgument);
}

TEST_CASE("default forest on default data scores in the expected band") {
  const auto [train, test] = generate(GenConfig{});
  const Model m = fit_forest(train, ForestParams{});
  const Metrics s = score(predict(m, test), test.target());
  CHECK(s.r2 >= 0.65);
  CHECK(s.r2 <= 0.77);
}
