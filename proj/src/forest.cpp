#include <algorithm>
#include <numeric>

#include "rashomon/error.hpp"
#include "rashomon/model.hpp"
#include "rashomon/parallel.hpp"
#include "rashomon/rng.hpp"

namespace rashomon {

Model fit_forest(const Dataset& train, const ForestParams& params) {
  const Eigen::MatrixXd x = train.features();
  const Eigen::VectorXd y = train.target();
  const Eigen::Index n = x.rows();
  const int p = static_cast<int>(x.cols());
  if (n < 2) throw InvalidArgument("fit_forest needs at least 2 rows");
  if (params.n_trees < 1) throw InvalidArgument("n_trees must be >= 1");

  ForestFit fit;
  fit.mtry = params.mtry > 0 ? std::min(params.mtry, p) : std::max(1, p / 3);
  fit.min_node = params.min_node;
  fit.bootstrapped = params.bootstrap;
  fit.trees.resize(static_cast<std::size_t>(params.n_trees));
  fit.bootstrap.resize(static_cast<std::size_t>(params.n_trees));

  tree::GrowOptions options;
  options.max_depth = -1;
  options.min_split = std::max(2, params.min_node);
  options.mtry = fit.mtry;

  parallel_for(static_cast<std::size_t>(params.n_trees), params.threads,
               [&](std::size_t t) {
                 Rng rng = substream(params.seed, "forest/tree", t);
                 std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
                 auto& drawn = fit.bootstrap[t];
                 drawn.resize(static_cast<std::size_t>(n));
                 for (Eigen::Index i = 0; i < n; ++i) {
                   const auto r = params.bootstrap
                                      ? rng.uniform_index(static_cast<std::uint64_t>(n))
                                      : static_cast<std::uint64_t>(i);
                   drawn[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(r);
                   rows[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(r);
                 }
                 fit.trees[t] = tree::grow(x, y, rows, options, &rng);
               });

  // Out-of-bag error: each row is scored only by trees that never drew it.
  Eigen::VectorXd oob_sum = Eigen::VectorXd::Zero(n);
  Eigen::VectorXi oob_count = Eigen::VectorXi::Zero(n);
  std::vector<char> in_bag(static_cast<std::size_t>(n));
  for (std::size_t t = 0; t < fit.trees.size(); ++t) {
    std::fill(in_bag.begin(), in_bag.end(), 0);
    for (auto r : fit.bootstrap[t]) in_bag[r] = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (in_bag[static_cast<std::size_t>(i)]) continue;
      const Eigen::VectorXd row = x.row(i).transpose();
      oob_sum(i) += fit.trees[t].predict_row(std::span<const double>(row.data(), row.size()));
      ++oob_count(i);
    }
  }
  double sse = 0.0;
  int counted = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (oob_count(i) == 0) continue;
    const double d = y(i) - oob_sum(i) / oob_count(i);
    sse += d * d;
    ++counted;
  }
  fit.oob_rows = counted;
  fit.oob_mse = counted > 0 ? sse / counted : 0.0;

  Model model;
  model.family = Family::forest;
  model.label = "random forest";
  model.feature_names = train.feature_names();
  model.target_name = train.target_name();
  model.seed = params.seed;
  model.fit = std::move(fit);
  return model;
}

}  // namespace rashomon
