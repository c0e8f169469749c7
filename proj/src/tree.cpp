#include <algorithm>
#include <numeric>
#include <vector>

#include "rashomon/error.hpp"
#include "rashomon/model.hpp"
#include "rashomon/rng.hpp"

namespace rashomon {

double TreeFit::predict_row(std::span<const double> row) const {
  int k = 0;
  while (!nodes[static_cast<std::size_t>(k)].is_leaf()) {
    const auto& node = nodes[static_cast<std::size_t>(k)];
    k = row[static_cast<std::size_t>(node.feature)] <= node.threshold
            ? node.left
            : node.right;
  }
  return nodes[static_cast<std::size_t>(k)].value;
}

int TreeFit::depth() const {
  int d = 0;
  for (const auto& node : nodes) d = std::max(d, node.depth);
  return d;
}

std::vector<int> TreeFit::split_features() const {
  std::vector<int> out;
  for (const auto& node : nodes)
    if (!node.is_leaf()) out.push_back(node.feature);
  return out;
}

namespace tree {
namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  Eigen::Index left_count = 0;
};

class Grower {
 public:
  Grower(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
         const GrowOptions& options, Rng* rng)
      : x_(x), y_(y), options_(options), rng_(rng) {
    const int p = static_cast<int>(x.cols());
    mtry_ = (options.mtry <= 0 || options.mtry >= p) ? p : options.mtry;
    if (mtry_ < p && rng_ == nullptr)
      throw InvalidArgument("tree::grow: feature sampling requires an rng");
    features_.resize(static_cast<std::size_t>(p));
    std::iota(features_.begin(), features_.end(), 0);
  }

  TreeFit run(std::vector<Eigen::Index> rows) {
    fit_.max_depth = options_.max_depth;
    fit_.min_split = options_.min_split;
    if (rows.empty()) {
      fit_.nodes.push_back(TreeNode{});
      return std::move(fit_);
    }
    build(rows, 0);
    return std::move(fit_);
  }

 private:
  int build(std::span<Eigen::Index> rows, int depth) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    double sum = 0.0;
    double lo = y_(rows[0]), hi = y_(rows[0]);
    for (auto r : rows) {
      sum += y_(r);
      lo = std::min(lo, y_(r));
      hi = std::max(hi, y_(r));
    }
    const int index = static_cast<int>(fit_.nodes.size());
    TreeNode node;
    node.value = sum / static_cast<double>(n);
    node.count = static_cast<int>(n);
    node.depth = depth;
    fit_.nodes.push_back(node);

    const bool depth_ok = options_.max_depth < 0 || depth < options_.max_depth;
    if (!depth_ok || n < options_.min_split || n < 2 || lo == hi) return index;

    double sse = 0.0;
    for (auto r : rows) {
      const double d = y_(r) - node.value;
      sse += d * d;
    }
    const Split split = best_split(rows, sum, sse);
    if (split.feature < 0) return index;

    const auto mid = std::stable_partition(
        rows.begin(), rows.end(), [&](Eigen::Index r) {
          return x_(r, split.feature) <= split.threshold;
        });
    const auto left_size = static_cast<std::size_t>(mid - rows.begin());
    const int left = build(rows.first(left_size), depth + 1);
    const int right = build(rows.subspan(left_size), depth + 1);
    auto& stored = fit_.nodes[static_cast<std::size_t>(index)];
    stored.feature = split.feature;
    stored.threshold = split.threshold;
    stored.left = left;
    stored.right = right;
    return index;
  }

  std::vector<int> candidate_features() {
    if (mtry_ == static_cast<int>(features_.size())) return features_;
    std::vector<int> pool = features_;
    // Partial Fisher-Yates: the first mtry slots become the sample.
    for (int i = 0; i < mtry_; ++i) {
      const auto j = static_cast<std::size_t>(i) +
                     static_cast<std::size_t>(rng_->uniform_index(
                         pool.size() - static_cast<std::size_t>(i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(mtry_));
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  Split best_split(std::span<const Eigen::Index> rows, double sum,
                   double sse) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    const double base = sum * sum / static_cast<double>(n);
    // Gains below this are rounding noise, not a strict SSE decrease.
    const double min_gain = 1e-12 * std::max(sse, 1e-300);
    Split best;
    order_.assign(rows.begin(), rows.end());
    for (int f : candidate_features()) {
      std::sort(order_.begin(), order_.end(),
                [&](Eigen::Index a, Eigen::Index b) {
                  const double xa = x_(a, f), xb = x_(b, f);
                  return xa < xb || (xa == xb && a < b);
                });
      double left_sum = 0.0;
      for (Eigen::Index k = 1; k < n; ++k) {
        left_sum += y_(order_[static_cast<std::size_t>(k - 1)]);
        const double x_prev = x_(order_[static_cast<std::size_t>(k - 1)], f);
        const double x_next = x_(order_[static_cast<std::size_t>(k)], f);
        if (!(x_prev < x_next)) continue;
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(k) +
                            right_sum * right_sum / static_cast<double>(n - k) -
                            base;
        if (gain > best.gain && gain > min_gain) {
          double threshold = 0.5 * (x_prev + x_next);
          if (!(threshold < x_next)) threshold = x_prev;
          best = Split{f, threshold, gain, k};
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  GrowOptions options_;
  Rng* rng_;
  int mtry_ = 0;
  std::vector<int> features_;
  std::vector<Eigen::Index> order_;
  TreeFit fit_;
};

}  // namespace

TreeFit grow(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
             std::span<const Eigen::Index> rows, const GrowOptions& options,
             Rng* rng) {
  Grower grower(x, y, options, rng);
  return grower.run(std::vector<Eigen::Index>(rows.begin(), rows.end()));
}

}  // namespace tree

Model fit_tree(const Dataset& train, const TreeParams& params) {
  if (params.max_depth < 0) throw InvalidArgument("max_depth must be >= 0");
  const Eigen::MatrixXd x = train.features();
  const Eigen::VectorXd y = train.target();
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});

  tree::GrowOptions options;
  options.max_depth = params.max_depth;
  options.min_split = params.min_split;
  Model model;
  model.family = Family::tree;
  model.label = "decision tree";
  model.feature_names = train.feature_names();
  model.target_name = train.target_name();
  model.fit = tree::grow(x, y, rows, options, nullptr);
  return model;
}

}  // namespace rashomon
