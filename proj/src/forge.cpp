#include "rashomon/forge.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>

#include "rashomon/error.hpp"
#include "rashomon/explain.hpp"
#include "rashomon/parallel.hpp"
#include "rashomon/rng.hpp"

namespace rashomon::forge {
namespace {

bool x1_on_top(const ImportanceReport& r) {
  const double x1 = r.features.at(0).importance;
  for (std::size_t j = 1; j < r.features.size(); ++j)
    if (!(x1 > r.features[j].importance)) return false;
  return true;
}

ImportanceReport importance_of(const Model& m, const Dataset& test,
                               const CandidateOptions& options) {
  ImportanceOptions io;
  io.seed = options.explain_seed;
  io.threads = 1;
  return permutation_importance(m, test, io);
}

// Checks that involve only the tree, linear model and forest.
void check_cheap_stories(const Model& tree, const Model& linear, const Model& forest,
                         const Dataset& test, const CandidateOptions& options,
                         StoryChecks& s, bool& cheap_x1_top) {
  const auto& lf = linear.as<LinearFit>();
  s.linear_ratio = lf.coefficients.size() >= 2 &&
                   lf.coefficients(0) > 3.0 * lf.coefficients(1);
  s.linear_x3_insignificant = lf.p_values.size() >= 4 && lf.p_values(3) >= 0.05;
  const auto splits = tree.as<TreeFit>().split_features();
  s.tree_x1_only = !splits.empty() &&
                   std::all_of(splits.begin(), splits.end(), [](int f) { return f == 0; });
  const auto forest_imp = importance_of(forest, test, options);
  s.forest_x3_positive =
      forest_imp.features.size() >= 3 && forest_imp.features[2].importance > 0.0;
  cheap_x1_top = x1_on_top(importance_of(tree, test, options)) &&
                 x1_on_top(importance_of(linear, test, options)) &&
                 x1_on_top(forest_imp);
}

void check_network_stories(const std::vector<Model>& quartet, const Dataset& test,
                           const CandidateOptions& options, StoryChecks& s,
                           bool& network_x1_top) {
  const Model& net = quartet[2];
  network_x1_top = x1_on_top(importance_of(net, test, options));
  const auto names = net.feature_names;
  s.network_x3_nonmonotonic =
      names.size() >= 3 &&
      is_non_monotonic(pdp(net, test, names[2]).pd, options.nonmonotone_tol);
  const auto corr = residual_correlation(residual_table(quartet, test));
  double lo = 1.0;
  bool defined = true;
  for (Eigen::Index i = 0; i < corr.values.rows(); ++i)
    for (Eigen::Index j = i + 1; j < corr.values.cols(); ++j) {
      if (!corr.defined(i, j)) defined = false;
      else lo = std::min(lo, corr.values(i, j));
    }
  s.min_residual_correlation = lo;
  s.residuals_correlated = defined && lo >= 0.8;
}

}  // namespace

StoryChecks check_stories(const std::vector<Model>& quartet, const Dataset& test,
                          const CandidateOptions& options) {
  if (quartet.size() != 4)
    throw InvalidArgument("check_stories expects tree, linear, network, forest");
  StoryChecks s;
  bool cheap_top = false, net_top = false;
  check_cheap_stories(quartet[0], quartet[1], quartet[3], test, options, s, cheap_top);
  check_network_stories(quartet, test, options, s, net_top);
  s.x1_top_importance = cheap_top && net_top;
  s.evaluated = true;
  return s;
}

QuartetRun evaluate_candidate(const GenConfig& config, std::uint64_t seed,
                              const CandidateOptions& options) {
  if (options.network_inits < 1) throw InvalidArgument("network_inits must be >= 1");
  QuartetRun run;
  run.config = config;
  run.config.seed = seed;
  run.seed = seed;
  const auto [train, test] = generate(run.config);
  const Eigen::VectorXd y = test.target();

  Model tree = fit_tree(train, options.tree);
  tree.label = kTreeLabel;
  Model linear = fit_linear(train);
  linear.label = kLinearLabel;
  ForestParams fp = options.forest;
  fp.seed = substream_seed(seed, "forge/forest");
  Model forest = fit_forest(train, fp);
  forest.label = kForestLabel;

  const Metrics m_tree = score(predict(tree, test), y, kTreeLabel);
  const Metrics m_linear = score(predict(linear, test), y, kLinearLabel);
  const Metrics m_forest = score(predict(forest, test), y, kForestLabel);
  const double cheap_lo = std::min({m_tree.r2, m_linear.r2, m_forest.r2});
  const double cheap_hi = std::max({m_tree.r2, m_linear.r2, m_forest.r2});
  run.perf.n_test = static_cast<int>(test.rows());

  if (cheap_hi - cheap_lo > options.prune_spread) {
    run.status = "pruned";
    run.perf.models = {m_tree, m_linear, m_forest};
    run.spread = cheap_hi - cheap_lo;
    return run;
  }

  StoryChecks stories;
  bool cheap_top = false;
  if (options.require_stories) {
    check_cheap_stories(tree, linear, forest, test, options, stories, cheap_top);
    if (!(stories.linear_ratio && stories.linear_x3_insignificant &&
          stories.tree_x1_only && stories.forest_x3_positive && cheap_top)) {
      run.status = "stories_failed";
      run.perf.models = {m_tree, m_linear, m_forest};
      run.spread = cheap_hi - cheap_lo;
      stories.evaluated = true;
      run.stories = stories;
      return run;
    }
  }

  std::optional<Model> best_net;
  Metrics best_metrics;
  double best_spread = 0.0;
  bool any_converged = false;
  for (int i = 0; i < options.network_inits; ++i) {
    NetworkParams np = options.network;
    np.seed = substream_seed(seed, "forge/network", static_cast<std::uint64_t>(i));
    Model net = fit_network(train, np);
    net.label = kNetworkLabel;
    if (!net.as<NetworkFit>().converged) continue;
    any_converged = true;
    const Metrics m = score(predict(net, test), y, kNetworkLabel);
    const double spread = std::max(cheap_hi, m.r2) - std::min(cheap_lo, m.r2);
    const bool better = !best_net || (options.pick == NetworkPick::best_r2
                                          ? m.r2 > best_metrics.r2
                                          : spread < best_spread);
    if (!better) continue;
    if (options.require_stories) {
      StoryChecks trial = stories;
      bool net_top = false;
      check_network_stories({tree, linear, net, forest}, test, options, trial, net_top);
      if (!(net_top && trial.network_x3_nonmonotonic && trial.residuals_correlated))
        continue;
    }
    best_net = std::move(net);
    best_metrics = m;
    best_spread = spread;
    run.network_init = i;
    if (best_spread <= options.accept_spread) break;
  }

  if (!best_net) {
    run.status = any_converged ? "stories_failed" : "network_not_converged";
    run.perf.models = {m_tree, m_linear, m_forest};
    run.spread = cheap_hi - cheap_lo;
    return run;
  }

  run.network_epochs = best_net->as<NetworkFit>().epochs;
  run.perf.models = {m_tree, m_linear, best_metrics, m_forest};
  run.spread = run.perf.r2_spread();
  std::vector<Model> quartet{std::move(tree), std::move(linear), std::move(*best_net),
                             std::move(forest)};
  run.stories = check_stories(quartet, test, options);
  run.valid = !options.require_stories || run.stories.all();
  run.status = run.valid ? "ok" : "stories_failed";
  if (options.keep_models) run.models = std::move(quartet);
  return run;
}

void SearchPlan::validate() const {
  if (theta1.empty() || theta2.empty() || rho.empty())
    throw InvalidArgument("search grids must be nonempty");
  if (budget < 1) throw InvalidArgument("budget must be >= 1");
  if (seed_count < 1) throw InvalidArgument("seed_count must be >= 1");
  GenConfig probe = base;
  for (double r : rho) {
    probe.rho = r;
    probe.validate();
  }
}

namespace {

bool same_config(const GenConfig& a, const GenConfig& b) {
  return a.theta1 == b.theta1 && a.theta2 == b.theta2 && a.rho == b.rho &&
         a.sigma_eps == b.sigma_eps && a.n_features == b.n_features &&
         a.n_train == b.n_train && a.n_test == b.n_test;
}

bool ranked_before(const QuartetRun& a, const QuartetRun& b) {
  if (a.spread != b.spread) return a.spread < b.spread;
  return a.seed < b.seed;
}

std::vector<QuartetRun> sweep_config(const GenConfig& config, const SearchPlan& plan,
                                     std::uint64_t count,
                                     const std::vector<QuartetRun>& completed,
                                     const RunCallback& on_run,
                                     std::vector<QuartetRun>* all_runs) {
  std::map<std::uint64_t, const QuartetRun*> done;
  for (const auto& r : completed)
    if (same_config(r.config, config)) done.emplace(r.seed, &r);

  std::vector<QuartetRun> runs(count);
  std::mutex callback_mutex;
  parallel_for(count, plan.threads, [&](std::size_t k) {
    const std::uint64_t seed = plan.seed_first + k;
    if (auto it = done.find(seed); it != done.end()) {
      runs[k] = *it->second;
      return;
    }
    runs[k] = evaluate_candidate(config, seed, plan.candidate);
    if (on_run) {
      std::lock_guard lock(callback_mutex);
      on_run(runs[k]);
    }
  });

  std::vector<QuartetRun> ranked;
  for (const auto& r : runs)
    if (r.valid) ranked.push_back(r);
  std::sort(ranked.begin(), ranked.end(), ranked_before);
  if (all_runs) all_runs->insert(all_runs->end(), runs.begin(), runs.end());
  return ranked;
}

}  // namespace

std::vector<QuartetRun> seed_sweep(const SearchPlan& plan,
                                   const std::vector<QuartetRun>& completed,
                                   const RunCallback& on_run,
                                   std::vector<QuartetRun>* all_runs) {
  plan.validate();
  GenConfig config = plan.base;
  config.theta1 = plan.theta1.front();
  config.theta2 = plan.theta2.front();
  config.rho = plan.rho.front();
  const auto count = std::min<std::uint64_t>(plan.seed_count,
                                             static_cast<std::uint64_t>(plan.budget));
  return sweep_config(config, plan, count, completed, on_run, all_runs);
}

std::vector<GridPoint> theta_grid_search(const SearchPlan& plan,
                                         const std::vector<QuartetRun>& completed,
                                         const RunCallback& on_run) {
  plan.validate();
  const std::size_t points = plan.theta1.size() * plan.theta2.size() * plan.rho.size();
  const auto inner = std::min<std::uint64_t>(
      plan.seed_count,
      std::max<std::uint64_t>(1, static_cast<std::uint64_t>(plan.budget) / points));

  std::vector<GridPoint> out;
  for (double t1 : plan.theta1)
    for (double t2 : plan.theta2)
      for (double r : plan.rho) {
        GenConfig config = plan.base;
        config.theta1 = t1;
        config.theta2 = t2;
        config.rho = r;
        std::vector<QuartetRun> all;
        auto ranked = sweep_config(config, plan, inner, completed, on_run, &all);
        GridPoint gp{t1, t2, r, static_cast<int>(all.size()),
                     static_cast<int>(ranked.size()), std::nullopt};
        if (!ranked.empty()) gp.best = std::move(ranked.front());
        out.push_back(std::move(gp));
      }
  std::stable_sort(out.begin(), out.end(), [](const GridPoint& a, const GridPoint& b) {
    if (a.best.has_value() != b.best.has_value()) return a.best.has_value();
    if (!a.best) return false;
    return a.best->spread < b.best->spread;
  });
  return out;
}

nlohmann::json run_to_json(const QuartetRun& run) {
  nlohmann::json r2 = nlohmann::json::object(), rmse = nlohmann::json::object();
  for (const auto& m : run.perf.models) {
    r2[m.label] = m.r2;
    rmse[m.label] = m.rmse;
  }
  const auto& s = run.stories;
  return {{"theta1", run.config.theta1},
          {"theta2", run.config.theta2},
          {"rho", run.config.rho},
          {"sigma_eps", run.config.sigma_eps},
          {"n_features", run.config.n_features},
          {"n_train", run.config.n_train},
          {"n_test", run.config.n_test},
          {"seed", run.seed},
          {"valid", run.valid},
          {"status", run.status},
          {"spread", run.spread},
          {"r2", r2},
          {"rmse", rmse},
          {"network_init", run.network_init},
          {"network_epochs", run.network_epochs},
          {"stories",
           {{"evaluated", s.evaluated},
            {"linear_ratio", s.linear_ratio},
            {"linear_x3_insignificant", s.linear_x3_insignificant},
            {"tree_x1_only", s.tree_x1_only},
            {"forest_x3_positive", s.forest_x3_positive},
            {"x1_top_importance", s.x1_top_importance},
            {"network_x3_nonmonotonic", s.network_x3_nonmonotonic},
            {"min_residual_correlation", s.min_residual_correlation},
            {"residuals_correlated", s.residuals_correlated}}}};
}

QuartetRun run_from_json(const nlohmann::json& j) {
  try {
    QuartetRun run;
    run.config.theta1 = j.at("theta1").get<double>();
    run.config.theta2 = j.at("theta2").get<double>();
    run.config.rho = j.at("rho").get<double>();
    run.config.sigma_eps = j.at("sigma_eps").get<double>();
    run.config.n_features = j.at("n_features").get<int>();
    run.config.n_train = j.at("n_train").get<int>();
    run.config.n_test = j.at("n_test").get<int>();
    run.seed = j.at("seed").get<std::uint64_t>();
    run.config.seed = run.seed;
    run.valid = j.at("valid").get<bool>();
    run.status = j.at("status").get<std::string>();
    run.spread = j.at("spread").get<double>();
    run.network_init = j.at("network_init").get<int>();
    run.network_epochs = j.at("network_epochs").get<long>();
    run.perf.n_test = run.config.n_test;
    const auto& r2 = j.at("r2");
    const auto& rmse = j.at("rmse");
    for (const char* label : {kTreeLabel, kLinearLabel, kNetworkLabel, kForestLabel}) {
      if (!r2.contains(label)) continue;
      Metrics m;
      m.label = label;
      m.r2 = r2.at(label).get<double>();
      m.rmse = rmse.at(label).get<double>();
      m.mse = m.rmse * m.rmse;
      run.perf.models.push_back(m);
    }
    const auto& s = j.at("stories");
    run.stories.evaluated = s.at("evaluated").get<bool>();
    run.stories.linear_ratio = s.at("linear_ratio").get<bool>();
    run.stories.linear_x3_insignificant = s.at("linear_x3_insignificant").get<bool>();
    run.stories.tree_x1_only = s.at("tree_x1_only").get<bool>();
    run.stories.forest_x3_positive = s.at("forest_x3_positive").get<bool>();
    run.stories.x1_top_importance = s.at("x1_top_importance").get<bool>();
    run.stories.network_x3_nonmonotonic = s.at("network_x3_nonmonotonic").get<bool>();
    run.stories.min_residual_correlation = s.at("min_residual_correlation").get<double>();
    run.stories.residuals_correlated = s.at("residuals_correlated").get<bool>();
    return run;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid run record: ") + e.what(), 0);
  }
}

std::string runs_to_jsonl(const std::vector<QuartetRun>& runs) {
  std::string out;
  for (const auto& r : runs) out += run_to_json(r).dump() + "\n";
  return out;
}

std::vector<QuartetRun> runs_from_jsonl(const std::string& text) {
  std::vector<QuartetRun> runs;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      runs.push_back(run_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), number);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), number);
    }
  }
  return runs;
}

}  // namespace rashomon::forge
