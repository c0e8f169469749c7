#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rashomon/eval.hpp"
#include "rashomon/model.hpp"
#include "rashomon/synth.hpp"

namespace rashomon::forge {

/// Labels of the four quartet members, in report order.
inline const char* const kTreeLabel = "decision tree";
inline const char* const kLinearLabel = "linear regression";
inline const char* const kNetworkLabel = "neural network";
inline const char* const kForestLabel = "random forest";

/// How one of several network initialisations is kept.
enum class NetworkPick {
  /// Highest test R^2.
  best_r2,
  /// Smallest four-model R^2 spread.
  min_spread,
};

/// Qualitative behaviour of a quartet, each checked on the candidate's test
/// set.
struct StoryChecks {
  bool evaluated = false;
  /// Linear slope on x1 exceeds three times the slope on x2.
  bool linear_ratio = false;
  /// Linear slope on x3 has p >= 0.05.
  bool linear_x3_insignificant = false;
  /// Every tree split uses x1.
  bool tree_x1_only = false;
  /// Forest permutation importance of x3 is positive.
  bool forest_x3_positive = false;
  /// x1 has the largest permutation importance for all four models.
  bool x1_top_importance = false;
  /// Network partial dependence on x3 is non-monotonic.
  bool network_x3_nonmonotonic = false;
  double min_residual_correlation = 0.0;
  /// Every pairwise residual correlation is at least 0.8.
  bool residuals_correlated = false;

  bool all() const {
    return evaluated && linear_ratio && linear_x3_insignificant && tree_x1_only &&
           forest_x3_positive && x1_top_importance && network_x3_nonmonotonic &&
           residuals_correlated;
  }
};

struct CandidateOptions {
  TreeParams tree{};
  /// seed is replaced by a stream of the candidate seed.
  ForestParams forest{};
  /// seed is replaced by a stream of the candidate seed.
  NetworkParams network{};
  int network_inits = 5;
  NetworkPick pick = NetworkPick::min_spread;
  /// Mark the run invalid unless every story check passes.
  bool require_stories = false;
  /// Minimum bump height for the network x3 profile to count as non-monotonic.
  double nonmonotone_tol = 1e-6;
  /// Skip the network when tree, linear and forest already spread more than
  /// this; such runs are invalid with status "pruned".
  double prune_spread = std::numeric_limits<double>::infinity();
  /// Stop trying network initialisations once the spread is at most this.
  double accept_spread = -1.0;
  /// Seed of the permutation-importance shuffles used by the story checks.
  std::uint64_t explain_seed = 1568;
  bool keep_models = false;
};

/// One evaluated (config, seed) candidate.
struct QuartetRun {
  GenConfig config;
  std::uint64_t seed = 0;
  PerfReport perf;
  double spread = 0.0;
  bool valid = false;
  std::string status;
  int network_init = -1;
  long network_epochs = 0;
  StoryChecks stories;
  /// Tree, linear, network, forest when keep_models is set.
  std::vector<Model> models;
};

QuartetRun evaluate_candidate(const GenConfig& config, std::uint64_t seed,
                              const CandidateOptions& options = {});

StoryChecks check_stories(const std::vector<Model>& quartet, const Dataset& test,
                          const CandidateOptions& options);

struct SearchPlan {
  /// Sizes and noise; theta1/theta2/rho come from the grids below.
  GenConfig base{};
  std::vector<double> theta1{0.6};
  std::vector<double> theta2{1.0 / 3.0};
  std::vector<double> rho{0.9};
  std::uint64_t seed_first = 1;
  std::uint64_t seed_count = 2000;
  /// Maximum number of candidate evaluations.
  long budget = 2000;
  CandidateOptions candidate{};
  std::size_t threads = 0;

  void validate() const;
};

/// Invoked once per freshly evaluated run, from worker threads, serialised.
using RunCallback = std::function<void(const QuartetRun&)>;

/// Evaluates seeds seed_first, seed_first + 1, ... of the first grid point
/// until the budget is used. Runs in `completed` with the same config and
/// seed are reused instead of re-evaluated. Returns the valid runs sorted by
/// (spread, seed); every run, valid or not, is appended to `all_runs` in seed
/// order when given.
std::vector<QuartetRun> seed_sweep(const SearchPlan& plan,
                                   const std::vector<QuartetRun>& completed = {},
                                   const RunCallback& on_run = {},
                                   std::vector<QuartetRun>* all_runs = nullptr);

struct GridPoint {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double rho = 0.0;
  int evaluated = 0;
  int valid = 0;
  std::optional<QuartetRun> best;
};

/// Runs an inner seed sweep of max(1, budget / points) seeds at every grid
/// point and ranks points by their best spread; points without a valid run
/// come last.
std::vector<GridPoint> theta_grid_search(const SearchPlan& plan,
                                         const std::vector<QuartetRun>& completed = {},
                                         const RunCallback& on_run = {});

/// One-line summary without models.
nlohmann::json run_to_json(const QuartetRun& run);
QuartetRun run_from_json(const nlohmann::json& j);

/// JSON lines: one run summary per line.
std::string runs_to_jsonl(const std::vector<QuartetRun>& runs);
std::vector<QuartetRun> runs_from_jsonl(const std::string& text);

}  // namespace rashomon::forge
