// rashomon: command-line front end for data generation, fitting, explanation,
// quartet search and charts.
//
// Exit codes: 0 success, 2 usage error, 1 runtime error. Every file is written
// through a temporary and renamed into place; each command that writes files
// also writes a JSON manifest next to its primary output.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "rashomon/couple.hpp"
#include "rashomon/dataset.hpp"
#include "rashomon/error.hpp"
#include "rashomon/eval.hpp"
#include "rashomon/explain.hpp"
#include "rashomon/forge.hpp"
#include "rashomon/model.hpp"
#include "rashomon/model_io.hpp"
#include "rashomon/numfmt.hpp"
#include "rashomon/parallel.hpp"
#include "rashomon/plot.hpp"
#include "rashomon/synth.hpp"

#ifndef RASHOMON_VERSION
#define RASHOMON_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rashomon;

namespace {

constexpr std::uint64_t kDefaultSeed = 1568;

struct UsageError : Error {
  using Error::Error;
};

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::size_t resolve_threads(std::size_t requested) {
  return requested > 0 ? requested : default_threads();
}

/// Provenance record written next to a command's primary output.
class Manifest {
 public:
  Manifest(std::string subcommand, std::vector<std::string> args)
      : subcommand_(std::move(subcommand)),
        args_(std::move(args)),
        start_(std::chrono::steady_clock::now()),
        started_at_(utc_now()) {}

  json config = json::object();
  json inputs = json::array();
  json outputs = json::array();
  std::optional<std::uint64_t> seed;

  void input(const std::string& path) { inputs.push_back(path); }
  void output(const std::string& path) { outputs.push_back(path); }

  void write(const std::string& path) const {
    const double wall = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start_)
                            .count();
    json doc = {{"tool", "rashomon"},
                {"version", RASHOMON_VERSION},
                {"subcommand", subcommand_},
                {"argv", args_},
                {"config", config},
                {"inputs", inputs},
                {"outputs", outputs},
                {"seed", seed ? json(*seed) : json(nullptr)},
                {"started_at", started_at_},
                {"wall_clock_seconds", wall}};
    write_file_atomic(path, doc.dump(2) + "\n");
  }

 private:
  std::string subcommand_;
  std::vector<std::string> args_;
  std::chrono::steady_clock::time_point start_;
  std::string started_at_;
};

std::string manifest_for_file(const std::string& path) { return path + ".manifest.json"; }

std::string manifest_for_dir(const std::string& dir, const std::string& sub) {
  return (fs::path(dir) / (sub + ".manifest.json")).string();
}

std::vector<Model> load_models(const std::vector<std::string>& paths, Manifest& m) {
  std::vector<Model> models;
  std::set<std::string> labels;
  for (const auto& p : paths) {
    models.push_back(load_model(p));
    if (!labels.insert(models.back().label).second)
      throw UsageError("duplicate model label '" + models.back().label + "' in " + p);
    m.input(p);
  }
  return models;
}

Dataset load_data(const std::string& path, Manifest& m) {
  m.input(path);
  return read_csv(path);
}

json config_json(const GenConfig& c) {
  return {{"theta1", c.theta1},       {"theta2", c.theta2},       {"rho", c.rho},
          {"sigma_eps", c.sigma_eps}, {"n_features", c.n_features}, {"n_train", c.n_train},
          {"n_test", c.n_test},       {"seed", c.seed}};
}

std::string family_file(Family f) { return std::string(to_string(f)) + ".json"; }

// ---------------------------------------------------------------------------

struct GenerateArgs {
  GenConfig config;
  std::string out_dir;
};

void add_generate(CLI::App& app, GenerateArgs& a) {
  app.add_option("--seed", a.config.seed, "Data seed")->capture_default_str();
  app.add_option("--n-train", a.config.n_train, "Training rows")->capture_default_str();
  app.add_option("--n-test", a.config.n_test, "Test rows")->capture_default_str();
  app.add_option("--theta1", a.config.theta1, "Signal frequency")->capture_default_str();
  app.add_option("--theta2", a.config.theta2, "Weight of x2 in the signal")
      ->capture_default_str();
  app.add_option("--rho", a.config.rho, "Feature equicorrelation")->capture_default_str();
  app.add_option("--sigma", a.config.sigma_eps, "Noise standard deviation")
      ->capture_default_str();
  app.add_option("--n-features", a.config.n_features, "Number of features")
      ->capture_default_str();
  app.add_option("--out-dir", a.out_dir, "Directory for train.csv and test.csv")
      ->required();
}

int run_generate(const GenerateArgs& a, Manifest& m) {
  const auto [train, test] = generate(a.config);
  const std::string train_path = (fs::path(a.out_dir) / "train.csv").string();
  const std::string test_path = (fs::path(a.out_dir) / "test.csv").string();
  write_csv(train, train_path);
  write_csv(test, test_path);
  m.config = config_json(a.config);
  m.seed = a.config.seed;
  m.output(train_path);
  m.output(test_path);
  m.write(manifest_for_dir(a.out_dir, "generate"));
  std::cout << "wrote " << train_path << " (" << train.rows() << " rows), " << test_path
            << " (" << test.rows() << " rows)\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string train;
  std::string family = "all";
  std::string out;
  std::string label;
  std::uint64_t seed = kDefaultSeed;
  TreeParams tree;
  ForestParams forest;
  NetworkParams network;
  std::size_t threads = 0;
};

void add_train(CLI::App& app, TrainArgs& a) {
  app.add_option("--train", a.train, "Training CSV")->required()->check(CLI::ExistingFile);
  app.add_option("--family", a.family, "linear, tree, forest, network or all")
      ->check(CLI::IsMember({"linear", "tree", "forest", "network", "all"}))
      ->capture_default_str();
  app.add_option("--out", a.out,
                 "Model JSON path, or a directory when --family is all")
      ->required();
  app.add_option("--label", a.label, "Model label (single family only)");
  app.add_option("--seed", a.seed, "Seed for forest and network")->capture_default_str();
  app.add_option("--max-depth", a.tree.max_depth, "Tree depth limit")->capture_default_str();
  app.add_option("--min-split", a.tree.min_split, "Tree minimum node size to split")
      ->capture_default_str();
  app.add_option("--n-trees", a.forest.n_trees, "Forest size")->capture_default_str();
  app.add_option("--mtry", a.forest.mtry, "Features tried per split (0: p/3)")
      ->capture_default_str();
  app.add_option("--min-node", a.forest.min_node, "Forest minimum node size to split")
      ->capture_default_str();
  app.add_option("--hidden", a.network.hidden, "Hidden layer widths")
      ->capture_default_str();
  app.add_option("--grad-threshold", a.network.grad_threshold,
                 "Network stopping threshold on max |gradient|")
      ->capture_default_str();
  app.add_option("--max-epochs", a.network.max_epochs, "Network epoch limit")
      ->capture_default_str();
  app.add_option("--threads", a.threads, "Worker threads (0: RASHOMON_THREADS or all)");
}

Model train_one(Family f, const Dataset& train, const TrainArgs& a) {
  switch (f) {
    case Family::linear:
      return fit_linear(train);
    case Family::tree:
      return fit_tree(train, a.tree);
    case Family::forest: {
      ForestParams p = a.forest;
      p.seed = a.seed;
      p.threads = resolve_threads(a.threads);
      return fit_forest(train, p);
    }
    case Family::network: {
      NetworkParams p = a.network;
      p.seed = a.seed;
      Model m = fit_network(train, p);
      const auto& fit = m.as<NetworkFit>();
      if (!fit.converged)
        std::cerr << "warning: network stopped after " << fit.epochs
                  << " epochs without reaching the gradient threshold\n";
      return m;
    }
  }
  throw InvalidArgument("unknown family");
}

int run_train(const TrainArgs& a, Manifest& m) {
  const Dataset train = load_data(a.train, m);
  m.seed = a.seed;
  m.config = {{"family", a.family},
              {"seed", a.seed},
              {"tree", {{"max_depth", a.tree.max_depth}, {"min_split", a.tree.min_split}}},
              {"forest",
               {{"n_trees", a.forest.n_trees},
                {"mtry", a.forest.mtry},
                {"min_node", a.forest.min_node}}},
              {"network",
               {{"hidden", a.network.hidden},
                {"grad_threshold", a.network.grad_threshold},
                {"max_epochs", a.network.max_epochs}}}};
  if (a.family == "all") {
    if (!a.label.empty()) throw UsageError("--label needs a single --family");
    for (Family f : {Family::linear, Family::tree, Family::forest, Family::network}) {
      const Model model = train_one(f, train, a);
      const std::string path = (fs::path(a.out) / family_file(f)).string();
      save_model(model, path);
      m.output(path);
      std::cout << "wrote " << path << "\n";
    }
    m.write(manifest_for_dir(a.out, "train"));
    return 0;
  }
  Model model = train_one(family_from_string(a.family), train, a);
  if (!a.label.empty()) model.label = a.label;
  save_model(model, a.out);
  m.output(a.out);
  m.write(manifest_for_file(a.out));
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string test;
  std::vector<std::string> models;
  std::string out;
};

void add_eval(CLI::App& app, EvalArgs& a) {
  app.add_option("--test", a.test, "Test CSV")->required()->check(CLI::ExistingFile);
  app.add_option("--model", a.models, "Model JSON (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", a.out, "JSON report path (default: standard output)");
}

int run_eval(const EvalArgs& a, Manifest& m) {
  const Dataset test = load_data(a.test, m);
  const std::vector<Model> models = load_models(a.models, m);
  const PerfReport report = evaluate(models, test);
  const std::string text = perf_report_json(report);
  if (a.out.empty()) {
    std::cout << text;
    return 0;
  }
  write_file_atomic(a.out, text);
  m.output(a.out);
  m.write(manifest_for_file(a.out));
  for (const auto& r : report.models)
    std::cout << fmt::format("{:<20} R2 {:.4f}  RMSE {:.4f}\n", r.label, r.r2, r.rmse);
  std::cout << fmt::format("spread {:.4f}\n", report.r2_spread());
  return 0;
}

// ---------------------------------------------------------------------------

struct PdpArgs {
  std::string data;
  std::vector<std::string> models;
  std::vector<std::string> features;
  int grid_size = 101;
  int n_boot = 0;
  double ci_level = 0.95;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  std::string svg;
  std::size_t threads = 0;
};

void add_pdp(CLI::App& app, PdpArgs& a) {
  app.add_option("--data", a.data, "CSV the profiles average over")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--model", a.models, "Model JSON (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--feature", a.features, "Feature to profile (default: all)");
  app.add_option("--grid-size", a.grid_size, "Quantile grid points")->capture_default_str();
  app.add_option("--n-boot", a.n_boot, "Bootstrap replicates for bands (0: none)")
      ->capture_default_str();
  app.add_option("--ci-level", a.ci_level, "Band coverage")->capture_default_str();
  app.add_option("--seed", a.seed, "Bootstrap seed")->capture_default_str();
  app.add_option("--out", a.out, "Profile CSV")->required();
  app.add_option("--svg", a.svg, "Also draw the profile grid");
  app.add_option("--threads", a.threads, "Worker threads (0: RASHOMON_THREADS or all)");
}

int run_pdp(const PdpArgs& a, Manifest& m) {
  const Dataset data = load_data(a.data, m);
  const std::vector<Model> models = load_models(a.models, m);
  const std::vector<std::string> features =
      a.features.empty() ? data.feature_names() : a.features;
  std::vector<PDProfile> profiles;
  PdpCiOptions opt;
  opt.grid_size = a.grid_size;
  opt.n_boot = a.n_boot;
  opt.ci_level = a.ci_level;
  opt.seed = a.seed;
  opt.threads = resolve_threads(a.threads);
  for (const auto& model : models) {
    for (const auto& f : features) {
      profiles.push_back(a.n_boot > 0 ? pdp_ci(model, data, f, opt)
                                      : pdp(model, data, f, a.grid_size));
    }
  }
  write_file_atomic(a.out, pdp_csv(profiles));
  m.output(a.out);
  if (!a.svg.empty()) {
    write_file_atomic(a.svg, plot::pdp_grid(profiles));
    m.output(a.svg);
  }
  m.seed = a.seed;
  m.config = {{"grid_size", a.grid_size},
              {"n_boot", a.n_boot},
              {"ci_level", a.ci_level},
              {"features", features}};
  m.write(manifest_for_file(a.out));
  std::cout << "wrote " << profiles.size() << " profiles to " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct ImportanceArgs {
  std::string test;
  std::vector<std::string> models;
  int n_permutations = 1;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  std::size_t threads = 0;
};

void add_importance(CLI::App& app, ImportanceArgs& a) {
  app.add_option("--test", a.test, "Test CSV")->required()->check(CLI::ExistingFile);
  app.add_option("--model", a.models, "Model JSON (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--n-permutations", a.n_permutations, "Shuffles averaged per feature")
      ->capture_default_str();
  app.add_option("--seed", a.seed, "Permutation seed")->capture_default_str();
  app.add_option("--out", a.out, "Importance CSV")->required();
  app.add_option("--threads", a.threads, "Worker threads (0: RASHOMON_THREADS or all)");
}

int run_importance(const ImportanceArgs& a, Manifest& m) {
  const Dataset test = load_data(a.test, m);
  const std::vector<Model> models = load_models(a.models, m);
  ImportanceOptions opt;
  opt.n_permutations = a.n_permutations;
  opt.seed = a.seed;
  opt.threads = resolve_threads(a.threads);
  std::vector<ImportanceReport> reports;
  for (const auto& model : models) reports.push_back(permutation_importance(model, test, opt));
  write_file_atomic(a.out, importance_csv(reports));
  m.output(a.out);
  m.seed = a.seed;
  m.config = {{"n_permutations", a.n_permutations}};
  m.write(manifest_for_file(a.out));
  for (const auto& r : reports) {
    std::cout << r.model_label << ":";
    for (const auto& f : r.features)
      std::cout << fmt::format("  {} {:.4f}", f.feature, f.importance);
    std::cout << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ResidualsArgs {
  std::string test;
  std::vector<std::string> models;
  std::string out;
  std::string svg;
  int max_lines = 1000;
};

void add_residuals(CLI::App& app, ResidualsArgs& a) {
  app.add_option("--test", a.test, "Test CSV")->required()->check(CLI::ExistingFile);
  app.add_option("--model", a.models, "Model JSON (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", a.out, "Residual CSV")->required();
  app.add_option("--svg", a.svg, "Also draw the parallel-coordinate chart");
  app.add_option("--max-lines", a.max_lines, "Rows drawn in the chart")
      ->capture_default_str();
}

int run_residuals(const ResidualsArgs& a, Manifest& m) {
  const Dataset test = load_data(a.test, m);
  const std::vector<Model> models = load_models(a.models, m);
  const ResidualTable table = residual_table(models, test);
  write_file_atomic(a.out, residuals_csv(table));
  m.output(a.out);
  if (!a.svg.empty()) {
    write_file_atomic(a.svg, plot::residual_parcoord(table, a.max_lines));
    m.output(a.svg);
  }
  m.write(manifest_for_file(a.out));
  const CorrelationMatrix corr = residual_correlation(table);
  std::cout << "residual correlation\n";
  for (std::size_t i = 0; i < corr.labels.size(); ++i) {
    std::cout << fmt::format("{:<20}", corr.labels[i]);
    for (std::size_t j = 0; j < corr.labels.size(); ++j) {
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      std::cout << (corr.defined(ii, jj) ? fmt::format(" {:7.4f}", corr.values(ii, jj))
                                         : std::string("      NA"));
    }
    std::cout << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ForgeArgs {
  forge::SearchPlan plan;
  std::string out;
  std::string grid_out;
  std::string export_best;
  std::string pick = "min_spread";
};

void add_forge(CLI::App& app, ForgeArgs& a) {
  auto& p = a.plan;
  auto& c = p.candidate;
  app.add_option("--theta1", p.theta1, "Grid of theta1 values")->capture_default_str();
  app.add_option("--theta2", p.theta2, "Grid of theta2 values")->capture_default_str();
  app.add_option("--rho", p.rho, "Grid of rho values")->capture_default_str();
  app.add_option("--sigma", p.base.sigma_eps, "Noise standard deviation")
      ->capture_default_str();
  app.add_option("--n-train", p.base.n_train, "Training rows")->capture_default_str();
  app.add_option("--n-test", p.base.n_test, "Test rows")->capture_default_str();
  app.add_option("--seed-first", p.seed_first, "First data seed")->capture_default_str();
  app.add_option("--seed-count", p.seed_count, "Number of seeds per grid point")
      ->capture_default_str();
  app.add_option("--budget", p.budget, "Maximum candidate evaluations")
      ->capture_default_str();
  app.add_option("--network-inits", c.network_inits, "Network initialisations per seed")
      ->capture_default_str();
  app.add_option("--pick", a.pick, "Init selection: min_spread or best_r2")
      ->check(CLI::IsMember({"min_spread", "best_r2"}))
      ->capture_default_str();
  app.add_option("--max-epochs", c.network.max_epochs, "Network epoch limit")
      ->capture_default_str();
  app.add_option("--prune-spread", c.prune_spread,
                 "Skip the network when the other three spread more than this");
  app.add_option("--accept-spread", c.accept_spread,
                 "Stop trying inits once the spread is at most this");
  app.add_flag("--require-stories", c.require_stories,
               "Only accept quartets whose explanations diverge as intended");
  app.add_option("--nonmonotone-tol", c.nonmonotone_tol,
                 "Minimum bump of the network x3 profile")
      ->capture_default_str();
  app.add_option("--threads", p.threads, "Worker threads (0: RASHOMON_THREADS or all)");
  app.add_option("--out", a.out, "JSONL of every evaluated run (resumed if present)")
      ->required();
  app.add_option("--grid-out", a.grid_out, "JSON ranking of grid points");
  app.add_option("--export-best", a.export_best,
                 "Write data and models of the best run to this directory");
}

json candidate_json(const forge::CandidateOptions& c) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"network_inits", c.network_inits},
          {"pick", c.pick == forge::NetworkPick::best_r2 ? "best_r2" : "min_spread"},
          {"max_epochs", c.network.max_epochs},
          {"prune_spread", num(c.prune_spread)},
          {"accept_spread", c.accept_spread},
          {"require_stories", c.require_stories},
          {"nonmonotone_tol", c.nonmonotone_tol},
          {"explain_seed", c.explain_seed}};
}

/// Runs from a JSONL file; a truncated last line left by an interrupted run is
/// dropped.
std::vector<forge::QuartetRun> read_runs_tolerant(const std::string& path) {
  if (!fs::exists(path)) return {};
  std::vector<forge::QuartetRun> runs;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      runs.push_back(forge::run_from_json(json::parse(line)));
    } catch (const std::exception&) {
      if (in.peek() != std::char_traits<char>::eof()) throw;
    }
  }
  return runs;
}

bool run_before(const forge::QuartetRun& a, const forge::QuartetRun& b) {
  if (a.valid != b.valid) return a.valid;
  if (a.valid && a.spread != b.spread) return a.spread < b.spread;
  auto key = [](const forge::QuartetRun& r) {
    return std::make_tuple(r.config.theta1, r.config.theta2, r.config.rho, r.seed);
  };
  return key(a) < key(b);
}

int export_quartet(const forge::QuartetRun& best, const forge::CandidateOptions& options,
                   const std::string& dir, Manifest& parent) {
  forge::CandidateOptions keep = options;
  keep.keep_models = true;
  const forge::QuartetRun run = forge::evaluate_candidate(best.config, best.seed, keep);
  if (run.models.size() != 4 || run.spread != best.spread)
    throw Error("re-evaluating seed " + std::to_string(best.seed) +
                " did not reproduce the recorded run");
  const auto [train, test] = generate(run.config);
  const std::string train_path = (fs::path(dir) / "train.csv").string();
  const std::string test_path = (fs::path(dir) / "test.csv").string();
  write_csv(train, train_path);
  write_csv(test, test_path);
  Manifest m("forge-export", {});
  m.config = {{"data", config_json(run.config)},
              {"candidate", candidate_json(options)},
              {"network_init", run.network_init},
              {"network_epochs", run.network_epochs},
              {"spread", run.spread}};
  m.seed = run.seed;
  m.output(train_path);
  m.output(test_path);
  for (const auto& model : run.models) {
    const std::string path = (fs::path(dir) / family_file(model.family)).string();
    save_model(model, path);
    m.output(path);
  }
  const std::string perf_path = (fs::path(dir) / "perf.json").string();
  write_file_atomic(perf_path, perf_report_json(run.perf));
  m.output(perf_path);
  m.write(manifest_for_dir(dir, "quartet"));
  for (const auto& o : m.outputs) parent.output(o.get<std::string>());
  return 0;
}

int run_forge(ForgeArgs& a, Manifest& m) {
  auto& plan = a.plan;
  plan.candidate.pick =
      a.pick == "best_r2" ? forge::NetworkPick::best_r2 : forge::NetworkPick::min_spread;
  plan.threads = resolve_threads(plan.threads);
  plan.candidate.forest.threads = 1;
  plan.validate();

  const std::string partial = a.out + ".partial";
  std::vector<forge::QuartetRun> completed = read_runs_tolerant(a.out);
  for (auto& r : read_runs_tolerant(partial)) completed.push_back(std::move(r));

  std::vector<forge::QuartetRun> fresh;
  std::mutex io;
  std::ofstream log(partial, std::ios::app);
  if (!log) throw Error("cannot open " + partial);
  const auto start = std::chrono::steady_clock::now();
  auto on_run = [&](const forge::QuartetRun& r) {
    std::lock_guard lock(io);
    log << forge::run_to_json(r).dump() << "\n" << std::flush;
    fresh.push_back(r);
    if (r.valid)
      std::cerr << fmt::format("seed {} spread {:.5f} ({:.0f}s)\n", r.seed, r.spread,
                               std::chrono::duration<double>(
                                   std::chrono::steady_clock::now() - start)
                                   .count());
  };

  const bool grid = plan.theta1.size() * plan.theta2.size() * plan.rho.size() > 1;
  std::vector<forge::GridPoint> points;
  if (grid) {
    points = forge::theta_grid_search(plan, completed, on_run);
  } else {
    forge::seed_sweep(plan, completed, on_run);
  }
  log.close();

  // Union of resumed and fresh runs, one per (config, seed).
  std::map<std::tuple<double, double, double, double, int, int, int, std::uint64_t>,
           forge::QuartetRun>
      unique;
  for (const auto* list : {&completed, &fresh}) {
    for (const auto& r : *list) {
      const auto& c = r.config;
      unique[{c.theta1, c.theta2, c.rho, c.sigma_eps, c.n_features, c.n_train, c.n_test,
              r.seed}] = r;
    }
  }
  std::vector<forge::QuartetRun> all;
  for (auto& [k, r] : unique) all.push_back(std::move(r));
  std::sort(all.begin(), all.end(), run_before);
  write_file_atomic(a.out, forge::runs_to_jsonl(all));
  fs::remove(partial);
  m.output(a.out);

  if (grid && !a.grid_out.empty()) {
    json ranking = json::array();
    for (const auto& g : points) {
      ranking.push_back({{"theta1", g.theta1},
                         {"theta2", g.theta2},
                         {"rho", g.rho},
                         {"evaluated", g.evaluated},
                         {"valid", g.valid},
                         {"best_seed", g.best ? json(g.best->seed) : json(nullptr)},
                         {"best_spread", g.best ? json(g.best->spread) : json(nullptr)}});
    }
    write_file_atomic(a.grid_out, ranking.dump(2) + "\n");
    m.output(a.grid_out);
  }

  const forge::QuartetRun* best = nullptr;
  long valid = 0;
  for (const auto& r : all) {
    if (!r.valid) continue;
    ++valid;
    if (!best) best = &r;
  }
  m.config = {{"theta1", plan.theta1},
              {"theta2", plan.theta2},
              {"rho", plan.rho},
              {"base", config_json(plan.base)},
              {"seed_first", plan.seed_first},
              {"seed_count", plan.seed_count},
              {"budget", plan.budget},
              {"candidate", candidate_json(plan.candidate)},
              {"resumed_runs", completed.size()},
              {"fresh_runs", fresh.size()},
              {"valid_runs", valid}};
  if (best) {
    m.seed = best->seed;
    m.config["best"] = forge::run_to_json(*best);
  }
  if (!a.export_best.empty()) {
    if (!best) throw Error("no valid run to export");
    export_quartet(*best, plan.candidate, a.export_best, m);
  }
  m.write(manifest_for_file(a.out));

  std::cout << fmt::format("{} runs, {} valid\n", all.size(), valid);
  if (best) {
    std::cout << fmt::format("best seed {} (theta1 {}, theta2 {}, rho {}) spread {:.5f}\n",
                             best->seed, best->config.theta1, best->config.theta2,
                             best->config.rho, best->spread);
    for (const auto& r : best->perf.models)
      std::cout << fmt::format("  {:<20} R2 {:.4f}  RMSE {:.4f}\n", r.label, r.r2, r.rmse);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct CoupleArgs {
  std::vector<double> alphas;
  std::string svg;
};

void add_couple(CLI::App& app, CoupleArgs& a) {
  app.add_option("--alpha", a.alphas, "Exponents (default: the equal-MSE exponent)");
  app.add_option("--svg", a.svg, "Draw target and both fits at the first alpha");
}

int run_couple(const CoupleArgs& a, Manifest& m) {
  std::vector<double> alphas = a.alphas;
  if (alphas.empty()) alphas.push_back(couple::find_couple_exponent());
  std::cout << fmt::format("{:>12} {:>12} {:>12} {:>14} {:>14} {:>10}\n", "alpha", "b1",
                           "b0", "mse_linear", "mse_stump", "gap");
  for (double alpha : alphas) {
    const couple::CoupleSpec spec{alpha};
    spec.validate();
    const auto lin = couple::best_linear(spec);
    const auto stump = couple::best_stump(spec);
    std::cout << fmt::format("{:12.9f} {:12.9f} {:12.9f} {:14.11f} {:14.11f} {:10.3g}\n",
                             alpha, lin.coefficient, stump.coefficient, lin.mse, stump.mse,
                             stump.mse - lin.mse);
  }
  if (!a.svg.empty()) {
    write_file_atomic(a.svg, plot::couple_curves(alphas.front()));
    m.output(a.svg);
    m.config = {{"alpha", alphas}};
    m.write(manifest_for_file(a.svg));
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct PlotArgs {
  std::string kind;
  std::string input;
  std::string train;
  std::string test;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  int max_points = 1000;
  std::string out;
};

void add_plot(CLI::App& app, PlotArgs& a) {
  app.add_option("--kind", a.kind,
                 "pdp_grid, residual_parcoord, pairs_matrix or couple_curves")
      ->required()
      ->check(CLI::IsMember({"pdp_grid", "residual_parcoord", "pairs_matrix",
                             "couple_curves"}));
  app.add_option("--input", a.input, "Profile or residual CSV")->check(CLI::ExistingFile);
  app.add_option("--train", a.train, "Training CSV (pairs_matrix)")
      ->check(CLI::ExistingFile);
  app.add_option("--test", a.test, "Test CSV (pairs_matrix)")->check(CLI::ExistingFile);
  app.add_option("--alpha", a.alpha, "Exponent (couple_curves)");
  app.add_option("--max-points", a.max_points, "Rows drawn per set")->capture_default_str();
  app.add_option("--out", a.out, "SVG path")->required();
}

int run_plot(const PlotArgs& a, Manifest& m) {
  std::string svg;
  switch (plot::chart_kind_from_string(a.kind)) {
    case plot::ChartKind::pdp_grid: {
      if (a.input.empty()) throw UsageError("pdp_grid needs --input");
      m.input(a.input);
      svg = plot::pdp_grid(parse_pdp_csv(read_file(a.input)));
      break;
    }
    case plot::ChartKind::residual_parcoord: {
      if (a.input.empty()) throw UsageError("residual_parcoord needs --input");
      m.input(a.input);
      svg = plot::residual_parcoord(parse_residuals_csv(read_file(a.input)), a.max_points);
      break;
    }
    case plot::ChartKind::pairs_matrix: {
      if (a.train.empty() || a.test.empty())
        throw UsageError("pairs_matrix needs --train and --test");
      const Dataset train = load_data(a.train, m);
      const Dataset test = load_data(a.test, m);
      svg = plot::pairs_matrix(train, test, a.max_points);
      break;
    }
    case plot::ChartKind::couple_curves: {
      const double alpha =
          std::isnan(a.alpha) ? couple::find_couple_exponent() : a.alpha;
      svg = plot::couple_curves(alpha);
      m.config["alpha"] = alpha;
      break;
    }
  }
  write_file_atomic(a.out, svg);
  m.output(a.out);
  m.config["kind"] = a.kind;
  m.write(manifest_for_file(a.out));
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, int depth);

int run_rerun(const std::string& manifest_path, int depth) {
  json doc;
  try {
    doc = json::parse(read_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("manifest is not JSON: ") + e.what(), 0);
  }
  if (!doc.contains("argv") || !doc["argv"].is_array() || doc["argv"].empty())
    throw ParseError("manifest has no argv", 0);
  std::vector<std::string> args = doc["argv"].get<std::vector<std::string>>();
  if (args.front() == "rerun") throw UsageError("manifest records a rerun");
  return run_cli(args, depth + 1);
}

int run_cli(const std::vector<std::string>& args, int depth) {
  CLI::App app{"Rashomon quartet toolkit"};
  app.name("rashomon");
  app.set_version_flag("--version", RASHOMON_VERSION);
  app.require_subcommand(1);

  GenerateArgs gen;
  TrainArgs train;
  EvalArgs ev;
  PdpArgs pd;
  ImportanceArgs imp;
  ResidualsArgs res;
  ForgeArgs fg;
  CoupleArgs cp;
  PlotArgs pl;
  std::string manifest_path;

  add_generate(*app.add_subcommand("generate", "Sample train and test sets"), gen);
  add_train(*app.add_subcommand("train", "Fit models to a training CSV"), train);
  add_eval(*app.add_subcommand("eval", "Score models on a test CSV"), ev);
  add_pdp(*app.add_subcommand("pdp", "Partial dependence profiles"), pd);
  add_importance(*app.add_subcommand("importance", "Permutation importance"), imp);
  add_residuals(*app.add_subcommand("residuals", "Test residuals and their correlation"),
                res);
  add_forge(*app.add_subcommand("forge", "Search seeds and parameters for a quartet"), fg);
  add_couple(*app.add_subcommand("couple", "Linear fit versus sign stump on a power curve"),
             cp);
  add_plot(*app.add_subcommand("plot", "Draw an SVG chart"), pl);
  app.add_subcommand("rerun", "Repeat the command recorded in a manifest")
      ->add_option("--manifest", manifest_path, "Manifest JSON")
      ->required()
      ->check(CLI::ExistingFile);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  Manifest m(sub, args);
  if (sub == "generate") return run_generate(gen, m);
  if (sub == "train") return run_train(train, m);
  if (sub == "eval") return run_eval(ev, m);
  if (sub == "pdp") return run_pdp(pd, m);
  if (sub == "importance") return run_importance(imp, m);
  if (sub == "residuals") return run_residuals(res, m);
  if (sub == "forge") return run_forge(fg, m);
  if (sub == "couple") return run_couple(cp, m);
  if (sub == "plot") return run_plot(pl, m);
  if (sub == "rerun") {
    if (depth > 0) throw UsageError("nested rerun");
    return run_rerun(manifest_path, depth);
  }
  throw UsageError("unknown subcommand " + sub);
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run_cli(args, 0);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
