#include "rashomon/explain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "rashomon/error.hpp"
#include "rashomon/numfmt.hpp"
#include "rashomon/parallel.hpp"
#include "rashomon/rng.hpp"

namespace rashomon {
namespace {

Eigen::Index feature_column(const Model& model, const Dataset& data,
                            const std::string& feature) {
  if (data.feature_names() != model.feature_names)
    throw SchemaError("dataset features do not match model '" + model.label + "'");
  const auto& names = model.feature_names;
  const auto it = std::find(names.begin(), names.end(), feature);
  if (it == names.end()) throw InvalidArgument("unknown feature '" + feature + "'");
  return it - names.begin();
}

// predictions(g, i): model output for row i with the feature set to grid[g].
Eigen::MatrixXd profile_predictions(const Model& model, const Eigen::MatrixXd& x,
                                    Eigen::Index column,
                                    const std::vector<double>& grid,
                                    std::size_t threads) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(grid.size()), x.rows());
  parallel_for(grid.size(), threads, [&](std::size_t g) {
    Eigen::MatrixXd modified = x;
    modified.col(column).setConstant(grid[g]);
    out.row(static_cast<Eigen::Index>(g)) = predict(model, modified).transpose();
  });
  return out;
}

double type1_quantile(std::vector<double>& sorted, double prob) {
  const auto n = static_cast<double>(sorted.size());
  auto k = static_cast<std::size_t>(std::ceil(n * prob - 1e-9));
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  return sorted[k - 1];
}

}  // namespace

std::vector<double> quantile_grid(const Eigen::VectorXd& values, int grid_size) {
  if (values.size() == 0) throw InvalidArgument("quantile_grid: no values");
  if (grid_size < 1) throw InvalidArgument("grid_size must be >= 1");
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  std::vector<double> grid;
  for (int g = 0; g < grid_size; ++g) {
    const double prob = grid_size == 1 ? 0.5 : static_cast<double>(g) / (grid_size - 1);
    const double h = static_cast<double>(n - 1) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, n - 1);
    const double q = sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    if (grid.empty() || q != grid.back()) grid.push_back(q);
  }
  return grid;
}

PDProfile pdp(const Model& model, const Dataset& data, const std::string& feature,
              int grid_size) {
  const Eigen::Index column = feature_column(model, data, feature);
  if (data.rows() == 0) throw InvalidArgument("pdp: data is empty");
  const Eigen::MatrixXd x = data.features();
  PDProfile profile;
  profile.model_label = model.label;
  profile.feature = feature;
  profile.grid = quantile_grid(x.col(column), grid_size);
  const Eigen::MatrixXd preds = profile_predictions(model, x, column, profile.grid, 0);
  profile.pd.resize(profile.grid.size());
  for (std::size_t g = 0; g < profile.grid.size(); ++g)
    profile.pd[g] = preds.row(static_cast<Eigen::Index>(g)).mean();
  return profile;
}

PDProfile pdp_ci(const Model& model, const Dataset& data, const std::string& feature,
                 const PdpCiOptions& options) {
  if (options.n_boot < 2) throw InvalidArgument("pdp_ci: n_boot must be >= 2");
  if (!(options.ci_level > 0.0 && options.ci_level < 1.0))
    throw InvalidArgument("pdp_ci: ci_level must lie in (0, 1)");
  const Eigen::Index column = feature_column(model, data, feature);
  if (data.rows() == 0) throw InvalidArgument("pdp_ci: data is empty");
  const Eigen::MatrixXd x = data.features();
  const Eigen::Index n = x.rows();

  PDProfile profile;
  profile.model_label = model.label;
  profile.feature = feature;
  profile.grid = quantile_grid(x.col(column), options.grid_size);
  profile.n_boot = options.n_boot;
  profile.ci_level = options.ci_level;
  const auto n_grid = profile.grid.size();

  // A replicate's profile averages the same per-row predictions over the
  // resampled rows, so predictions are computed once.
  const Eigen::MatrixXd preds =
      profile_predictions(model, x, column, profile.grid, options.threads);
  profile.pd.resize(n_grid);
  for (std::size_t g = 0; g < n_grid; ++g)
    profile.pd[g] = preds.row(static_cast<Eigen::Index>(g)).mean();

  Eigen::MatrixXd replicates(static_cast<Eigen::Index>(n_grid), options.n_boot);
  parallel_for(static_cast<std::size_t>(options.n_boot), options.threads,
               [&](std::size_t b) {
                 Rng rng = substream(options.seed, "explain/pdp_boot", b);
                 std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
                 for (auto& r : rows)
                   r = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
                 for (std::size_t g = 0; g < n_grid; ++g) {
                   double sum = 0.0;
                   for (auto r : rows) sum += preds(static_cast<Eigen::Index>(g), r);
                   replicates(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(b)) =
                       sum / static_cast<double>(n);
                 }
               });

  const double alpha = 1.0 - options.ci_level;
  profile.ci_lo.resize(n_grid);
  profile.ci_hi.resize(n_grid);
  std::vector<double> column_values(static_cast<std::size_t>(options.n_boot));
  for (std::size_t g = 0; g < n_grid; ++g) {
    for (int b = 0; b < options.n_boot; ++b)
      column_values[static_cast<std::size_t>(b)] =
          replicates(static_cast<Eigen::Index>(g), b);
    std::sort(column_values.begin(), column_values.end());
    profile.ci_lo[g] = type1_quantile(column_values, alpha / 2.0);
    profile.ci_hi[g] = type1_quantile(column_values, 1.0 - alpha / 2.0);
  }
  return profile;
}

const FeatureImportance& ImportanceReport::at(const std::string& feature) const {
  for (const auto& f : features)
    if (f.feature == feature) return f;
  throw InvalidArgument("no feature '" + feature + "' in importance report");
}

ImportanceReport permutation_importance(const Model& model, const Dataset& test,
                                        const ImportanceOptions& options) {
  if (test.rows() == 0) throw InvalidArgument("permutation_importance: empty data");
  if (options.n_permutations < 1)
    throw InvalidArgument("n_permutations must be >= 1");
  if (test.feature_names() != model.feature_names)
    throw SchemaError("dataset features do not match model '" + model.label + "'");
  const Eigen::MatrixXd x = test.features();
  const Eigen::VectorXd y = test.target();
  const Eigen::Index n = x.rows();
  auto rmse = [&](const Eigen::VectorXd& pred) {
    return std::sqrt((pred - y).squaredNorm() / static_cast<double>(n));
  };
  const double baseline = rmse(predict(model, x));

  ImportanceReport report;
  report.model_label = model.label;
  report.n_permutations = options.n_permutations;
  report.seed = options.seed;
  report.features.resize(model.feature_names.size());
  parallel_for(model.feature_names.size(), options.threads, [&](std::size_t j) {
    double total = 0.0;
    for (int b = 0; b < options.n_permutations; ++b) {
      Eigen::MatrixXd shuffled = x;
      if (!options.identity_permutation) {
        Rng rng = substream(substream_seed(options.seed, "explain/importance", j),
                            "permutation", static_cast<std::uint64_t>(b));
        auto col = shuffled.col(static_cast<Eigen::Index>(j));
        rng.shuffle(std::span<double>(col.data(), static_cast<std::size_t>(n)));
      }
      total += rmse(predict(model, shuffled));
    }
    auto& entry = report.features[j];
    entry.feature = model.feature_names[j];
    entry.baseline_rmse = baseline;
    entry.permuted_rmse = total / options.n_permutations;
    entry.importance = entry.permuted_rmse - baseline;
  });
  return report;
}

ResidualTable residual_table(std::span<const Model> models, const Dataset& test) {
  if (test.rows() == 0) throw InvalidArgument("residual_table: empty test set");
  if (models.empty()) throw InvalidArgument("residual_table: no models");
  ResidualTable table;
  table.residuals.resize(test.rows(), static_cast<Eigen::Index>(models.size()));
  const Eigen::VectorXd y = test.target();
  for (std::size_t m = 0; m < models.size(); ++m) {
    table.labels.push_back(models[m].label);
    table.residuals.col(static_cast<Eigen::Index>(m)) = y - predict(models[m], test);
  }
  return table;
}

bool CorrelationMatrix::defined(Eigen::Index i, Eigen::Index j) const {
  return !std::isnan(values(i, j));
}

CorrelationMatrix residual_correlation(const ResidualTable& table) {
  const Eigen::Index m = table.residuals.cols();
  const Eigen::Index n = table.residuals.rows();
  if (n == 0) throw InvalidArgument("residual_correlation: empty table");
  const Eigen::MatrixXd centered =
      table.residuals.rowwise() - table.residuals.colwise().mean();
  const Eigen::VectorXd norms = centered.colwise().norm().transpose();
  CorrelationMatrix out;
  out.labels = table.labels;
  out.values.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      double r = std::numeric_limits<double>::quiet_NaN();
      if (norms(i) > 0.0 && norms(j) > 0.0) {
        r = i == j ? 1.0
                   : centered.col(i).dot(centered.col(j)) / (norms(i) * norms(j));
        r = std::clamp(r, -1.0, 1.0);
      }
      out.values(i, j) = out.values(j, i) = r;
    }
  }
  return out;
}

bool is_non_monotonic(std::span<const double> values, double tol) {
  // peak: highest value seen that rose more than tol above an earlier value;
  // valley: lowest value seen that fell more than tol below an earlier one.
  double lo = values.empty() ? 0.0 : values[0];
  double hi = lo;
  double peak = -std::numeric_limits<double>::infinity();
  double valley = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < values.size(); ++k) {
    const double v = values[k];
    if (peak - v > tol || v - valley > tol) return true;
    if (v - lo > tol) peak = std::max(peak, v);
    if (hi - v > tol) valley = std::min(valley, v);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return false;
}

std::string pdp_csv(std::span<const PDProfile> profiles) {
  std::string out = "model;feature;grid;pd;ci_lo;ci_hi\n";
  for (const auto& p : profiles) {
    const bool has_ci = !p.ci_lo.empty();
    for (std::size_t g = 0; g < p.grid.size(); ++g) {
      out += p.model_label + ";" + p.feature + ";" + format_full(p.grid[g]) + ";" +
             format_full(p.pd[g]) + ";" +
             (has_ci ? format_full(p.ci_lo[g]) : "NA") + ";" +
             (has_ci ? format_full(p.ci_hi[g]) : "NA") + "\n";
    }
  }
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(';', start);
    cells.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto pos = text.find('\n', start);
    if (pos == std::string::npos) pos = text.size();
    std::string line = text.substr(start, pos - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
    start = pos + 1;
  }
  return lines;
}

double to_double(const std::string& cell, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw ParseError("non-numeric cell '" + cell + "'", line);
  }
  if (used != cell.size()) throw ParseError("non-numeric cell '" + cell + "'", line);
  return v;
}

}  // namespace

std::vector<PDProfile> parse_pdp_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != "model;feature;grid;pd;ci_lo;ci_hi")
    throw ParseError("expected pdp header 'model;feature;grid;pd;ci_lo;ci_hi'", 1);
  std::vector<PDProfile> out;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_line(lines[i]);
    if (cells.size() != 6) throw ParseError("expected 6 cells", i + 1);
    const auto key = std::make_pair(cells[0], cells[1]);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      PDProfile p;
      p.model_label = cells[0];
      p.feature = cells[1];
      out.push_back(std::move(p));
    }
    auto& p = out[it->second];
    p.grid.push_back(to_double(cells[2], i + 1));
    p.pd.push_back(to_double(cells[3], i + 1));
    if (cells[4] != "NA") {
      p.ci_lo.push_back(to_double(cells[4], i + 1));
      p.ci_hi.push_back(to_double(cells[5], i + 1));
    }
  }
  for (const auto& p : out)
    if (!p.ci_lo.empty() && p.ci_lo.size() != p.grid.size())
      throw ParseError("profile " + p.model_label + "/" + p.feature +
                           " mixes rows with and without bands",
                       0);
  return out;
}

std::string importance_csv(std::span<const ImportanceReport> reports) {
  std::string out = "model;feature;baseline_rmse;permuted_rmse;importance\n";
  for (const auto& r : reports)
    for (const auto& f : r.features)
      out += r.model_label + ";" + f.feature + ";" + format_full(f.baseline_rmse) +
             ";" + format_full(f.permuted_rmse) + ";" + format_full(f.importance) +
             "\n";
  return out;
}

std::string residuals_csv(const ResidualTable& table) {
  std::string out = "row";
  for (const auto& l : table.labels) out += ";" + l;
  out += "\n";
  for (Eigen::Index i = 0; i < table.residuals.rows(); ++i) {
    out += std::to_string(i + 1);
    for (Eigen::Index m = 0; m < table.residuals.cols(); ++m)
      out += ";" + format_full(table.residuals(i, m));
    out += "\n";
  }
  return out;
}

ResidualTable parse_residuals_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ParseError("missing header", 1);
  auto header = split_line(lines[0]);
  if (header.size() < 2 || header[0] != "row")
    throw ParseError("expected header 'row;<model>;...'", 1);
  ResidualTable table;
  table.labels.assign(header.begin() + 1, header.end());
  const auto m = static_cast<Eigen::Index>(table.labels.size());
  table.residuals.resize(static_cast<Eigen::Index>(lines.size() - 1), m);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_line(lines[i]);
    if (static_cast<Eigen::Index>(cells.size()) != m + 1)
      throw ParseError("expected " + std::to_string(m + 1) + " cells", i + 1);
    for (Eigen::Index j = 0; j < m; ++j)
      table.residuals(static_cast<Eigen::Index>(i - 1), j) =
          to_double(cells[static_cast<std::size_t>(j + 1)], i + 1);
  }
  return table;
}

}  // namespace rashomon
