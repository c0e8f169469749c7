#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rashomon/dataset.hpp"
#include "rashomon/model.hpp"

namespace rashomon {

/// Partial dependence of one model on one feature. ci_lo/ci_hi are empty
/// (and n_boot is 0) for a profile computed without bootstrap.
struct PDProfile {
  std::string model_label;
  std::string feature;
  std::vector<double> grid;
  std::vector<double> pd;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  int n_boot = 0;
  double ci_level = 0.0;
};

/// Quantiles of `values` (linear interpolation between order statistics,
/// R's type 7) at grid_size equally spaced probabilities in [0, 1], with
/// repeated values removed.
std::vector<double> quantile_grid(const Eigen::VectorXd& values, int grid_size);

PDProfile pdp(const Model& model, const Dataset& data, const std::string& feature,
              int grid_size = 101);

struct PdpCiOptions {
  int grid_size = 101;
  int n_boot = 100;
  double ci_level = 0.95;
  std::uint64_t seed = 1568;
  std::size_t threads = 0;
};

/// pdp() plus percentile-bootstrap bands: rows of `data` are resampled with
/// replacement n_boot times (the model is not refit, the grid stays fixed)
/// and each band edge is the empirical (inverse-CDF) quantile of the
/// replicate profiles at (1 -/+ ci_level) / 2.
PDProfile pdp_ci(const Model& model, const Dataset& data,
                 const std::string& feature, const PdpCiOptions& options = {});

struct FeatureImportance {
  std::string feature;
  double baseline_rmse = 0.0;
  double permuted_rmse = 0.0;
  double importance = 0.0;
};

struct ImportanceReport {
  std::string model_label;
  std::vector<FeatureImportance> features;
  int n_permutations = 1;
  std::uint64_t seed = 0;

  const FeatureImportance& at(const std::string& feature) const;
};

struct ImportanceOptions {
  int n_permutations = 1;
  std::uint64_t seed = 1568;
  /// Debug hook: leave every column in place instead of shuffling it.
  bool identity_permutation = false;
  std::size_t threads = 0;
};

/// RMSE increase after shuffling each feature column of `test`, averaged
/// over n_permutations shuffles. Uses every row.
ImportanceReport permutation_importance(const Model& model, const Dataset& test,
                                        const ImportanceOptions& options = {});

/// Residuals y - yhat on the test set, one column per model.
struct ResidualTable {
  std::vector<std::string> labels;
  Eigen::MatrixXd residuals;
};

ResidualTable residual_table(std::span<const Model> models, const Dataset& test);

/// Pearson correlations between residual columns. Pairs involving a
/// constant column are undefined and hold NaN.
struct CorrelationMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXd values;

  bool defined(Eigen::Index i, Eigen::Index j) const;
};

CorrelationMatrix residual_correlation(const ResidualTable& table);

/// True if some i < j < k has values[j] exceeding both values[i] and
/// values[k] by more than tol, or falling below both by more than tol.
bool is_non_monotonic(std::span<const double> values, double tol = 1e-6);

// Semicolon-separated exports.
std::string pdp_csv(std::span<const PDProfile> profiles);
std::vector<PDProfile> parse_pdp_csv(const std::string& text);
std::string importance_csv(std::span<const ImportanceReport> reports);
std::string residuals_csv(const ResidualTable& table);
ResidualTable parse_residuals_csv(const std::string& text);

}  // namespace rashomon
