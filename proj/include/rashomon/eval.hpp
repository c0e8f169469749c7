#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rashomon/dataset.hpp"
#include "rashomon/model.hpp"

namespace rashomon {

struct Metrics {
  std::string label;
  double r2 = 0.0;
  double rmse = 0.0;
  double mse = 0.0;
};

/// Test-set performance of several models. R^2 is measured against the test
/// mean: r2 = 1 - mse / var(y), with the 1/n population variance.
struct PerfReport {
  std::vector<Metrics> models;
  int n_test = 0;

  const Metrics& at(const std::string& label) const;
  /// max - min of r2 over the models.
  double r2_spread() const;
};

/// Throws InvalidArgument on empty input, mismatched lengths or constant y.
Metrics score(const Eigen::VectorXd& predictions, const Eigen::VectorXd& y,
              std::string label = {});

PerfReport evaluate(std::span<const Model> models, const Dataset& test);

/// {"models": {label: {"r2":..,"rmse":..,"mse":..}}, "n_test": n} with
/// 17 significant digits per value.
std::string perf_report_json(const PerfReport& report);

}  // namespace rashomon
