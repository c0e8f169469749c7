#include "rashomon/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "rashomon/error.hpp"
#include "rashomon/numfmt.hpp"

namespace rashomon {

const Metrics& PerfReport::at(const std::string& label) const {
  for (const auto& m : models)
    if (m.label == label) return m;
  throw InvalidArgument("no model labelled '" + label + "' in report");
}

double PerfReport::r2_spread() const {
  if (models.empty()) return 0.0;
  double lo = models.front().r2, hi = lo;
  for (const auto& m : models) {
    lo = std::min(lo, m.r2);
    hi = std::max(hi, m.r2);
  }
  return hi - lo;
}

Metrics score(const Eigen::VectorXd& predictions, const Eigen::VectorXd& y,
              std::string label) {
  const Eigen::Index n = y.size();
  if (n == 0) throw InvalidArgument("cannot score an empty test set");
  if (predictions.size() != n)
    throw InvalidArgument("prediction and target lengths differ");
  const double mean = y.mean();
  const double var = (y.array() - mean).square().sum() / static_cast<double>(n);
  if (!(var > 0.0))
    throw InvalidArgument("r2 is undefined for a constant test target");
  Metrics m;
  m.label = std::move(label);
  m.mse = (predictions - y).squaredNorm() / static_cast<double>(n);
  m.rmse = std::sqrt(m.mse);
  m.r2 = 1.0 - m.mse / var;
  return m;
}

PerfReport evaluate(std::span<const Model> models, const Dataset& test) {
  if (test.rows() == 0) throw InvalidArgument("empty test set");
  PerfReport report;
  report.n_test = static_cast<int>(test.rows());
  const Eigen::VectorXd y = test.target();
  std::set<std::string> seen;
  for (const auto& model : models) {
    if (!seen.insert(model.label).second)
      throw InvalidArgument("duplicate model label '" + model.label + "'");
    report.models.push_back(score(predict(model, test), y, model.label));
  }
  return report;
}

std::string perf_report_json(const PerfReport& report) {
  std::string out = "{\n  \"models\": {";
  for (std::size_t i = 0; i < report.models.size(); ++i) {
    const auto& m = report.models[i];
    out += i ? ",\n    " : "\n    ";
    out += nlohmann::json(m.label).dump();
    out += ": {\"r2\": " + format_full(m.r2) + ", \"rmse\": " + format_full(m.rmse) +
           ", \"mse\": " + format_full(m.mse) + "}";
  }
  out += "\n  },\n  \"n_test\": " + std::to_string(report.n_test) + "\n}\n";
  return out;
}

}  // namespace rashomon
