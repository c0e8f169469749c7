#include <string>

#include "rashomon/error.hpp"
#include "rashomon/model.hpp"

namespace rashomon {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::linear: return "linear";
    case Family::tree: return "tree";
    case Family::forest: return "forest";
    case Family::network: return "network";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  if (name == "linear") return Family::linear;
  if (name == "tree") return Family::tree;
  if (name == "forest") return Family::forest;
  if (name == "network") return Family::network;
  throw InvalidArgument("unknown model family '" + std::string(name) + "'");
}

namespace {

template <typename RowFn>
Eigen::VectorXd per_row(const Eigen::MatrixXd& x, RowFn&& fn) {
  Eigen::VectorXd out(x.rows());
  Eigen::VectorXd row(x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    row = x.row(i).transpose();
    out(i) = fn(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
  }
  return out;
}

}  // namespace

Eigen::VectorXd predict(const Model& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.n_features())
    throw SchemaError("model '" + model.label + "' expects " +
                      std::to_string(model.n_features()) + " feature columns, got " +
                      std::to_string(x.cols()));
  switch (model.family) {
    case Family::linear: {
      const auto& fit = model.as<LinearFit>();
      Eigen::VectorXd out = x * fit.coefficients;
      out.array() += fit.intercept;
      return out;
    }
    case Family::tree: {
      const auto& fit = model.as<TreeFit>();
      return per_row(x, [&](std::span<const double> r) { return fit.predict_row(r); });
    }
    case Family::forest: {
      const auto& fit = model.as<ForestFit>();
      const double scale = 1.0 / static_cast<double>(fit.trees.size());
      return per_row(x, [&](std::span<const double> r) {
        double sum = 0.0;
        for (const auto& t : fit.trees) sum += t.predict_row(r);
        return sum * scale;
      });
    }
    case Family::network:
      return network::forward(model.as<NetworkFit>(), x);
  }
  throw InvalidArgument("unknown model family");
}

Eigen::VectorXd predict(const Model& model, const Dataset& data) {
  if (data.feature_names() != model.feature_names)
    throw SchemaError("dataset features do not match model '" + model.label + "'");
  return predict(model, data.features());
}

}  // namespace rashomon
