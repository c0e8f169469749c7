#include "rashomon/model_io.hpp"

#include <cmath>
#include <limits>

#include "rashomon/error.hpp"
#include "rashomon/numfmt.hpp"

namespace rashomon {

using nlohmann::json;

namespace {

// NaN (undefined t statistics) is stored as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double get_number(const json& v) {
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return v.get<double>();
}

json vec(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

Eigen::VectorXd get_vec(const json& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = get_number(v[i]);
  return out;
}

// Row-major nested arrays.
json mat(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vec(m.row(r).transpose()));
  return out;
}

Eigen::MatrixXd get_mat(const json& v) {
  const auto rows = static_cast<Eigen::Index>(v.size());
  const auto cols = rows ? static_cast<Eigen::Index>(v[0].size()) : 0;
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(v[static_cast<std::size_t>(r)].size()) != cols)
      throw ParseError("ragged matrix in model document", 0);
    out.row(r) = get_vec(v[static_cast<std::size_t>(r)]).transpose();
  }
  return out;
}

json tree_json(const TreeFit& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold},
                     {"left", n.left}, {"right", n.right}, {"value", n.value},
                     {"count", n.count}, {"depth", n.depth}});
  }
  return {{"max_depth", t.max_depth}, {"min_split", t.min_split}, {"nodes", nodes}};
}

TreeFit tree_from(const json& j) {
  TreeFit t;
  t.max_depth = j.at("max_depth").get<int>();
  t.min_split = j.at("min_split").get<int>();
  for (const auto& n : j.at("nodes")) {
    TreeNode node;
    node.feature = n.at("feature").get<int>();
    node.threshold = n.at("threshold").get<double>();
    node.left = n.at("left").get<int>();
    node.right = n.at("right").get<int>();
    node.value = n.at("value").get<double>();
    node.count = n.at("count").get<int>();
    node.depth = n.at("depth").get<int>();
    t.nodes.push_back(node);
  }
  const auto size = static_cast<int>(t.nodes.size());
  if (size == 0) throw ParseError("tree has no nodes", 0);
  for (const auto& node : t.nodes)
    if (!node.is_leaf() &&
        (node.left <= 0 || node.left >= size || node.right <= 0 || node.right >= size))
      throw ParseError("tree node child index out of range", 0);
  return t;
}

}  // namespace

json model_to_json(const Model& model) {
  json doc{{"format", "rashomon-model"},
           {"version", kModelFormatVersion},
           {"family", std::string(to_string(model.family))},
           {"label", model.label},
           {"feature_names", model.feature_names},
           {"target_name", model.target_name},
           {"seed", model.seed}};
  json fit;
  switch (model.family) {
    case Family::linear: {
      const auto& f = model.as<LinearFit>();
      fit = {{"intercept", f.intercept},
             {"coefficients", vec(f.coefficients)},
             {"standard_errors", vec(f.standard_errors)},
             {"t_statistics", vec(f.t_statistics)},
             {"p_values", vec(f.p_values)},
             {"residual_variance", f.residual_variance},
             {"residual_df", f.residual_df}};
      break;
    }
    case Family::tree:
      fit = tree_json(model.as<TreeFit>());
      break;
    case Family::forest: {
      const auto& f = model.as<ForestFit>();
      json trees = json::array();
      for (const auto& t : f.trees) trees.push_back(tree_json(t));
      fit = {{"mtry", f.mtry},           {"min_node", f.min_node},
             {"bootstrapped", f.bootstrapped}, {"oob_mse", f.oob_mse},
             {"oob_rows", f.oob_rows},   {"bootstrap", f.bootstrap},
             {"trees", trees}};
      break;
    }
    case Family::network: {
      const auto& f = model.as<NetworkFit>();
      json weights = json::array(), biases = json::array();
      for (const auto& w : f.weights) weights.push_back(mat(w));
      for (const auto& b : f.biases) biases.push_back(vec(b));
      fit = {{"layers", f.layers},
             {"hidden_activation", "logistic"},
             {"output_activation", "identity"},
             {"weights", weights},
             {"biases", biases},
             {"grad_threshold", f.grad_threshold},
             {"max_epochs", f.max_epochs},
             {"epochs", f.epochs},
             {"converged", f.converged},
             {"max_gradient", number(f.max_gradient)}};
      break;
    }
  }
  doc["fit"] = std::move(fit);
  return doc;
}

Model model_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "rashomon-model")
      throw ParseError("not a rashomon model document", 0);
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw ParseError("unsupported model version " + std::to_string(version), 0);

    Model model;
    model.family = family_from_string(doc.at("family").get<std::string>());
    model.label = doc.at("label").get<std::string>();
    model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    model.target_name = doc.at("target_name").get<std::string>();
    model.seed = doc.at("seed").get<std::uint64_t>();
    const json& f = doc.at("fit");
    const auto p = static_cast<Eigen::Index>(model.feature_names.size());
    switch (model.family) {
      case Family::linear: {
        LinearFit fit;
        fit.intercept = f.at("intercept").get<double>();
        fit.coefficients = get_vec(f.at("coefficients"));
        fit.standard_errors = get_vec(f.at("standard_errors"));
        fit.t_statistics = get_vec(f.at("t_statistics"));
        fit.p_values = get_vec(f.at("p_values"));
        fit.residual_variance = f.at("residual_variance").get<double>();
        fit.residual_df = f.at("residual_df").get<int>();
        if (fit.coefficients.size() != p)
          throw ParseError("coefficient count does not match features", 0);
        model.fit = std::move(fit);
        break;
      }
      case Family::tree:
        model.fit = tree_from(f);
        break;
      case Family::forest: {
        ForestFit fit;
        fit.mtry = f.at("mtry").get<int>();
        fit.min_node = f.at("min_node").get<int>();
        fit.bootstrapped = f.at("bootstrapped").get<bool>();
        fit.oob_mse = f.at("oob_mse").get<double>();
        fit.oob_rows = f.at("oob_rows").get<int>();
        fit.bootstrap = f.at("bootstrap").get<std::vector<std::vector<std::uint32_t>>>();
        for (const auto& t : f.at("trees")) fit.trees.push_back(tree_from(t));
        if (fit.trees.empty()) throw ParseError("forest has no trees", 0);
        model.fit = std::move(fit);
        break;
      }
      case Family::network: {
        NetworkFit fit;
        fit.layers = f.at("layers").get<std::vector<int>>();
        for (const auto& w : f.at("weights")) fit.weights.push_back(get_mat(w));
        for (const auto& b : f.at("biases")) fit.biases.push_back(get_vec(b));
        fit.grad_threshold = f.at("grad_threshold").get<double>();
        fit.max_epochs = f.at("max_epochs").get<long>();
        fit.epochs = f.at("epochs").get<long>();
        fit.converged = f.at("converged").get<bool>();
        fit.max_gradient = get_number(f.at("max_gradient"));
        if (fit.layers.size() < 2 || fit.layers.front() != p ||
            fit.weights.size() + 1 != fit.layers.size() ||
            fit.biases.size() != fit.weights.size())
          throw ParseError("network dimensions do not chain", 0);
        for (std::size_t l = 0; l < fit.weights.size(); ++l)
          if (fit.weights[l].rows() != fit.layers[l + 1] ||
              fit.weights[l].cols() != fit.layers[l] ||
              fit.biases[l].size() != fit.layers[l + 1])
            throw ParseError("network layer " + std::to_string(l) +
                                 " has wrong shape",
                             0);
        model.fit = std::move(fit);
        break;
      }
    }
    return model;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid model document: ") + e.what(), 0);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), 0);
  }
}

void save_model(const Model& model, const std::string& path) {
  write_file_atomic(path, model_to_json(model).dump(1) + "\n");
}

Model load_model(const std::string& path) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), 0);
  }
  return model_from_json(doc);
}

}  // namespace rashomon
