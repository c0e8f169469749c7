#include <string>

#include "doctest.h"
#include "rashomon/error.hpp"
#include "rashomon/explain.hpp"
#include "rashomon/plot.hpp"
#include "rashomon/synth.hpp"

using namespace rashomon;

namespace {

int count(const std::string& s, const std::string& needle) {
  int n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

void check_svg(const std::string& svg) {
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("version=\"1.1\"") != std::string::npos);
  CHECK(svg.size() > 100);
  CHECK(svg.substr(svg.size() - 7) == "</svg>\n");
  CHECK(svg.find("nan") == std::string::npos);
  CHECK(svg.find("inf") == std::string::npos);
}

}  // namespace

TEST_CASE("partial dependence grid has one panel per model and feature") {
  GenConfig c;
  c.n_train = 300;
  c.n_test = 100;
  const auto [train, test] = generate(c);
  Model a = fit_linear(train);
  Model b = fit_tree(train, TreeParams{3, 20});
  Model f = fit_forest(train, ForestParams{10});
  Model n = fit_network(train, NetworkParams{{8, 4}, 0.05, 100});
  std::vector<PDProfile> profiles;
  PdpCiOptions opt;
  opt.n_boot = 10;
  opt.grid_size = 11;
  for (const Model* m : {&a, &b, &f, &n})
    for (const char* feat : {"x1", "x2", "x3"}) profiles.push_back(pdp_ci(*m, test, feat, opt));
  const std::string svg = plot::pdp_grid(profiles);
  check_svg(svg);
  CHECK(count(svg, " : x") == 12);
  CHECK(count(svg, "<polygon") >= 12);
  CHECK(svg == plot::pdp_grid(profiles));
  CHECK_THROWS_AS(plot::pdp_grid({}), InvalidArgument);
}

TEST_CASE("residual chart and scatter matrix are deterministic") {
  GenConfig c;
  c.n_train = 200;
  c.n_test = 300;
  const auto [train, test] = generate(c);
  const std::vector<Model> models{fit_linear(train), fit_tree(train, TreeParams{2, 20})};
  const ResidualTable t = residual_table(models, test);
  const std::string par = plot::residual_parcoord(t, 50);
  check_svg(par);
  CHECK(count(par, "<polyline") >= 50);
  CHECK(par == plot::residual_parcoord(t, 50));
  CHECK_THROWS_AS(plot::residual_parcoord(ResidualTable{}), InvalidArgument);

  const std::string pairs = plot::pairs_matrix(train, test);
  check_svg(pairs);
  CHECK(pairs == plot::pairs_matrix(train, test));
  const Dataset other({"y", "a"}, "y", Eigen::MatrixXd::Ones(3, 2));
  CHECK_THROWS_AS(plot::pairs_matrix(train, other), InvalidArgument);
}

TEST_CASE("couple chart") {
  const std::string svg = plot::couple_curves(0.366);
  check_svg(svg);
  CHECK(svg == plot::couple_curves(0.366));
  CHECK(svg != plot::couple_curves(0.5));
}

TEST_CASE("chart kinds parse") {
  CHECK(plot::chart_kind_from_string("pdp_grid") == plot::ChartKind::pdp_grid);
  CHECK(plot::chart_kind_from_string("couple_curves") == plot::ChartKind::couple_curves);
  CHECK_THROWS_AS(plot::chart_kind_from_string("pie"), InvalidArgument);
}
