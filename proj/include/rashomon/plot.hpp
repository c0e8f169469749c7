#pragma once

#include <span>
#include <string>

#include "rashomon/dataset.hpp"
#include "rashomon/explain.hpp"

// Standalone SVG 1.1 charts. Output is a pure function of the inputs; all
// coordinates use 6 significant digits.
namespace rashomon::plot {

enum class ChartKind { pdp_grid, residual_parcoord, pairs_matrix, couple_curves };

ChartKind chart_kind_from_string(const std::string& name);

/// One panel per (model, feature): models in rows, features in columns.
/// Bootstrap bands are drawn when present. Throws InvalidArgument on empty
/// input.
std::string pdp_grid(std::span<const PDProfile> profiles);

/// One vertical axis per model, one polyline per observation. At most
/// max_lines observations are drawn, taken at an even stride.
std::string residual_parcoord(const ResidualTable& table, int max_lines = 1000);

/// Scatter matrix of two datasets with the same columns: densities on the
/// diagonal, scatter below, correlations above, one colour per set. At most
/// max_points rows per set are drawn, taken at an even stride.
std::string pairs_matrix(const Dataset& train, const Dataset& test,
                         int max_points = 1000);

/// True target sign(x)|x|^alpha with the best linear and stump fits.
std::string couple_curves(double alpha);

}  // namespace rashomon::plot
