#include "rashomon/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <set>
#include <string_view>

#include "rashomon/error.hpp"
#include "rashomon/numfmt.hpp"

namespace rashomon {

Dataset::Dataset(std::vector<std::string> columns, std::string target,
                 Eigen::MatrixXd values)
    : columns_(std::move(columns)),
      target_(std::move(target)),
      values_(std::move(values)) {
  if (values_.cols() != static_cast<Eigen::Index>(columns_.size()))
    throw SchemaError("dataset has " + std::to_string(columns_.size()) +
                      " names but " + std::to_string(values_.cols()) +
                      " columns");
  if (std::set<std::string>(columns_.begin(), columns_.end()).size() !=
      columns_.size())
    throw SchemaError("duplicate column name");
  const auto it = std::find(columns_.begin(), columns_.end(), target_);
  if (it == columns_.end())
    throw SchemaError("target '" + target_ + "' is not a column");
  target_index_ = it - columns_.begin();
  if (!values_.allFinite()) throw SchemaError("dataset has non-finite values");
}

std::vector<std::string> Dataset::feature_names() const {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < columns_.size(); ++j)
    if (static_cast<Eigen::Index>(j) != target_index_) out.push_back(columns_[j]);
  return out;
}

Eigen::MatrixXd Dataset::features() const {
  Eigen::MatrixXd x(values_.rows(), values_.cols() - 1);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < values_.cols(); ++j)
    if (j != target_index_) x.col(k++) = values_.col(j);
  return x;
}

Eigen::VectorXd Dataset::target() const { return values_.col(target_index_); }

Dataset Dataset::select_rows(const std::vector<Eigen::Index>& rows) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), values_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = values_.row(rows[i]);
  return Dataset(columns_, target_, std::move(out));
}

std::string to_csv(const Dataset& d) {
  std::vector<Eigen::Index> order{d.target_index()};
  for (Eigen::Index j = 0; j < d.values().cols(); ++j)
    if (j != d.target_index()) order.push_back(j);

  std::string out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k) out += ';';
    out += d.column_names()[static_cast<std::size_t>(order[k])];
  }
  out += '\n';
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (k) out += ';';
      out += format_full(d.values()(i, order[k]));
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(';', start);
    cells.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

double parse_cell(std::string_view cell, std::size_t line) {
  const std::string text(trim(cell));
  if (text.empty()) throw ParseError("empty cell", line);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size())
    throw ParseError("non-numeric cell '" + text + "'", line);
  if (errno == ERANGE && std::isinf(v))
    throw ParseError("value out of range '" + text + "'", line);
  if (!std::isfinite(v)) throw ParseError("non-finite value '" + text + "'", line);
  return v;
}

}  // namespace

Dataset from_csv(const std::string& text, const std::string& target) {
  std::vector<std::string_view> lines;
  {
    std::string_view rest(text);
    while (!rest.empty()) {
      const auto pos = rest.find('\n');
      auto line = rest.substr(0, pos);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError("missing header", 1);

  std::vector<std::string> names;
  for (auto cell : split(lines[0])) {
    cell = trim(cell);
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"')
      cell = cell.substr(1, cell.size() - 2);
    if (cell.empty()) throw ParseError("empty column name in header", 1);
    names.emplace_back(cell);
  }
  if (names.size() < 2) throw ParseError("header needs at least two columns", 1);
  if (std::set<std::string>(names.begin(), names.end()).size() != names.size())
    throw ParseError("duplicate column name in header", 1);
  const std::string target_name = target.empty() ? names.front() : target;
  if (std::find(names.begin(), names.end(), target_name) == names.end())
    throw ParseError("target column '" + target_name + "' not in header", 1);

  const auto width = static_cast<Eigen::Index>(names.size());
  Eigen::MatrixXd values(static_cast<Eigen::Index>(lines.size() - 1), width);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split(lines[r]);
    if (cells.size() != names.size())
      throw ParseError("expected " + std::to_string(names.size()) +
                           " cells, found " + std::to_string(cells.size()),
                       r + 1);
    for (std::size_t c = 0; c < cells.size(); ++c)
      values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c)) =
          parse_cell(cells[c], r + 1);
  }
  return Dataset(std::move(names), target_name, std::move(values));
}

void write_csv(const Dataset& d, const std::string& path) {
  write_file_atomic(path, to_csv(d));
}

Dataset read_csv(const std::string& path, const std::string& target) {
  return from_csv(read_file(path), target);
}

}  // namespace rashomon
