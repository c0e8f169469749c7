#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace rashomon {

/// Column-named numeric table with one designated target column.
class Dataset {
 public:
  Dataset() = default;
  /// `values` is n x columns.size(); throws SchemaError unless every name is
  /// unique, `target` is one of them and every entry is finite.
  Dataset(std::vector<std::string> columns, std::string target,
          Eigen::MatrixXd values);

  const std::vector<std::string>& column_names() const { return columns_; }
  const std::string& target_name() const { return target_; }
  const Eigen::MatrixXd& values() const { return values_; }

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index target_index() const { return target_index_; }

  /// Non-target column names, in column order.
  std::vector<std::string> feature_names() const;
  /// n x p matrix of the non-target columns, in column order.
  Eigen::MatrixXd features() const;
  Eigen::VectorXd target() const;

  /// Same schema, rows selected by index (repeats allowed).
  Dataset select_rows(const std::vector<Eigen::Index>& rows) const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.columns_ == b.columns_ && a.target_ == b.target_ &&
           a.values_.rows() == b.values_.rows() &&
           a.values_.cols() == b.values_.cols() && a.values_ == b.values_;
  }

 private:
  std::vector<std::string> columns_;
  std::string target_;
  Eigen::Index target_index_ = 0;
  Eigen::MatrixXd values_;
};

/// Semicolon-separated text with a header row, target column first,
/// '.' decimal mark, LF line endings and 17 significant digits.
std::string to_csv(const Dataset& d);
/// Parses the format written by to_csv. The target is `target` when given,
/// otherwise the first column. Accepts CRLF line endings and surrounding
/// double quotes on header names. Throws ParseError naming the line.
Dataset from_csv(const std::string& text, const std::string& target = "");

void write_csv(const Dataset& d, const std::string& path);
Dataset read_csv(const std::string& path, const std::string& target = "");

}  // namespace rashomon
