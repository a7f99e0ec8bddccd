#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mgsn/linalg.hpp"

namespace mgsn {

/// n x d observations with column labels.
class DataMatrix {
 public:
  DataMatrix() = default;
  /// Labels default to x1..xd when empty. Throws on non-finite values or a
  /// label count that does not match the column count.
  explicit DataMatrix(Matrix values, std::vector<std::string> labels = {});

  int rows() const { return static_cast<int>(values_.rows()); }
  int cols() const { return static_cast<int>(values_.cols()); }
  const Matrix& values() const { return values_; }
  const std::vector<std::string>& labels() const { return labels_; }
  Vector row(int i) const { return values_.row(i).transpose(); }

  DataMatrix scaled(double c) const;

 private:
  Matrix values_;
  std::vector<std::string> labels_;
};

/// Sample mean and the divisor-n sample covariance.
Vector sample_mean(const DataMatrix& data);
Matrix sample_covariance(const DataMatrix& data);

/// Comma-separated, header row first, no missing cells. Throws ParseError
/// naming the 1-based line and column of the first bad cell.
DataMatrix read_csv(std::istream& in);
DataMatrix read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const DataMatrix& data);

/// Board stiffness measurements, 30 boards x 4 measurements. With
/// `scaled` every value is divided by 100.
DataMatrix stiffness_dataset(bool scaled = true);

}  // namespace mgsn
