#include "mgsn/data.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "mgsn/errors.hpp"

namespace mgsn {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

// Board stiffness, four measurements per board.
constexpr std::array<double, 120> kStiffness = {
    1889, 1651, 1561, 1778, 2403, 2048, 2087, 2197, 2119, 1700, 1815, 2222, 1645, 1627, 1110,
    1533, 1976, 1916, 1614, 1883, 1712, 1712, 1439, 1546, 1943, 1685, 1271, 1671, 2104, 1820,
    1717, 1874, 2983, 2794, 2412, 2581, 1745, 1600, 1348, 1508, 1710, 1591, 1518, 1667, 2046,
    1907, 1627, 1898, 1840, 1841, 1595, 1741, 1867, 1685, 1493, 1678, 1859, 1649, 1389, 1714,
    1954, 2149, 1180, 1281, 1325, 1170, 1002, 1176, 1419, 1371, 1251, 1308, 1828, 1634, 1602,
    1755, 1725, 1594, 1313, 1646, 2276, 2189, 1547, 2111, 1899, 1614, 1422, 1477, 1633, 1513,
    1290, 1516, 2061, 1867, 1646, 2037, 1856, 1493, 1356, 1533, 1727, 1412, 1238, 1469, 2168,
    1896, 1701, 1834, 1655, 1675, 1414, 1597, 2326, 2301, 2065, 2234, 1490, 1382, 1214, 1284,
};

}  // namespace

DataMatrix::DataMatrix(Matrix values, std::vector<std::string> labels)
    : values_(std::move(values)), labels_(std::move(labels)) {
  if (values_.rows() < 1 || values_.cols() < 1) throw EmptyInput("data matrix has no entries");
  if (!values_.allFinite()) throw InvalidParameter("data matrix has non-finite entries");
  if (labels_.empty()) {
    for (int j = 0; j < cols(); ++j) labels_.push_back("x" + std::to_string(j + 1));
  }
  if (static_cast<int>(labels_.size()) != cols()) {
    throw DimensionMismatch(std::to_string(labels_.size()) + " labels for " +
                            std::to_string(cols()) + " columns");
  }
}

DataMatrix DataMatrix::scaled(double c) const { return DataMatrix(values_ * c, labels_); }

Vector sample_mean(const DataMatrix& data) { return data.values().colwise().mean().transpose(); }

Matrix sample_covariance(const DataMatrix& data) {
  const Matrix centered = data.values().rowwise() - data.values().colwise().mean();
  return (centered.transpose() * centered) / static_cast<double>(data.rows());
}

DataMatrix read_csv(std::istream& in) {
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_row(line);
      break;
    }
  }
  if (header.empty()) throw ParseError("CSV input has no header row");
  const std::size_t d = header.size();

  std::vector<double> flat;
  int n = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_row(line);
    if (cells.size() != d) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(d) +
                       " cells, found " + std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j < d; ++j) {
      double v = 0.0;
      if (!parse_double(cells[j], v)) {
        throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(j + 1) +
                         " (" + header[j] + "): '" + cells[j] + "' is not a number");
      }
      flat.push_back(v);
    }
    ++n;
  }
  if (n == 0) throw ParseError("CSV input has no data rows");
  Matrix values(n, static_cast<int>(d));
  for (int i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) values(i, static_cast<int>(j)) = flat[i * d + j];
  }
  return DataMatrix(std::move(values), std::move(header));
}

DataMatrix read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_csv(in);
}

void write_csv(std::ostream& out, const DataMatrix& data) {
  const auto& labels = data.labels();
  for (std::size_t j = 0; j < labels.size(); ++j) out << (j ? "," : "") << labels[j];
  out << '\n';
  // max_digits10 makes the text round-trip to the same doubles.
  std::ostringstream cell;
  cell << std::setprecision(17);
  for (int i = 0; i < data.rows(); ++i) {
    for (int j = 0; j < data.cols(); ++j) {
      cell.str("");
      cell << data.values()(i, j);
      out << (j ? "," : "") << cell.str();
    }
    out << '\n';
  }
}

DataMatrix stiffness_dataset(bool scaled) {
  Matrix values(30, 4);
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 4; ++j) values(i, j) = kStiffness[4 * i + j];
  }
  DataMatrix raw(std::move(values), {"x1", "x2", "x3", "x4"});
  return scaled ? DataMatrix(raw.values() / 100.0, raw.labels()) : raw;
}

}  // namespace mgsn
