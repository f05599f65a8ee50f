#include "mmls/point_cloud.hpp"

#include "mmls/error.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mmls {

PointCloud PointCloud::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  const auto dim = static_cast<Index>(rows.front().size());
  PointCloud cloud(dim, static_cast<Index>(rows.size()));
  for (Index i = 0; i < cloud.size(); ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != dim)
      throw ValidationError("inconsistent point dimensions");
    for (Index j = 0; j < dim; ++j) cloud.coords()(j, i) = row[static_cast<std::size_t>(j)];
  }
  return cloud;
}

void PointCloud::append(const Eigen::Ref<const Eigen::VectorXd>& p) {
  if (empty() && dim() == 0) {
    coords_.resize(p.size(), 0);
  }
  if (p.size() != dim()) throw ValidationError("appended point has wrong dimension");
  coords_.conservativeResize(Eigen::NoChange, coords_.cols() + 1);
  coords_.col(coords_.cols() - 1) = p;
}

PointCloud parse_cloud(std::istream& in, const std::string& origin) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;

    std::vector<double> row;
    const char* p = line.data() + first;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == ',' || *p == '\r')) ++p;
      if (p == end) break;
      double value = 0.0;
      auto [next, ec] = std::from_chars(p, end, value);
      if (ec != std::errc() || next == p)
        throw IoError(origin + ":" + std::to_string(line_no) + ": malformed number");
      row.push_back(value);
      p = next;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(origin + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(rows.front().size()) + " coordinates, got " +
                    std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  return PointCloud::from_rows(rows);
}

PointCloud read_cloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_cloud(in, path);
}

void write_cloud(std::ostream& out, const PointCloud& cloud, const std::vector<std::string>& header) {
  for (const auto& line : header) out << "# " << line << '\n';
  out << std::setprecision(17);
  for (Index i = 0; i < cloud.size(); ++i) {
    for (Index j = 0; j < cloud.dim(); ++j) {
      if (j) out << ' ';
      out << cloud.coords()(j, i);
    }
    out << '\n';
  }
}

void write_cloud(const std::string& path, const PointCloud& cloud,
                 const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_cloud(out, cloud, header);
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace mmls
