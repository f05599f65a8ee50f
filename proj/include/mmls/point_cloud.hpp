#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace mmls {

using Index = Eigen::Index;

/// Where a generated point came from: the source sample and its grid node.
struct Provenance {
  Index source = 0;
  Index grid = 0;
};

/// An ordered set of points in R^D, stored column-wise (one column per point).
class PointCloud {
 public:
  PointCloud() = default;
  PointCloud(Index dim, Index count) : coords_(Eigen::MatrixXd::Zero(dim, count)) {}
  explicit PointCloud(Eigen::MatrixXd coords) : coords_(std::move(coords)) {}

  static PointCloud from_rows(const std::vector<std::vector<double>>& rows);

  Index dim() const noexcept { return coords_.rows(); }
  Index size() const noexcept { return coords_.cols(); }
  bool empty() const noexcept { return coords_.cols() == 0; }

  auto point(Index i) const { return coords_.col(i); }
  auto point(Index i) { return coords_.col(i); }

  const Eigen::MatrixXd& coords() const noexcept { return coords_; }
  Eigen::MatrixXd& coords() noexcept { return coords_; }

  void append(const Eigen::Ref<const Eigen::VectorXd>& p);

  /// Optional per-point provenance; either empty or size() entries.
  std::vector<Provenance> provenance;

 private:
  Eigen::MatrixXd coords_;
};

/// Reads the plain-text cloud format: one point per line, whitespace- or
/// comma-separated decimals, '#' comment lines and blank lines ignored.
PointCloud read_cloud(const std::string& path);
PointCloud parse_cloud(std::istream& in, const std::string& origin = "<stream>");

/// Writes one point per line with full round-trip precision. Each header line
/// is emitted prefixed by "# ".
void write_cloud(const std::string& path, const PointCloud& cloud,
                 const std::vector<std::string>& header = {});
void write_cloud(std::ostream& out, const PointCloud& cloud,
                 const std::vector<std::string>& header = {});

}  // namespace mmls
