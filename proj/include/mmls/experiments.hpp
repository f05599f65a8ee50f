#pragma once

#include "mmls/geodesic.hpp"
#include "mmls/point_cloud.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace mmls {

inline constexpr const char* kVersion = "0.1.0";

/// Geodesic-accuracy study on random embedded d-spheres: Dijkstra on the raw
/// samples, Dijkstra on densified clouds for each k, and plain Euclidean distance,
/// all scored by RMSE% against the great-circle distance.
struct TableConfig {
  int d = 2;
  Index n = 100;
  int D = 20;
  double radius = 0.5;
  int K = 3;
  int pairs = 100;
  int realizations = 100;
  std::uint64_t seed = 1;
  std::vector<double> noise_levels{0.0};
  std::vector<int> degrees{1, 3};  // k for each densified column
  double h_factor = 2.3;           // h = h_factor * median nearest-neighbor distance
  double sigma_factor = 1.0;       // grid half-width multiplier on estimate_sigma
  ConnectionRule dense_rule = ConnectionRule::knn(40);
  double sample_radius_factor = 2.2;  // raw-sample graph: radius rule grown until connected
};

TableConfig table1_defaults();
TableConfig table2_defaults();

struct PairRecord {
  int noise_index = 0;
  int realization = 0;
  int pair = 0;
  Index a = 0;
  Index b = 0;
  double truth = 0.0;
  double euclidean = 0.0;
  double on_samples = 0.0;
  std::vector<double> on_dense;  // one per degree; NaN when unavailable
};

struct RealizationLog {
  int noise_index = 0;
  int realization = 0;
  double h = 0.0;
  std::vector<double> sigma;         // per degree
  std::vector<Index> dropped;        // grid nodes lost per degree
  std::vector<Index> dense_size;     // per degree
  std::string error;                 // non-empty when the realization aborted
  double seconds = 0.0;
};

struct MethodRow {
  double noise = 0.0;
  std::string method;  // "R", "X<k>", "Euclidean"
  double rmse_percent = std::numeric_limits<double>::quiet_NaN();
  Index count = 0;
};

struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<MethodRow> rows;
  std::vector<PairRecord> records;
  std::vector<RealizationLog> realizations;
  bool partial = false;
  double seconds = 0.0;

  const MethodRow* find(double noise, const std::string& method) const;

  /// CSV with a '#'-prefixed config header, the summary rows, then raw records.
  void write_csv(std::ostream& out, bool include_timings = true) const;
};

ExperimentReport run_table(const TableConfig& config, const std::string& name = "table");
ExperimentReport run_table1(const TableConfig& config);
ExperimentReport run_table2(const TableConfig& config);

/// Recomputes the RMSE% rows from raw records (independent of run_table's bookkeeping).
std::vector<MethodRow> summarize(const std::vector<PairRecord>& records, const std::vector<double>& noise_levels,
                                 const std::vector<int>& degrees);

enum class ManifoldKind { circle, sphere, plane };

struct ConvergenceConfig {
  ManifoldKind manifold = ManifoldKind::circle;
  std::vector<int> ks{2, 3};
  std::vector<Index> ns{16, 32, 64, 128};
  std::uint64_t seed = 1;
  int test_points = 200;
  bool geodesic = true;  // also measure geodesic error (circle and sphere only)
  int K = 17;            // enlarging factor for the geodesic graph
  Index pool_factor = 16;  // quasi-uniform levels come from a pool of pool_factor * max(n)
};

struct ConvergenceLevel {
  int k = 0;
  Index n = 0;
  double h = 0.0;
  double radial_error = 0.0;
  double geodesic_error = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceFit {
  int k = 0;
  double radial_slope = std::numeric_limits<double>::quiet_NaN();
  double geodesic_slope = std::numeric_limits<double>::quiet_NaN();
  bool exact_regime = false;  // errors at the numerical floor; slopes not fitted
};

struct ConvergenceReport {
  ConvergenceConfig config;
  std::vector<ConvergenceLevel> levels;
  std::vector<ConvergenceFit> fits;
  double seconds = 0.0;

  void write_csv(std::ostream& out, bool include_timings = true) const;
  /// Two-column "log h  log error" blocks, one per k and error kind.
  void write_gnuplot(std::ostream& out) const;
};

/// Least-squares slope of log(error) against log(h).
double loglog_slope(const std::vector<double>& hs, const std::vector<double>& errors);

ConvergenceReport run_convergence(const ConvergenceConfig& config);

/// The sample cloud run_convergence uses at level n.
PointCloud convergence_samples(const ConvergenceConfig& config, Index n);

}  // namespace mmls
