#include "mmls/experiments.hpp"

#include "mmls/error.hpp"
#include "mmls/mmls.hpp"
#include "mmls/resample.hpp"
#include "mmls/sampling_stats.hpp"
#include "mmls/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace mmls {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

std::string rule_string(const ConnectionRule& rule) {
  return (rule.kind == ConnectionRule::Kind::radius ? "radius:" : "knn:") + fmt(rule.parameter);
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::ostringstream ss;
  ss << std::setprecision(17);
  for (std::size_t i = 0; i < values.size(); ++i) ss << (i ? ";" : "") << values[i];
  return ss.str();
}

// Unordered pairs of distinct indices, drawn without replacement.
std::vector<std::pair<Index, Index>> draw_pairs(Index n, int count, std::uint64_t seed) {
  if (static_cast<double>(count) > 0.5 * static_cast<double>(n) * static_cast<double>(n - 1))
    throw ValidationError("more pairs requested than distinct sample pairs exist");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> pick(0, n - 1);
  std::set<std::pair<Index, Index>> seen;
  std::vector<std::pair<Index, Index>> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    const Index a = pick(rng);
    const Index b = pick(rng);
    if (a == b || !seen.insert(std::minmax(a, b)).second) continue;
    out.emplace_back(a, b);
  }
  return out;
}

// Dijkstra lengths for every pair, one single-source run per distinct source.
std::vector<double> pair_lengths(const GeodesicGraph& graph, const std::vector<std::pair<Index, Index>>& pairs) {
  std::map<Index, std::vector<double>> cache;
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    auto it = cache.find(a);
    if (it == cache.end()) it = cache.emplace(a, dijkstra_distances(graph, a)).first;
    out.push_back(it->second[static_cast<std::size_t>(b)]);
  }
  return out;
}

struct RealizationResult {
  RealizationLog log;
  std::vector<PairRecord> records;
};

RealizationResult run_realization(const TableConfig& cfg, int noise_index, int realization) {
  const auto start = Clock::now();
  RealizationResult out;
  out.log.noise_index = noise_index;
  out.log.realization = realization;

  const auto stream = static_cast<std::uint64_t>(realization) * 4;
  auto [clean, emb] = sample_sphere(cfg.d, cfg.D, cfg.radius, cfg.n, derive_seed(cfg.seed, stream));
  const PointCloud cloud =
      add_noise(clean, cfg.noise_levels[static_cast<std::size_t>(noise_index)],
                derive_seed(cfg.seed, stream + 1) + static_cast<std::uint64_t>(noise_index));
  const auto pairs = draw_pairs(cfg.n, cfg.pairs, derive_seed(cfg.seed, stream + 2));
  const std::uint64_t sigma_seed = derive_seed(cfg.seed, stream + 3);

  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [a, b] = pairs[p];
    PairRecord rec;
    rec.noise_index = noise_index;
    rec.realization = realization;
    rec.pair = static_cast<int>(p);
    rec.a = a;
    rec.b = b;
    rec.truth = sphere_geodesic_oracle(emb, clean.point(a), clean.point(b));
    rec.euclidean = (cloud.point(a) - cloud.point(b)).norm();
    out.records.push_back(std::move(rec));
  }

  const double base_radius = default_connection_radius(cloud, cfg.sample_radius_factor);
  const auto sample_graph = build_graph(cloud, ConnectionRule::radius(connected_radius(cloud, base_radius)));
  const auto on_samples = pair_lengths(sample_graph, pairs);
  for (std::size_t p = 0; p < pairs.size(); ++p) out.records[p].on_samples = on_samples[p];

  out.log.h = cfg.h_factor * median_nn_distance(cloud);
  std::set<Index> endpoints;
  for (const auto& [a, b] : pairs) {
    endpoints.insert(a);
    endpoints.insert(b);
  }

  for (int k : cfg.degrees) {
    MMLSConfig mcfg;
    mcfg.intrinsic_dim = cfg.d;
    mcfg.k = k;
    mcfg.fill_distance = out.log.h;
    const ManifoldMLS mls(cloud, mcfg);

    ResampleConfig rcfg;
    rcfg.enlarging_factor = cfg.K;
    rcfg.sigma = cfg.sigma_factor * estimate_sigma(cloud, cfg.d, k, sigma_seed);
    rcfg.seed = sigma_seed;
    rcfg.skip_failures = true;
    auto res = resample_serial(mls, rcfg);
    out.log.sigma.push_back(rcfg.sigma);
    out.log.dropped.push_back(res.dropped());

    PointCloud dense = std::move(res.points);
    const KdTree dense_index(dense.coords());
    std::map<Index, Index> node_of;
    for (Index e : endpoints) {
      try {
        const Eigen::VectorXd p = mls.project(cloud.point(e));
        const auto nn = dense_index.nearest(p);
        if (nn.distance < kCoincidenceTolerance) {
          node_of[e] = nn.index;
        } else {
          dense.append(p);
          node_of[e] = dense.size() - 1;
        }
      } catch (const Error&) {
        // The pair keeps a NaN estimate for this column.
      }
    }
    out.log.dense_size.push_back(dense.size());

    ConnectionRule rule = cfg.dense_rule;
    if (rule.kind == ConnectionRule::Kind::radius && !(rule.parameter > 0.0))
      rule = ConnectionRule::radius(connected_radius(dense, default_connection_radius(dense)));
    const auto graph = build_graph(dense, rule);

    std::vector<std::pair<Index, Index>> dense_pairs;
    std::vector<std::size_t> which;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto ia = node_of.find(pairs[p].first);
      const auto ib = node_of.find(pairs[p].second);
      if (ia != node_of.end() && ib != node_of.end()) {
        dense_pairs.emplace_back(ia->second, ib->second);
        which.push_back(p);
      }
    }
    const auto lengths = pair_lengths(graph, dense_pairs);
    for (auto& rec : out.records) rec.on_dense.push_back(std::numeric_limits<double>::quiet_NaN());
    for (std::size_t j = 0; j < which.size(); ++j) {
      const double len = lengths[j];
      out.records[which[j]].on_dense.back() = std::isfinite(len) ? len : std::numeric_limits<double>::quiet_NaN();
    }
  }
  out.log.seconds = seconds_since(start);
  return out;
}

}  // namespace

TableConfig table1_defaults() { return TableConfig{}; }

TableConfig table2_defaults() {
  TableConfig cfg;
  cfg.n = 400;
  cfg.K = 5;
  cfg.noise_levels = {1e-5, 1e-3, 1e-2};
  return cfg;
}

const MethodRow* ExperimentReport::find(double noise, const std::string& method) const {
  for (const auto& row : rows)
    if (row.noise == noise && row.method == method) return &row;
  return nullptr;
}

std::vector<MethodRow> summarize(const std::vector<PairRecord>& records, const std::vector<double>& noise_levels,
                                 const std::vector<int>& degrees) {
  std::vector<MethodRow> rows;
  for (std::size_t ni = 0; ni < noise_levels.size(); ++ni) {
    const auto column = [&](const std::string& name, auto&& value) {
      std::vector<double> est;
      std::vector<double> truth;
      for (const auto& rec : records) {
        if (rec.noise_index != static_cast<int>(ni)) continue;
        const double v = value(rec);
        if (!std::isfinite(v)) continue;
        est.push_back(v);
        truth.push_back(rec.truth);
      }
      MethodRow row;
      row.noise = noise_levels[ni];
      row.method = name;
      row.count = static_cast<Index>(est.size());
      if (!est.empty()) row.rmse_percent = rmse_percent(est, truth);
      rows.push_back(row);
    };
    column("R", [](const PairRecord& r) { return r.on_samples; });
    for (std::size_t di = 0; di < degrees.size(); ++di)
      column("X" + std::to_string(degrees[di]), [di](const PairRecord& r) {
        return di < r.on_dense.size() ? r.on_dense[di] : std::numeric_limits<double>::quiet_NaN();
      });
    column("Euclidean", [](const PairRecord& r) { return r.euclidean; });
  }
  return rows;
}

ExperimentReport run_table(const TableConfig& cfg, const std::string& name) {
  if (cfg.d < 1 || cfg.n < 2 || cfg.D < cfg.d + 1 || !(cfg.radius > 0.0) || cfg.K < 1 || cfg.pairs < 1 ||
      cfg.realizations < 1 || cfg.noise_levels.empty() || cfg.degrees.empty())
    throw ValidationError("invalid experiment parameters");

  const auto start = Clock::now();
  ExperimentReport report;
  report.name = name;
  report.config = {{"experiment", name},
                   {"version", kVersion},
                   {"d", std::to_string(cfg.d)},
                   {"n", std::to_string(cfg.n)},
                   {"D", std::to_string(cfg.D)},
                   {"radius", fmt(cfg.radius)},
                   {"K", std::to_string(cfg.K)},
                   {"pairs", std::to_string(cfg.pairs)},
                   {"realizations", std::to_string(cfg.realizations)},
                   {"seed", std::to_string(cfg.seed)},
                   {"noise_levels", join(cfg.noise_levels)},
                   {"degrees", join(cfg.degrees)},
                   {"h_factor", fmt(cfg.h_factor)},
                   {"sigma_factor", fmt(cfg.sigma_factor)},
                   {"dense_rule", rule_string(cfg.dense_rule)},
                   {"sample_radius_factor", fmt(cfg.sample_radius_factor)}};

  const int levels = static_cast<int>(cfg.noise_levels.size());
  const int total = levels * cfg.realizations;
  std::vector<RealizationResult> results(static_cast<std::size_t>(total));
#pragma omp parallel for schedule(dynamic, 1)
  for (int job = 0; job < total; ++job) {
    const int ni = job / cfg.realizations;
    const int r = job % cfg.realizations;
    auto& slot = results[static_cast<std::size_t>(job)];
    try {
      slot = run_realization(cfg, ni, r);
    } catch (const Error& e) {
      slot = RealizationResult{};
      slot.log.noise_index = ni;
      slot.log.realization = r;
      slot.log.error = e.what();
    }
  }

  for (auto& res : results) {
    if (!res.log.error.empty()) report.partial = true;
    for (auto& rec : res.records) report.records.push_back(std::move(rec));
    report.realizations.push_back(std::move(res.log));
  }
  report.rows = summarize(report.records, cfg.noise_levels, cfg.degrees);
  report.seconds = seconds_since(start);
  return report;
}

ExperimentReport run_table1(const TableConfig& config) { return run_table(config, "table1"); }
ExperimentReport run_table2(const TableConfig& config) { return run_table(config, "table2"); }

void ExperimentReport::write_csv(std::ostream& out, bool include_timings) const {
  for (const auto& [key, value] : config) out << "# " << key << ',' << value << '\n';
  out << "# partial," << (partial ? "true" : "false") << '\n';
  if (include_timings) out << "# seconds," << fmt(seconds) << '\n';
  out << std::setprecision(17);

  out << "section,noise,method,rmse_percent,count\n";
  for (const auto& row : rows)
    out << "summary," << row.noise << ',' << row.method << ',' << row.rmse_percent << ',' << row.count << '\n';

  out << "\nsection,noise_index,realization,h,sigma,dropped,dense_size,error";
  if (include_timings) out << ",seconds";
  out << '\n';
  for (const auto& log : realizations) {
    out << "realization," << log.noise_index << ',' << log.realization << ',' << log.h << ','
        << join(log.sigma) << ',' << join(log.dropped) << ',' << join(log.dense_size) << ",\"" << log.error << '"';
    if (include_timings) out << ',' << log.seconds;
    out << '\n';
  }

  const std::size_t columns = records.empty() ? 0 : records.front().on_dense.size();
  out << "\nsection,noise_index,realization,pair,a,b,truth,euclidean,R";
  for (std::size_t c = 0; c < columns; ++c) out << ",dense" << c;
  out << '\n';
  for (const auto& rec : records) {
    out << "pair," << rec.noise_index << ',' << rec.realization << ',' << rec.pair << ',' << rec.a << ',' << rec.b
        << ',' << rec.truth << ',' << rec.euclidean << ',' << rec.on_samples;
    for (double v : rec.on_dense) out << ',' << v;
    out << '\n';
  }
}

double loglog_slope(const std::vector<double>& hs, const std::vector<double>& errors) {
  if (hs.size() != errors.size() || hs.size() < 3) throw ValidationError("cannot fit slope");
  const auto n = static_cast<double>(hs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (!(hs[i] > 0.0) || !(errors[i] > 0.0)) throw NumericalError("cannot fit slope through non-positive values");
    const double x = std::log(hs[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

constexpr double kExactFloor = 1e-9;

struct ConvergenceFixture {
  PointCloud pool;
  PointCloud tests;
  Eigen::VectorXd center;
  double radius = 1.0;
  int d = 1;
  Eigen::VectorXd normal;  // plane only
  double offset = 0.0;     // plane only: normal . x = offset
};

PointCloud plane_grid(Index per_side) {
  // z = 0.3 x - 0.2 y + 0.1 over the unit square
  PointCloud c(3, per_side * per_side);
  for (Index i = 0; i < per_side; ++i)
    for (Index j = 0; j < per_side; ++j) {
      const double x = static_cast<double>(i) / static_cast<double>(per_side - 1);
      const double y = static_cast<double>(j) / static_cast<double>(per_side - 1);
      c.point(i * per_side + j) << x, y, 0.3 * x - 0.2 * y + 0.1;
    }
  return c;
}

ConvergenceFixture make_fixture(const ConvergenceConfig& cfg, bool with_tests) {
  ConvergenceFixture fx;
  const Index max_n = *std::max_element(cfg.ns.begin(), cfg.ns.end());
  switch (cfg.manifold) {
    case ManifoldKind::circle:
    case ManifoldKind::sphere: {
      fx.d = cfg.manifold == ManifoldKind::circle ? 1 : 2;
      const Eigen::VectorXd origin = Eigen::VectorXd::Zero(fx.d + 1);
      fx.pool = sample_sphere(fx.d, fx.d + 1, 1.0, cfg.pool_factor * max_n, derive_seed(cfg.seed, 0), origin).first;
      if (with_tests)
        fx.tests = sample_sphere(fx.d, fx.d + 1, 1.0, cfg.test_points, derive_seed(cfg.seed, 1), origin).first;
      fx.center = origin;
      break;
    }
    case ManifoldKind::plane: {
      fx.d = 2;
      fx.normal = Eigen::Vector3d(0.3, -0.2, -1.0).normalized();
      fx.offset = fx.normal.dot(Eigen::Vector3d(0.0, 0.0, 0.1));
      std::mt19937_64 rng(derive_seed(cfg.seed, 1));
      std::uniform_real_distribution<double> u(0.25, 0.75);
      fx.tests = PointCloud(3, cfg.test_points);
      for (Index i = 0; i < fx.tests.size(); ++i) {
        const double x = u(rng);
        const double y = u(rng);
        fx.tests.point(i) << x, y, 0.3 * x - 0.2 * y + 0.1;
      }
      break;
    }
  }
  return fx;
}

PointCloud level_samples(const ConvergenceConfig& cfg, const ConvergenceFixture& fx, Index n) {
  if (cfg.manifold == ManifoldKind::plane)
    return plane_grid(std::max<Index>(2, static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))))));
  return farthest_point_subsample(fx.pool, n, derive_seed(cfg.seed, 2));
}

double manifold_error(const ConvergenceFixture& fx, ManifoldKind kind, const Eigen::VectorXd& p) {
  if (kind == ManifoldKind::plane) return std::abs(fx.normal.dot(p) - fx.offset);
  return std::abs((p - fx.center).norm() - fx.radius);
}

}  // namespace

ConvergenceReport run_convergence(const ConvergenceConfig& cfg) {
  if (cfg.ns.size() < 3) throw ValidationError("cannot fit slope: fewer than 3 resolution levels");
  if (cfg.ks.empty()) throw ValidationError("no approximation orders given");
  const auto start = Clock::now();
  ConvergenceReport report;
  report.config = cfg;
  const ConvergenceFixture fx = make_fixture(cfg, true);

  for (int k : cfg.ks) {
    std::vector<double> hs;
    std::vector<double> radial;
    std::vector<double> geo;
    for (Index n : cfg.ns) {
      const PointCloud samples = level_samples(cfg, fx, n);
      MMLSConfig mcfg;
      mcfg.intrinsic_dim = fx.d;
      mcfg.k = k;
      const ManifoldMLS mls(samples, mcfg);

      ConvergenceLevel level;
      level.k = k;
      level.n = samples.size();
      level.h = mls.config().fill_distance;
      const PointCloud projected = mls.project_batch(fx.tests);
      for (Index i = 0; i < projected.size(); ++i)
        level.radial_error = std::max(level.radial_error, manifold_error(fx, cfg.manifold, projected.point(i)));

      if (cfg.geodesic && cfg.manifold != ManifoldKind::plane) {
        // Endpoints two radians apart along a great circle through the first frame plane.
        Eigen::VectorXd p1 = Eigen::VectorXd::Zero(fx.d + 1);
        Eigen::VectorXd p2 = Eigen::VectorXd::Zero(fx.d + 1);
        p1(0) = std::cos(0.3);
        p1(1) = std::sin(0.3);
        p2(0) = std::cos(2.3);
        p2(1) = std::sin(2.3);
        ResampleConfig rcfg;
        rcfg.enlarging_factor = cfg.K;
        rcfg.seed = derive_seed(cfg.seed, 3);
        PointCloud dense = resample(mls, rcfg).points;
        dense.append(mls.project(p1));
        dense.append(mls.project(p2));
        const double r = connected_radius(dense, default_connection_radius(dense));
        const auto graph = build_graph(dense, ConnectionRule::radius(r));
        const auto path = dijkstra(graph, dense.size() - 2, dense.size() - 1);
        level.geodesic_error = std::abs(path.length - 2.0) / 2.0;
        geo.push_back(level.geodesic_error);
      }
      hs.push_back(level.h);
      radial.push_back(level.radial_error);
      report.levels.push_back(level);
    }

    ConvergenceFit fit;
    fit.k = k;
    const double worst = *std::max_element(radial.begin(), radial.end());
    fit.exact_regime = worst < kExactFloor;
    if (!fit.exact_regime) {
      fit.radial_slope = loglog_slope(hs, radial);
      if (!geo.empty()) fit.geodesic_slope = loglog_slope(hs, geo);
    }
    report.fits.push_back(fit);
  }
  report.seconds = seconds_since(start);
  return report;
}

PointCloud convergence_samples(const ConvergenceConfig& config, Index n) {
  if (config.ns.empty()) throw ValidationError("no resolution levels given");
  return level_samples(config, make_fixture(config, false), n);
}

void ConvergenceReport::write_csv(std::ostream& out, bool include_timings) const {
  const char* names[] = {"circle", "sphere", "plane"};
  out << "# experiment,convergence\n# version," << kVersion << '\n';
  out << "# manifold," << names[static_cast<int>(config.manifold)] << '\n';
  out << "# ks," << join(config.ks) << "\n# ns," << join(config.ns) << '\n';
  out << "# seed," << config.seed << "\n# K," << config.K << "\n# test_points," << config.test_points << '\n';
  out << "# pool_factor," << config.pool_factor << '\n';
  if (include_timings) out << "# seconds," << fmt(seconds) << '\n';
  out << std::setprecision(17);
  out << "section,k,n,h,radial_error,geodesic_error\n";
  for (const auto& l : levels)
    out << "level," << l.k << ',' << l.n << ',' << l.h << ',' << l.radial_error << ',' << l.geodesic_error << '\n';
  out << "\nsection,k,radial_slope,geodesic_slope,exact_regime\n";
  for (const auto& f : fits)
    out << "fit," << f.k << ',' << f.radial_slope << ',' << f.geodesic_slope << ',' << (f.exact_regime ? "true" : "false")
        << '\n';
}

void ConvergenceReport::write_gnuplot(std::ostream& out) const {
  out << std::setprecision(17);
  for (const auto& f : fits) {
    out << "# k=" << f.k << " radial error\n";
    for (const auto& l : levels)
      if (l.k == f.k) out << std::log(l.h) << ' ' << std::log(l.radial_error) << '\n';
    out << "\n\n";
    if (!std::isnan(f.geodesic_slope)) {
      out << "# k=" << f.k << " geodesic error\n";
      for (const auto& l : levels)
        if (l.k == f.k) out << std::log(l.h) << ' ' << std::log(l.geodesic_error) << '\n';
      out << "\n\n";
    }
  }
}

}  // namespace mmls
