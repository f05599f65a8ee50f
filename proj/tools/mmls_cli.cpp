#include "mmls/error.hpp"
#include "mmls/experiments.hpp"
#include "mmls/geodesic.hpp"
#include "mmls/mmls.hpp"
#include "mmls/point_cloud.hpp"
#include "mmls/resample.hpp"
#include "mmls/sampling_stats.hpp"
#include "mmls/synthetic.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

namespace {

using namespace mmls;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

// Writes to a file when a path is given, otherwise to stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw IoError("cannot open output file '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void close() {
    if (!file_) return;
    file_->close();
    if (!*file_) throw IoError("failed writing output file");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct ModelOptions {
  std::string input;
  int d = 2;
  int k = 3;
  double h = 0.0;
  double mu = 0.0;
  std::string weight = "bump";
  double c1 = 3.5;
  double eps_w = 1e-8;

  void add_to(CLI::App* app, bool with_weight) {
    app->add_option("--input", input, "Sample cloud file")->required();
    app->add_option("--d", d, "Intrinsic dimension")->check(CLI::PositiveNumber);
    app->add_option("--k", k, "Approximation order")->check(CLI::PositiveNumber);
    app->add_option("--h", h, "Fill distance (default: twice the separation radius)");
    app->add_option("--mu", mu, "Region-of-interest radius (default: 10 h)");
    if (with_weight) {
      app->add_option("--weight", weight, "Weight profile")->check(CLI::IsMember({"bump", "interp"}));
      app->add_option("--c1", c1, "Weight support factor");
      app->add_option("--eps-w", eps_w, "Interpolatory singularity guard");
    }
  }

  ManifoldMLS build() const {
    PointCloud cloud = read_cloud(input);
    MMLSConfig cfg;
    cfg.intrinsic_dim = d;
    cfg.k = k;
    cfg.fill_distance = h;
    cfg.roi_radius = mu;
    cfg.step1_profile = WeightProfile::bump(c1);
    cfg.step2_profile = weight == "interp" ? WeightProfile::interpolatory(c1, eps_w) : WeightProfile::bump(c1);
    return ManifoldMLS(std::move(cloud), cfg);
  }
};

std::string format_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

std::vector<std::pair<Index, Index>> read_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pairs file '" + path + "'");
  std::vector<std::pair<Index, Index>> pairs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream ls(line);
    std::vector<long long> values;
    long long v = 0;
    while (ls >> v) values.push_back(v);
    if (!ls.eof()) throw IoError(path + ":" + std::to_string(lineno) + ": expected integer sample indices");
    if (values.empty()) continue;
    if (values.size() != 2) throw IoError(path + ":" + std::to_string(lineno) + ": expected two indices per line");
    pairs.emplace_back(values[0], values[1]);
  }
  return pairs;
}

// Nearest point of the true sphere, within the embedding's affine span.
Eigen::VectorXd onto_sphere(const SphereEmbedding& emb, const Eigen::VectorXd& p) {
  const Eigen::VectorXd local = emb.frame * (p - emb.center);
  if (local.norm() == 0.0) throw NumericalError("point at the sphere center has no nearest sphere point");
  return emb.center + emb.frame.transpose() * (emb.radius * local / local.norm());
}

int run_sample_sphere(int d, int D, double R, Index n, std::uint64_t seed, double noise, const std::string& output,
                      const std::string& sidecar) {
  auto [clean, emb] = sample_sphere(d, D, R, n, seed);
  const PointCloud cloud = noise > 0.0 ? add_noise(clean, noise, derive_seed(seed, 1)) : clean;
  const std::string side = sidecar.empty() ? output + ".embedding" : sidecar;
  write_cloud(output, cloud,
              {"sample-sphere", "d " + std::to_string(d), "D " + std::to_string(D), "R " + format_double(R),
               "n " + std::to_string(n), "seed " + std::to_string(seed), "noise " + format_double(noise),
               "embedding " + side});
  write_embedding(side, emb);
  return 0;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Manifold moving least-squares reconstruction, resampling and geodesics"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // sample-sphere
  auto* ss = app.add_subcommand("sample-sphere", "Uniform samples of a d-sphere embedded in R^D");
  int ss_d = 2, ss_D = 3;
  double ss_R = 1.0, ss_noise = 0.0;
  Index ss_n = 100;
  std::uint64_t ss_seed = 0;
  std::string ss_out, ss_side;
  ss->add_option("--d", ss_d, "Intrinsic dimension")->check(CLI::PositiveNumber);
  ss->add_option("--D", ss_D, "Ambient dimension")->check(CLI::PositiveNumber);
  ss->add_option("--R", ss_R, "Radius");
  ss->add_option("--n", ss_n, "Number of samples");
  ss->add_option("--seed", ss_seed, "Random seed")->required();
  ss->add_option("--noise", ss_noise, "Gaussian noise standard deviation");
  ss->add_option("--output", ss_out, "Output cloud file")->required();
  ss->add_option("--embedding", ss_side, "Embedding sidecar path (default: <output>.embedding)");

  // project
  auto* pj = app.add_subcommand("project", "Project query points onto the reconstructed manifold");
  ModelOptions pj_model;
  std::string pj_queries, pj_out;
  pj_model.add_to(pj, true);
  pj->add_option("--queries", pj_queries, "Query point file")->required();
  pj->add_option("--output", pj_out, "Output file (default: stdout)");

  // resample
  auto* rs = app.add_subcommand("resample", "Densify the reconstructed manifold");
  ModelOptions rs_model;
  int rs_K = 3;
  double rs_sigma = 0.0;
  std::uint64_t rs_seed = 0;
  bool rs_skip = false;
  std::string rs_out;
  rs_model.add_to(rs, true);
  rs->add_option("--K", rs_K, "Enlarging factor (K^d points per sample)")->check(CLI::PositiveNumber);
  rs->add_option("--sigma", rs_sigma, "Tangent grid half-width (default: estimated)");
  rs->add_option("--seed", rs_seed, "Seed for the sigma estimate");
  rs->add_flag("--skip-failures", rs_skip, "Drop grid nodes whose projection fails");
  rs->add_option("--output", rs_out, "Output cloud file")->required();

  // geodesic
  auto* gd = app.add_subcommand("geodesic", "Geodesic distances between sample pairs");
  ModelOptions gd_model;
  int gd_K = 3;
  double gd_sigma = 0.0, gd_param = 0.0;
  std::uint64_t gd_seed = 0;
  bool gd_skip = false;
  std::string gd_pairs, gd_rule = "radius", gd_emb, gd_out;
  gd_model.add_to(gd, true);
  gd->add_option("--pairs", gd_pairs, "CSV of sample index pairs")->required();
  gd->add_option("--K", gd_K, "Enlarging factor")->check(CLI::PositiveNumber);
  gd->add_option("--sigma", gd_sigma, "Tangent grid half-width (default: estimated)");
  gd->add_option("--seed", gd_seed, "Seed for the sigma estimate");
  gd->add_option("--rule", gd_rule, "Graph connection rule")->check(CLI::IsMember({"radius", "knn"}));
  gd->add_option("--param", gd_param, "Radius or neighbor count (radius default: 2.2 x median spacing, grown until connected)");
  gd->add_option("--embedding", gd_emb, "Sphere sidecar for oracle distances");
  gd->add_flag("--skip-failures", gd_skip, "Drop grid nodes whose projection fails");
  gd->add_option("--output", gd_out, "Output CSV (default: stdout)");

  // table1 / table2
  TableConfig t1 = table1_defaults();
  TableConfig t2 = table2_defaults();
  std::string t1_out, t2_out;
  bool t1_no_time = false, t2_no_time = false;
  const auto add_table = [](CLI::App* sub, TableConfig& cfg, std::string& out, bool& no_time, bool noise_list) {
    sub->add_option("--d", cfg.d, "Sphere dimension")->check(CLI::PositiveNumber);
    sub->add_option("--n", cfg.n, "Samples per realization");
    sub->add_option("--D", cfg.D, "Ambient dimension");
    sub->add_option("--R", cfg.radius, "Sphere radius");
    sub->add_option("--K", cfg.K, "Enlarging factor")->check(CLI::PositiveNumber);
    sub->add_option("--pairs", cfg.pairs, "Pairs per realization");
    sub->add_option("--realizations", cfg.realizations, "Number of realizations");
    sub->add_option("--seed", cfg.seed, "Master seed")->required();
    sub->add_option("--degrees", cfg.degrees, "Approximation orders for the densified columns");
    sub->add_option("--h-factor", cfg.h_factor, "h as a multiple of the median nearest-neighbor distance");
    sub->add_option("--sigma-factor", cfg.sigma_factor, "Multiplier on the estimated grid half-width");
    if (noise_list)
      sub->add_option("--noise", cfg.noise_levels, "Noise levels");
    else
      sub->add_option_function<double>(
          "--noise", [&cfg](double v) { cfg.noise_levels = {v}; }, "Noise level");
    sub->add_option("--output", out, "Output CSV (default: stdout)");
    sub->add_flag("--no-timings", no_time, "Omit wall-clock timings for byte-reproducible output");
  };
  auto* tb1 = app.add_subcommand("table1", "Geodesic RMSE on noiseless spheres");
  add_table(tb1, t1, t1_out, t1_no_time, false);
  auto* tb2 = app.add_subcommand("table2", "Geodesic RMSE on noisy spheres");
  add_table(tb2, t2, t2_out, t2_no_time, true);

  // convergence
  auto* cv = app.add_subcommand("convergence", "Convergence-order study");
  ConvergenceConfig cv_cfg;
  std::string cv_manifold = "circle", cv_out, cv_gnuplot;
  bool cv_no_geo = false, cv_no_time = false;
  cv->add_option("--manifold", cv_manifold, "Test manifold")->check(CLI::IsMember({"circle", "sphere", "plane"}));
  cv->add_option("--ks", cv_cfg.ks, "Approximation orders");
  cv->add_option("--ns", cv_cfg.ns, "Sample counts per level");
  cv->add_option("--seed", cv_cfg.seed, "Master seed")->required();
  cv->add_option("--K", cv_cfg.K, "Enlarging factor for geodesic graphs");
  cv->add_option("--test-points", cv_cfg.test_points, "Query points per level");
  cv->add_flag("--no-geodesic", cv_no_geo, "Skip geodesic errors");
  cv->add_option("--output", cv_out, "Output CSV (default: stdout)");
  cv->add_option("--gnuplot", cv_gnuplot, "Also write log(h) log(error) columns for gnuplot");
  cv->add_flag("--no-timings", cv_no_time, "Omit wall-clock timings");

  // stats
  auto* st = app.add_subcommand("stats", "Sampling statistics of a cloud");
  std::string st_input, st_reference;
  int st_d = 0;
  std::vector<double> st_q;
  double st_delta = 1.0;
  st->add_option("--input", st_input, "Cloud file")->required();
  st->add_option("--reference", st_reference, "Dense reference cloud for the fill-distance estimate");
  st->add_option("--d", st_d, "Intrinsic dimension for the density check");
  st->add_option("--q", st_q, "Ball multipliers for the density check");
  st->add_option("--delta", st_delta, "Quasi-uniformity constant");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  if (*ss) return run_sample_sphere(ss_d, ss_D, ss_R, ss_n, ss_seed, ss_noise, ss_out, ss_side);

  if (*pj) {
    const ManifoldMLS mls = pj_model.build();
    const PointCloud queries = read_cloud(pj_queries);
    if (queries.dim() != mls.cloud().dim()) throw ValidationError("query dimension differs from the sample cloud");
    const PointCloud out = mls.project_batch(queries);
    Sink sink(pj_out);
    write_cloud(sink.stream(), out,
                {"project", "input " + pj_model.input, "queries " + pj_queries, "d " + std::to_string(pj_model.d),
                 "k " + std::to_string(pj_model.k), "h " + format_double(mls.config().fill_distance),
                 "mu " + format_double(mls.config().mu()), "weight " + pj_model.weight});
    sink.close();
    return 0;
  }

  if (*rs) {
    const ManifoldMLS mls = rs_model.build();
    ResampleConfig rcfg;
    rcfg.enlarging_factor = rs_K;
    rcfg.sigma = rs_sigma;
    rcfg.seed = rs_seed;
    rcfg.skip_failures = rs_skip;
    const auto res = resample(mls, rcfg);
    write_cloud(rs_out, res.points,
                {"resample", "input " + rs_model.input, "d " + std::to_string(rs_model.d),
                 "k " + std::to_string(rs_model.k), "h " + format_double(mls.config().fill_distance),
                 "K " + std::to_string(rs_K), "sigma " + format_double(res.sigma), "seed " + std::to_string(rs_seed),
                 "dropped " + std::to_string(res.dropped())});
    return 0;
  }

  if (*gd) {
    const ManifoldMLS mls = gd_model.build();
    const auto pairs = read_pairs(gd_pairs);
    ResampleConfig rcfg;
    rcfg.enlarging_factor = gd_K;
    rcfg.sigma = gd_sigma;
    rcfg.seed = gd_seed;
    rcfg.skip_failures = gd_skip;
    const ConnectionRule rule = gd_rule == "knn" ? ConnectionRule::knn(gd_param) : ConnectionRule::radius(gd_param);
    if (rule.kind == ConnectionRule::Kind::knn && !(gd_param >= 1.0))
      throw ValidationError("knn rule needs --param >= 1");
    const auto lengths = geodesic_lengths(mls, mls.cloud(), pairs, rcfg, rule);
    std::optional<SphereEmbedding> emb;
    if (!gd_emb.empty()) emb = read_embedding(gd_emb);

    Sink sink(gd_out);
    auto& out = sink.stream();
    out << "# geodesic\n# input," << gd_model.input << "\n# pairs," << gd_pairs << "\n# d," << gd_model.d
        << "\n# k," << gd_model.k << "\n# h," << format_double(mls.config().fill_distance) << "\n# K," << gd_K
        << "\n# rule," << gd_rule << "\n# param," << format_double(gd_param) << "\n# seed," << gd_seed << '\n';
    out << "pair_id,estimate,oracle,relative_error\n" << std::setprecision(17);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      out << i << ',' << lengths[i] << ',';
      if (emb) {
        const double truth = sphere_geodesic_oracle(*emb, onto_sphere(*emb, mls.cloud().point(pairs[i].first)),
                                                    onto_sphere(*emb, mls.cloud().point(pairs[i].second)));
        out << truth << ',' << (truth > 0.0 ? std::abs(lengths[i] - truth) / truth : 0.0);
      } else {
        out << ',';
      }
      out << '\n';
    }
    sink.close();
    return 0;
  }

  if (*tb1 || *tb2) {
    const bool first = tb1->parsed();
    const auto report = first ? run_table1(t1) : run_table2(t2);
    Sink sink(first ? t1_out : t2_out);
    report.write_csv(sink.stream(), !(first ? t1_no_time : t2_no_time));
    sink.close();
    return 0;
  }

  if (*cv) {
    cv_cfg.manifold = cv_manifold == "circle"   ? ManifoldKind::circle
                      : cv_manifold == "sphere" ? ManifoldKind::sphere
                                                : ManifoldKind::plane;
    cv_cfg.geodesic = !cv_no_geo;
    const auto report = run_convergence(cv_cfg);
    Sink sink(cv_out);
    report.write_csv(sink.stream(), !cv_no_time);
    sink.close();
    if (!cv_gnuplot.empty()) {
      Sink plot(cv_gnuplot);
      report.write_gnuplot(plot.stream());
      plot.close();
    }
    return 0;
  }

  if (*st) {
    const PointCloud cloud = read_cloud(st_input);
    // Without a reference the fill distance would be measured against the cloud itself.
    const bool has_reference = !st_reference.empty();
    const PointCloud reference = has_reference ? read_cloud(st_reference) : cloud;
    const SamplingStats s = sampling_stats(cloud, reference);
    std::cout << std::setprecision(17) << "# stats\n# input," << st_input << "\nquantity,value\n"
              << "points," << cloud.size() << "\ndim," << cloud.dim() << "\nseparation_radius,"
              << s.separation_radius << "\nmedian_nn_distance," << median_nn_distance(cloud) << '\n';
    if (has_reference)
      std::cout << "fill_distance," << s.fill_distance_estimate << "\nmesh_ratio," << s.quasi_uniform_constant
                << '\n';
    if (!st_q.empty()) {
      if (st_d < 1) throw ValidationError("density check needs --d");
      if (!has_reference) throw ValidationError("density check needs --reference");
      for (double q : st_q) {
        bool ok = true;
        for (Index i = 0; i < cloud.size() && ok; ++i)
          ok = density_bound_check(cloud, cloud.point(i), q, s.fill_distance_estimate, st_delta, st_d);
        std::cout << "density_bound_q" << format_double(q) << ',' << (ok ? "pass" : "fail") << '\n';
      }
    }
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const mmls::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case mmls::ErrorKind::validation: return kExitValidation;
      case mmls::ErrorKind::numerical: return kExitNumerical;
      case mmls::ErrorKind::io: return kExitIo;
    }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
