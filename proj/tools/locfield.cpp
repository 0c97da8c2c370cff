#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "locfield/bandwidth.hpp"
#include "locfield/bayesrisk.hpp"
#include "locfield/config.hpp"
#include "locfield/dataset_io.hpp"
#include "locfield/linalg.hpp"
#include "locfield/rng.hpp"
#include "locfield/simulate.hpp"
#include "locfield/svg.hpp"
#include "locfield/wll.hpp"

namespace fs = std::filesystem;
using namespace locfield;

namespace {

enum class LogLevel { error = 0, info = 1, debug = 2 };
LogLevel g_level = LogLevel::info;

void log(LogLevel level, const std::string& msg) {
  if (level > g_level) return;
  static const char* names[] = {"error", "info", "debug"};
  std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

void init_log() {
  const char* env = std::getenv("LOCFIELD_LOG");
  if (env == nullptr) return;
  const std::string v = env;
  if (v == "error") {
    g_level = LogLevel::error;
  } else if (v == "info") {
    g_level = LogLevel::info;
  } else if (v == "debug") {
    g_level = LogLevel::debug;
  } else {
    throw ConfigError("LOCFIELD_LOG must be error, info or debug");
  }
}

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

struct Run {
  ExperimentConfig cfg;
  fs::path out_dir;
  std::string command;
};

Run prepare(const std::string& command, const Options& opt) {
  if (opt.threads < 1) throw ConfigError("--threads must be at least 1");
  Run run;
  run.command = command;
  run.cfg = ExperimentConfig::load(opt.config);
  if (opt.seed) run.cfg.set("seed", std::to_string(*opt.seed));
  run.out_dir = !opt.out.empty() ? fs::path(opt.out) : fs::path(run.cfg.get_string("out_dir", "."));
  fs::create_directories(run.out_dir);
  log(LogLevel::debug, "config hash " + std::to_string(run.cfg.hash()));
  return run;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

// Every CSV gets a sidecar with the exact config, its hash, the seed and version.
void write_output(const Run& run, const std::string& name, const std::string& text) {
  const fs::path path = run.out_dir / name;
  write_text(path, text);
  std::ostringstream meta;
  meta << "command = " << run.command << "\n";
  meta << "version = " << LOCFIELD_VERSION << "\n";
  meta << "seed = " << config_seed(run.cfg) << "\n";
  meta << "config_hash = " << hex64(run.cfg.hash()) << "\n";
  meta << "[config]\n" << run.cfg.echo();
  write_text(path.string() + ".meta", meta.str());
  log(LogLevel::info, "wrote " + path.string());
}

std::string coord_header(int dim) { return dim == 2 ? "x,y" : "x"; }

std::string coords(const Location& t) {
  std::string s = format_double(t(0));
  if (t.size() == 2) s += "," + format_double(t(1));
  return s;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  return out + "\"";
}

// Dataset named in the config, or a fresh simulation from the model.
Dataset obtain_dataset(const ExperimentConfig& cfg) {
  if (cfg.has("dataset")) return read_dataset_csv(cfg.require("dataset"));
  const auto locs = config_locations(cfg);
  return Dataset(locs, config_sample(cfg, locs, config_seed(cfg)));
}

std::optional<NonstatModel> known_truth(const ExperimentConfig& cfg) {
  if (!cfg.has("model")) return std::nullopt;
  return config_truth(cfg);
}

double truth_theta(const NonstatModel& m, const LocalModelFamily& fam, const Location& t) {
  if (fam.kind == LocalModelFamily::Kind::variance_scale) {
    const double s = m.sigma()(t);
    return s * s;
  }
  return m.nu()(t);
}

DomainBox domain_for(const ExperimentConfig& cfg, const Dataset& data) {
  return cfg.has("domain") ? config_domain(cfg) : DomainBox::bounding(data.locations());
}

int cmd_simulate(const Run& run) {
  const auto locs = config_locations(run.cfg);
  log(LogLevel::info, "simulating " + std::to_string(locs.size()) + " locations");
  const Dataset data(locs, config_sample(run.cfg, locs, config_seed(run.cfg)));
  std::ostringstream out;
  write_dataset_csv(out, data);
  write_output(run, "dataset.csv", out.str());
  return 0;
}

int cmd_estimate(const Run& run) {
  const Dataset data = obtain_dataset(run.cfg);
  const auto fam = config_family(run.cfg);
  const auto scheme = config_weights(run.cfg);
  const auto policy = config_policy(run.cfg, data.locations());
  const auto k_max = static_cast<std::size_t>(run.cfg.get_integer("k_max", 500));
  const int per_axis =
      static_cast<int>(run.cfg.get_integer("grid_per_axis", data.dim() == 1 ? 64 : 8));
  const EstimationGrid grid = make_estimation_grid(domain_for(run.cfg, data), per_axis);
  log(LogLevel::info, "fitting " + std::to_string(grid.nodes.size()) + " nodes with " + scheme.name());
  const auto nodes = fit_surface(grid.nodes, data, fam, scheme, policy, k_max);

  std::ostringstream out;
  out << coord_header(data.dim()) << ",theta_hat,objective,k_effective,lambda_used,errors\n";
  Eigen::VectorXd theta(static_cast<Eigen::Index>(nodes.size()));
  int failures = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    out << coords(n.location) << ",";
    if (n.fit) {
      out << format_double(n.fit->theta_hat) << "," << format_double(n.fit->objective) << ","
          << n.fit->neighborhood_size << "," << format_double(n.lambda_used) << ",\n";
      theta(static_cast<Eigen::Index>(i)) = n.fit->theta_hat;
    } else {
      ++failures;
      out << "nan,nan,0," << format_double(n.lambda_used) << "," << csv_field(n.error) << "\n";
      theta(static_cast<Eigen::Index>(i)) = std::nan("");
    }
  }
  if (failures > 0) log(LogLevel::info, std::to_string(failures) + " nodes failed");
  write_output(run, "surface.csv", out.str());

  const auto truth = known_truth(run.cfg);
  const std::string what = fam.free_parameter();
  std::string svg;
  if (data.dim() == 1) {
    std::vector<PlotSeries> series(1);
    series[0].label = "estimate";
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      series[0].x.push_back(nodes[i].location(0));
      series[0].y.push_back(theta(static_cast<Eigen::Index>(i)));
    }
    if (truth) {
      PlotSeries s{"truth", series[0].x, {}, "#444444", true};
      for (const auto& n : nodes) s.y.push_back(truth_theta(*truth, fam, n.location));
      series.push_back(s);
    }
    svg = svg_line_plot(series, what + " estimate", "t", what);
  } else {
    const Location last = grid.nodes.back();
    svg = svg_heat_grid(theta, grid.shape[0], grid.shape[1], grid.origin(0), last(0), grid.origin(1),
                        last(1), what + " estimate");
  }
  write_text(run.out_dir / "surface.svg", svg);
  return 0;
}

std::string profile_csv(const ProfileCurve& p) {
  const Eigen::VectorXd st = p.standardized();
  std::ostringstream out;
  out << "lambda,criterion_raw,criterion_standardized,is_argmax\n";
  for (std::size_t i = 0; i < p.lambdas.size(); ++i) {
    const auto j = static_cast<Eigen::Index>(i);
    out << format_double(p.lambdas[i]) << "," << format_double(p.criterion(j)) << ","
        << format_double(st(j)) << "," << (i == p.argmax ? 1 : 0) << "\n";
  }
  return out.str();
}

int cmd_bandwidth(const Run& run) {
  const Dataset data = obtain_dataset(run.cfg);
  const auto setup = config_bandwidth_setup(run.cfg, data.locations());
  const auto truth = known_truth(run.cfg);
  log(LogLevel::info, "profiling " + std::to_string(setup.lambdas.size()) + " bandwidths with " +
                          std::to_string(setup.replicates) + " calibration replicates");
  const auto res = select_bandwidths(data, setup, truth ? &*truth : nullptr);

  std::vector<const ProfileCurve*> curves = {&res.lambda1, &res.lambda2};
  if (res.oracle) curves.push_back(&*res.oracle);
  std::ostringstream sel;
  sel << "selector,lambda\n";
  const char* colors[] = {"#1f77b4", "#2ca02c", "#444444"};
  std::vector<PlotSeries> series;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = *curves[i];
    write_output(run, "profile_" + c.name + ".csv", profile_csv(c));
    sel << c.name << "," << format_double(c.lambda_hat()) << "\n";
    log(LogLevel::info, c.name + " selects " + format_double(c.lambda_hat()));
    PlotSeries s{c.name, c.lambdas, {}, colors[i], c.name == "oracle"};
    const Eigen::VectorXd st = c.standardized();
    s.y.assign(st.data(), st.data() + st.size());
    for (double& x : s.x) x = std::log10(x);
    series.push_back(std::move(s));
  }
  write_output(run, "selection.csv", sel.str());
  write_text(run.out_dir / "profiles.svg",
             svg_line_plot(series, "standardized criterion profiles", "log10 lambda", "criterion"));
  return 0;
}

int cmd_bayes_risk(const Run& run) {
  const PriorSpec prior = config_prior(run.cfg);
  const auto lambdas = config_risk_lambdas(run.cfg);
  const auto n = static_cast<std::size_t>(run.cfg.get_integer("risk_points", 100));
  const Eigen::VectorXd locs = even_points_half_open(n);
  const double t0 = run.cfg.get_real("risk_t0", 0.5);
  const std::string mode = run.cfg.get_string("risk_mode", "grid");

  if (mode == "curve") {
    RiskSetup setup{locs, t0, MaternParams{1.0, run.cfg.get_real("risk_nu", 0.8), run.cfg.get_real("risk_rho", 0.8)}};
    setup.field.validate();
    auto kernels = run.cfg.get_names("risk_kernels");
    if (kernels.empty()) kernels = {"K2", "K4", "K6", "K8", "hard"};
    std::ostringstream out;
    out << "kernel,lambda,risk,expected_bias_sq,variance_part\n";
    const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
    std::vector<PlotSeries> series;
    for (std::size_t k = 0; k < kernels.size(); ++k) {
      const auto spec = KernelSpec::parse(kernels[k]);
      log(LogLevel::info, "risk curve for " + spec.name());
      const auto curve = risk_curve(setup, prior, spec, lambdas);
      PlotSeries s{spec.name(), {}, {}, colors[k % 6], spec.kind == KernelSpec::Kind::hard_threshold};
      for (std::size_t i = 0; i < lambdas.size(); ++i) {
        out << spec.name() << "," << format_double(lambdas[i]) << "," << format_double(curve[i].risk)
            << "," << format_double(curve[i].expected_bias_sq) << ","
            << format_double(curve[i].variance_part) << "\n";
        s.x.push_back(lambdas[i]);
        s.y.push_back(std::log10(curve[i].risk));
      }
      series.push_back(std::move(s));
    }
    write_output(run, "risk_curves.csv", out.str());
    write_text(run.out_dir / "risk_curves.svg",
               svg_line_plot(series, "Bayes risk", "lambda", "log10 risk"));
    return 0;
  }

  const auto nu_grid = run.cfg.get_reals("risk_nu_grid");
  const auto rho_grid = run.cfg.get_reals("risk_rho_grid");
  if (nu_grid.empty() || rho_grid.empty()) throw ConfigError("grid mode needs risk_nu_grid and risk_rho_grid");
  const auto ka = KernelSpec::parse(run.cfg.get_string("kernel_a", "K6"));
  const auto kb = KernelSpec::parse(run.cfg.get_string("kernel_b", "hard"));
  log(LogLevel::info, "improvement grid " + std::to_string(nu_grid.size()) + " x " +
                          std::to_string(rho_grid.size()));
  const auto cells = improvement_grid(nu_grid, rho_grid, ka, kb, lambdas, prior, locs, t0);
  std::ostringstream out;
  out << "nu,rho,pct_risk_improvement,pct_bias_improvement,lambda_A,lambda_B\n";
  Eigen::VectorXd heat(static_cast<Eigen::Index>(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    out << format_double(c.nu) << "," << format_double(c.rho) << ","
        << format_double(c.pct_risk_improvement) << "," << format_double(c.pct_bias_improvement)
        << "," << format_double(c.lambda_a) << "," << format_double(c.lambda_b) << "\n";
  }
  // cells are nu-major; the picture has rho along x and nu along y
  const auto nr = static_cast<Eigen::Index>(rho_grid.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto iu = static_cast<Eigen::Index>(i) / nr;
    const auto ir = static_cast<Eigen::Index>(i) % nr;
    heat(ir + nr * iu) = cells[i].pct_risk_improvement;
  }
  write_output(run, "heatmap.csv", out.str());
  write_text(run.out_dir / "heatmap.svg",
             svg_heat_grid(heat, static_cast<int>(rho_grid.size()), static_cast<int>(nu_grid.size()),
                           rho_grid.front(), rho_grid.back(), nu_grid.front(), nu_grid.back(),
                           "% risk improvement (x: rho, y: nu)"));
  return 0;
}

struct CheckRow {
  std::string name;
  double value;
  double tolerance;
};

std::vector<CheckRow> run_selftest() {
  std::vector<CheckRow> rows;

  double worst_int = 0.0;
  double worst_conv = 0.0;
  for (double nu : {0.3, 0.8, 1.5, 2.5}) {
    for (double q : {0.1, 1.0, 3.0}) {
      const auto r = verify_appendix_identities(nu, nu, q);
      worst_int = std::max(worst_int, r.integral_rel_residual);
      worst_conv = std::max(worst_conv, r.convolution_residual);
    }
  }
  rows.push_back({"integral representation of M_nu (rel)", worst_int, 1e-6});
  rows.push_back({"Gaussian convolution identity", worst_conv, 1e-8});

  CounterRng rng(CounterRng::derive(20240601, 7));
  std::uint64_t ctr = 0;
  auto unif = [&](double a, double b) { return a + (b - a) * rng.uniform(ctr++); };

  double worst_pd = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<Location> locs;
    for (int i = 0; i < 25; ++i) locs.push_back(make_location({unif(0, 1), unif(0, 1)}));
    const double a = unif(0.3, 1.5);
    const double b = unif(0.5, 2.0);
    const auto m = NonstatModel::reparam_K(
        LocalParamFunction([a](const Location& t) { return 1.0 + 0.5 * std::sin(a * t(0)); }, "s"),
        LocalParamFunction([b](const Location& t) { return 0.5 + 0.4 * std::cos(b * t(1)); }, "n"),
        LocalParamFunction([](const Location& t) { return 0.3 + 0.2 * t(0); }, "r"));
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov_matrix(m, locs)).eigenvalues();
    worst_pd = std::max(worst_pd, -ev.minCoeff() / ev.maxCoeff());
  }
  rows.push_back({"nonstationary covariance min eig / max eig (neg part)", worst_pd, 1e-8});

  double worst_chol = 0.0;
  double worst_down = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 12;
    Eigen::MatrixXd x(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) x(i, j) = unif(-1, 1);
    }
    const Eigen::MatrixXd s = x * x.transpose() + n * Eigen::MatrixXd::Identity(n, n);
    CholSequence seq(n);
    for (int k = 0; k < n; ++k) seq.append(s.col(k).head(k), s(k, k));
    const Eigen::MatrixXd dense = Eigen::LLT<Eigen::MatrixXd>(s).matrixL();
    worst_chol = std::max(worst_chol, (seq.factor() - dense).cwiseAbs().maxCoeff());
    const Eigen::MatrixXd inv = s.inverse();
    const Eigen::MatrixXd sub = s.topLeftCorner(n - 1, n - 1).inverse();
    worst_down = std::max(worst_down, (inverse_downdate(inv, n - 1) - sub).cwiseAbs().maxCoeff());
  }
  rows.push_back({"Cholesky append vs dense factor", worst_chol, 1e-8});
  rows.push_back({"inverse downdate vs dense inverse", worst_down, 1e-8});

  double worst_mom = 0.0;
  for (int r = 1; r <= 4; ++r) {
    const auto spec = KernelSpec::gaussian(r);
    for (int p = 0; p < 2 * r; ++p) {
      auto f = [&](double t) { return std::pow(t, p) * (kernel_value(spec, t) + (p % 2 == 0 ? 1 : -1) * kernel_value(spec, -t)); };
      const double m = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 40.0, 15, 1e-14);
      worst_mom = std::max(worst_mom, std::fabs(m - (p == 0 ? 1.0 : 0.0)));
    }
  }
  rows.push_back({"higher-order kernel moments", worst_mom, 1e-8});

  double worst_feas = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<Location> locs;
    for (int i = 0; i < 40; ++i) locs.push_back(make_location({unif(0, 1), unif(0, 1)}));
    const Location t = make_location({unif(0.2, 0.8), unif(0.2, 0.8)});
    const auto ord = order_neighbors(locs, t);
    const auto w = constrained_weights(locs, ord, 0.3);
    Eigen::Vector2d first = Eigen::Vector2d::Zero();
    for (std::size_t k = 0; k < w.size(); ++k) {
      first += w.w(static_cast<Eigen::Index>(k)) * (t - locs[ord.perm[k]]);
    }
    worst_feas = std::max({worst_feas, std::fabs(w.w.sum() - 1.0), first.cwiseAbs().maxCoeff()});
  }
  rows.push_back({"constrained weights feasibility", worst_feas, 1e-10});

  {
    const Eigen::VectorXd t = even_points_half_open(9);
    std::vector<Location> locs;
    for (Eigen::Index i = 0; i < t.size(); ++i) locs.push_back(make_location({t(i)}));
    const auto ord = order_neighbors(locs, make_location({0.5}));
    Eigen::VectorXd tt(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) tt(i) = t(static_cast<Eigen::Index>(ord.perm[static_cast<std::size_t>(i)]));
    const auto pos = ordered_locations(locs, ord, locs.size());
    const Eigen::MatrixXd sigma = matern_matrix({1.0, 0.8, 0.5}, pos);
    BandwidthPolicy pol;
    pol.lambda = 0.3;
    const auto w = kernel_weights(KernelSpec::gaussian(2), ord, pol);
    const Eigen::MatrixXd fast = compute_B2(w, sigma, 0.5, tt, 2);
    const Eigen::MatrixXd ref = compute_B2_reference(w, sigma, 0.5, tt, 2);
    rows.push_back({"fast vs direct trace functionals", (fast - ref).cwiseAbs().maxCoeff(), 1e-8});
  }
  return rows;
}

int cmd_selftest(const Options& opt) {
  if (opt.threads < 1) throw ConfigError("--threads must be at least 1");
  if (!opt.config.empty()) ExperimentConfig::load(opt.config);
  const auto rows = run_selftest();
  bool ok = true;
  std::printf("%-55s %12s %10s  %s\n", "check", "value", "tolerance", "result");
  for (const auto& r : rows) {
    const bool pass = std::isfinite(r.value) && r.value <= r.tolerance;
    ok = ok && pass;
    std::printf("%-55s %12.3e %10.1e  %s\n", r.name.c_str(), r.value, r.tolerance, pass ? "PASS" : "FAIL");
  }
  return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted local likelihood for locally stationary Gaussian random fields"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(LOCFIELD_VERSION));

  Options opt;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", opt.config, "experiment config file");
    if (config_required) c->required();
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--seed", opt.seed, "override the config seed");
    sub->add_option("--threads", opt.threads, "worker cap");
  };
  std::vector<std::pair<CLI::App*, std::string>> subs;
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"simulate", "simulate a dataset"},
           {"estimate", "fit the local parameter surface"},
           {"bandwidth", "bandwidth selection profiles"},
           {"bayes-risk", "Bayes risk curves or improvement heat map"},
           {"selftest", "run the identity and oracle checks"}}) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, name != "selftest");
    subs.emplace_back(sub, name);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    init_log();
    for (const auto& [sub, name] : subs) {
      if (!sub->parsed()) continue;
      if (name == "selftest") return cmd_selftest(opt);
      const Run run = prepare(name, opt);
      if (name == "simulate") return cmd_simulate(run);
      if (name == "estimate") return cmd_estimate(run);
      if (name == "bandwidth") return cmd_bandwidth(run);
      return cmd_bayes_risk(run);
    }
  } catch (const ConfigError& e) {
    log(LogLevel::error, e.what());
    return 2;
  } catch (const NumericalError& e) {
    log(LogLevel::error, e.what());
    return 3;
  } catch (const fs::filesystem_error& e) {
    log(LogLevel::error, e.what());
    return 2;
  } catch (const std::exception& e) {
    log(LogLevel::error, e.what());
    return 3;
  }
  return 0;
}
