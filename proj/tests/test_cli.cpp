#include <doctest.h>

#include <cmath>
#include <numbers>

#include "locfield/config.hpp"
#include "locfield/expression.hpp"
#include "locfield/svg.hpp"

using namespace locfield;

TEST_SUITE("config") {

TEST_CASE("expression evaluation") {
  const Location t = make_location({0.3, -1.2});
  auto eval = [&](const std::string& s) { return Expression::parse(s)(t); };
  CHECK(eval("1 + 2 * 3") == 7.0);
  CHECK(eval("2 ^ 3 ^ 2") == 512.0);
  CHECK(eval("-2 ^ 2") == -4.0);
  CHECK(eval("(1 - 4) / 2") == -1.5);
  CHECK(eval("2*sin(x/0.015)+2.8") == doctest::Approx(2.0 * std::sin(0.3 / 0.015) + 2.8));
  CHECK(eval("1.5 + 0.9*sin(3*x + 2*y - 2.5)") == doctest::Approx(1.5 + 0.9 * std::sin(0.9 - 2.4 - 2.5)));
  CHECK(eval("exp(log(5)) + sqrt(16) + abs(y)") == doctest::Approx(10.2));
  CHECK(eval("cos(pi)") == doctest::Approx(-1.0));
  CHECK(eval("1e-2 * 3") == doctest::Approx(0.03));
  CHECK(Expression::parse("3 * pi").is_constant());
  CHECK(Expression::parse("x").required_dim() == 1);
  CHECK(Expression::parse("x + y").required_dim() == 2);
  CHECK(Expression::parse("2").required_dim() == 0);
  for (const char* bad : {"", "1 +", "(1", "foo(2)", "2 3", "x $ 1", "sin 2"}) {
    CHECK_THROWS_AS(Expression::parse(bad), ConfigError);
  }
  CHECK_THROWS_AS(static_cast<void>(Expression::parse("y")(make_location({0.5}))), ConfigError);
  const auto f = to_param_function(Expression::parse("2 * 1.5"));
  CHECK(f.is_constant());
  CHECK(f(t) == 3.0);
  CHECK_FALSE(to_param_function(Expression::parse("x")).is_constant());
}

TEST_CASE("configuration parsing") {
  const auto cfg = ExperimentConfig::parse_text("# comment\nseed = 7\nlambda = 0.05  # trailing\nweights = K4\n");
  CHECK(cfg.get_u64("seed", 0) == 7);
  CHECK(cfg.get_real("lambda", 0.0) == 0.05);
  CHECK(cfg.get_string("weights", "") == "K4");
  CHECK(cfg.get_real("nugget", 0.25) == 0.25);
  CHECK_THROWS_AS(static_cast<void>(cfg.require("nugget")), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse_text("bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse_text("seed = 1\nseed = 2\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse_text("seed 1\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse_text("lambda = abc\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse_text("weights = K5\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse_text("model = other\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse_text("preset = fig9\n"), ConfigError);
  const auto lists = ExperimentConfig::parse_text("lambdas = 0.1, 0.2,0.4\nrisk_kernels = K2, hard\n");
  CHECK(lists.get_reals("lambdas") == std::vector<double>{0.1, 0.2, 0.4});
  CHECK(lists.get_names("risk_kernels") == std::vector<std::string>{"K2", "hard"});
}

TEST_CASE("presets and overrides") {
  for (const auto& name : preset_names()) {
    const auto cfg = ExperimentConfig::parse_text("preset = " + name + "\n");
    CHECK(cfg.get_string("preset", "") == name);
    CHECK(cfg.entries().size() > 3);
  }
  const auto base = ExperimentConfig::parse_text("preset = fig1\n");
  const auto over = ExperimentConfig::parse_text("preset = fig1\nn = 50\n");
  CHECK(base.get_integer("n", 0) == 200);
  CHECK(over.get_integer("n", 0) == 50);
  CHECK(config_locations(over).size() == 50);
  const auto truth = config_truth(base);
  CHECK(truth.variant() == NonstatModel::Variant::reparam_K);
  const auto six = ExperimentConfig::parse_text("preset = fig6\nn = 30\n");
  const auto locs = config_locations(six);
  REQUIRE(locs.size() == 30);
  CHECK(locs[0].size() == 2);
  const auto z = config_sample(six, locs, 3);
  CHECK(z.size() == 30);
  CHECK((z - config_sample(six, locs, 3)).norm() == 0.0);
  const auto setup = config_bandwidth_setup(six, locs);
  CHECK(setup.boundary_correction);
  CHECK(setup.k_max == 150);
  CHECK(setup.scheme.kind == WeightScheme::Kind::constrained);
}

TEST_CASE("echo and hash") {
  const auto a = ExperimentConfig::parse_text("seed = 3\nlambda = 0.1\n");
  const auto b = ExperimentConfig::parse_text("lambda = 0.1\n\n# x\nseed = 3\n");
  CHECK(a.echo() == b.echo());
  CHECK(a.hash() == b.hash());
  CHECK(a.echo() == "lambda = 0.1\nseed = 3\n");
  const auto c = ExperimentConfig::parse_text("seed = 4\nlambda = 0.1\n");
  CHECK(a.hash() != c.hash());
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("prior and risk bandwidths from configuration") {
  const auto cfg = ExperimentConfig::parse_text("preset = fig2\n");
  const auto prior = config_prior(cfg);
  CHECK(prior.c0 == 2.0);
  CHECK(prior.N == 4);
  CHECK(prior.tau2(3) == 4.0);
  const auto lambdas = config_risk_lambdas(cfg);
  REQUIRE(lambdas.size() == 40);
  CHECK(lambdas.front() == doctest::Approx(0.01));
  CHECK(lambdas.back() == doctest::Approx(0.5));
}

TEST_CASE("svg output") {
  PlotSeries s{"risk", {0.1, 0.2, 0.3, 0.4}, {1.0, std::nan(""), 2.0, 3.0}};
  const std::string plot = svg_line_plot({s}, "title & more", "lambda", "risk");
  CHECK(plot.rfind("<svg", 0) == 0);
  CHECK(plot.find("</svg>") != std::string::npos);
  CHECK(plot.find("title &amp; more") != std::string::npos);
  CHECK(plot.find("polyline") != std::string::npos);
  Eigen::VectorXd v(4);
  v << 0.0, 1.0, std::nan(""), 2.0;
  const std::string heat = svg_heat_grid(v, 2, 2, 0.0, 1.0, 0.0, 1.0, "h");
  CHECK(heat.find("<rect") != std::string::npos);
  CHECK(heat.find("</svg>") != std::string::npos);
}

}
