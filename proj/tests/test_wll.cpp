#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "locfield/linalg.hpp"
#include "locfield/simulate.hpp"
#include "locfield/wll.hpp"
#include "oracles.hpp"

using namespace locfield;

namespace {

Dataset random_dataset(int n, int d, const MaternParams& p, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto locs = oracle::random_points(n, d, gen);
  return Dataset(locs, sample_field(NonstatModel::stationary(p), locs, seed));
}

WeightVector weights_from(const Eigen::VectorXd& w) { return telescope_weights(w); }

// log-likelihood of the k nearest observations under Matern p, by the oracle
double nearest_loglik(const Dataset& data, const Location& t, const MaternParams& p, std::size_t k) {
  if (k == 0) return 0.0;
  const auto ord = order_neighbors(data, t);
  const auto locs = ordered_locations(data.locations(), ord, k);
  return oracle::gaussian_loglik(ordered_responses(data, ord, k), oracle::matern_matrix(p.sigma2, p.nu, p.rho, locs));
}

double total_variation(const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) s += std::fabs(v[i] - v[i - 1]);
  return s;
}

}  // namespace

TEST_SUITE("wll") {

TEST_CASE("objective with unit weights is the joint log-likelihood") {
  const Dataset data = random_dataset(30, 2, {1.0, 0.8, 0.3}, 1);
  const Location t = make_location({0.4, 0.5});
  const auto fam = LocalModelFamily::matern_smoothness(1.0, 0.3);
  const double w = wll_objective(0.8, t, data, weights_from(Eigen::VectorXd::Ones(30)), fam);
  const double ref = oracle::gaussian_loglik(data.responses(), oracle::matern_matrix(1.0, 0.8, 0.3, data.locations()));
  CHECK(w == doctest::Approx(ref).epsilon(1e-8));
  Eigen::VectorXd theta(1);
  theta << 0.8;
  CHECK(wll_objective(theta, t, data, weights_from(Eigen::VectorXd::Ones(30)), fam) == doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("objective with a single weight is the nearest marginal") {
  const Dataset data = random_dataset(12, 1, {1.0, 0.5, 0.3}, 2);
  const Location t = make_location({0.37});
  Eigen::VectorXd w = Eigen::VectorXd::Zero(12);
  w(0) = 1.0;
  const auto fam = LocalModelFamily::variance_scale(0.5, 0.3);
  const auto ord = order_neighbors(data, t);
  const double z = data.responses()(static_cast<Eigen::Index>(ord.perm[0]));
  const double expect = -0.5 * std::log(2 * std::numbers::pi * 2.5) - z * z / (2 * 2.5);
  CHECK(wll_objective(2.5, t, data, weights_from(w), fam) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("objective matches weighted dense differences") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    const Dataset data = random_dataset(18, 2, {1.0, 1.2, 0.4}, 10 + rep);
    const Location t = oracle::random_points(1, 2, gen)[0];
    Eigen::VectorXd w(18);
    for (int k = 0; k < 18; ++k) w(k) = u(gen) - 0.2;
    w(0) = 1.0;
    const MaternParams p{1.0, 1.2, 0.4};
    double ref = 0.0;
    for (std::size_t k = 1; k <= 18; ++k) {
      ref += w(static_cast<Eigen::Index>(k) - 1) * (nearest_loglik(data, t, p, k) - nearest_loglik(data, t, p, k - 1));
    }
    const auto fam = LocalModelFamily::matern_smoothness(1.0, 0.4);
    CHECK(wll_objective(1.2, t, data, weights_from(w), fam) == doctest::Approx(ref).epsilon(1e-8));
    const auto ord = order_neighbors(data, t);
    CHECK(LocalLikelihood(data, ord, weights_from(w), fam).objective(1.2) == doctest::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("closed-form variance estimate") {
  SUBCASE("one observation") {
    const Dataset data({make_location({0.2})}, Eigen::VectorXd::Constant(1, 1.7));
    const auto fit = variance_estimate(make_location({0.2}), data, weights_from(Eigen::VectorXd::Ones(1)), {1.0, 0.5, 1.0});
    CHECK(fit.theta_hat == doctest::Approx(1.7 * 1.7));
  }
  SUBCASE("equal weights give the scale MLE") {
    const Dataset data = random_dataset(25, 1, {2.0, 0.8, 0.2}, 4);
    const auto r = oracle::matern_matrix(1.0, 0.8, 0.2, data.locations());
    const double qn = data.responses().dot(r.ldlt().solve(data.responses()));
    const auto fit = variance_estimate(make_location({0.5}), data, weights_from(Eigen::VectorXd::Ones(25)), {1.0, 0.8, 0.2});
    CHECK(fit.theta_hat == doctest::Approx(qn / 25).epsilon(1e-10));
    CHECK(stationary_mle(data, LocalModelFamily::variance_scale(0.8, 0.2)) == doctest::Approx(qn / 25).epsilon(1e-10));
  }
  SUBCASE("agrees with the numeric maximizer") {
    std::mt19937_64 gen(5);
    for (int rep = 0; rep < 10; ++rep) {
      const Dataset data = random_dataset(40, 1, {3.0, 0.5, 0.5}, 20 + rep);
      const Location t = oracle::random_points(1, 1, gen)[0];
      BandwidthPolicy pol;
      pol.lambda = 0.2 + 0.3 * std::uniform_real_distribution<double>()(gen);
      const auto w = kernel_weights(KernelSpec::gaussian(1 + rep % 4), order_neighbors(data, t), pol);
      const auto fam = LocalModelFamily::variance_scale(0.5, 0.5);
      const auto closed = variance_estimate(t, data, w, {1.0, 0.5, 0.5});
      const auto numeric = fit_point(t, data, w, fam);
      CHECK(numeric.theta_hat == doctest::Approx(closed.theta_hat).epsilon(1e-4));
      const auto ord = order_neighbors(data, t);
      CHECK(LocalLikelihood(data, ord, w, fam).variance_closed_form() == doctest::Approx(closed.theta_hat).epsilon(1e-10));
    }
  }
}

TEST_CASE("variance estimate is scale equivariant") {
  const Dataset data = random_dataset(30, 1, {1.0, 0.8, 0.2}, 6);
  const Location t = make_location({0.5});
  BandwidthPolicy pol;
  pol.lambda = 0.3;
  const auto w = kernel_weights(KernelSpec::gaussian(3), order_neighbors(data, t), pol);
  const double a = variance_estimate(t, data, w, {1.0, 0.8, 0.2}).theta_hat;
  const double b = variance_estimate(t, data.with_responses(2.5 * data.responses()), w, {1.0, 0.8, 0.2}).theta_hat;
  CHECK(b == doctest::Approx(6.25 * a).epsilon(1e-12));
}

TEST_CASE("trailing zero weights do not change the fit") {
  const Dataset data = random_dataset(40, 1, {1.0, 0.8, 0.2}, 7);
  const Location t = make_location({0.3});
  BandwidthPolicy pol;
  pol.lambda = 0.1;
  const auto full = kernel_weights(KernelSpec::hard_threshold(), order_neighbors(data, t), pol);
  const auto k = full.effective_size();
  REQUIRE(k < 40);
  const auto trunc = telescope_weights(full.w.head(static_cast<Eigen::Index>(k)));
  const auto fam = LocalModelFamily::matern_smoothness(1.0, 0.2);
  CHECK(std::fabs(fit_point(t, data, full, fam).theta_hat - fit_point(t, data, trunc, fam).theta_hat) < 1e-6);
}

TEST_CASE("smoothness recovery and local optimality") {
  const auto locs = gen_locations(LocationSpec::even_1d(300, 0.0, 1.0), 0);
  const Dataset data(locs, sample_field(NonstatModel::smoothness_only(1.0, 0.5, 1.0), locs, 8));
  const Location t = make_location({0.5});
  BandwidthPolicy pol;
  pol.lambda = 1.0;
  const auto w = kernel_weights(KernelSpec::gaussian(1), order_neighbors(data, t), pol);
  const auto fam = LocalModelFamily::matern_smoothness(1.0, 0.5);
  const auto fit = fit_point(t, data, w, fam);
  CHECK(std::fabs(fit.theta_hat - 1.0) < 0.25);
  CHECK(fit.theta_hat >= fam.lo);
  CHECK(fit.theta_hat <= fam.hi);
  const LocalLikelihood ll(data, order_neighbors(data, t), w, fam);
  CHECK(ll.objective(fit.theta_hat + 1e-5) <= fit.objective);
  CHECK(ll.objective(fit.theta_hat - 1e-5) <= fit.objective);
}

TEST_CASE("stationary MLE") {
  SUBCASE("variance family closed form vs numeric") {
    const Dataset data = random_dataset(60, 2, {2.0, 0.7, 0.3}, 9);
    const auto fam = LocalModelFamily::variance_scale(0.7, 0.3);
    const double closed = stationary_mle(data, fam);
    const auto f = [&](double s2) {
      return oracle::gaussian_loglik(data.responses(), oracle::matern_matrix(s2, 0.7, 0.3, data.locations()));
    };
    // golden-section search on the oracle likelihood
    double a = 0.1, b = 20.0;
    const double g = (std::sqrt(5.0) - 1) / 2;
    for (int i = 0; i < 200; ++i) {
      const double c = b - g * (b - a);
      const double d = a + g * (b - a);
      if (f(c) > f(d)) {
        b = d;
      } else {
        a = c;
      }
    }
    CHECK(closed == doctest::Approx(0.5 * (a + b)).epsilon(1e-6));
  }
  SUBCASE("smoothness recovery") {
    const auto locs = gen_locations(LocationSpec::even_1d(400, 0.0, 1.0), 0);
    const Dataset data(locs, sample_field(NonstatModel::smoothness_only(1.0, 0.5, 0.8), locs, 10));
    const auto fam = LocalModelFamily::matern_smoothness(1.0, 0.5);
    const double nu_bar = stationary_mle(data, fam);
    CHECK(std::fabs(nu_bar - 0.8) < 0.2);
    const auto fit = fit_point(make_location({0.21}), data, telescope_weights(Eigen::VectorXd::Ones(400)), fam);
    CHECK(fit.theta_hat == doctest::Approx(nu_bar).epsilon(1e-4));
  }
}

TEST_CASE("surface fitting") {
  const auto locs = gen_locations(LocationSpec::even_1d(120, 0.0, 1.0), 0);
  const auto fam = LocalModelFamily::variance_scale(0.5, 0.3);
  const Dataset data(locs, sample_field(NonstatModel::stationary({1.0, 0.5, 0.3}), locs, 11));
  std::vector<Location> grid;
  for (int i = 0; i < 9; ++i) grid.push_back(make_location({0.1 + 0.1 * i}));
  BandwidthPolicy pol;
  pol.lambda = 0.1;
  const auto scheme = WeightScheme::from_kernel(KernelSpec::gaussian(2));

  SUBCASE("single node equals fit_point") {
    const auto s = fit_surface({grid[3]}, data, fam, scheme, pol, 500);
    const auto w = make_weights(scheme, locs, order_neighbors(data, grid[3]), pol, 500);
    REQUIRE(s[0].fit);
    CHECK(s[0].fit->theta_hat == fit_point(grid[3], data, w, fam).theta_hat);
  }
  SUBCASE("node order does not matter") {
    auto rev = grid;
    std::reverse(rev.begin(), rev.end());
    const auto a = fit_surface(grid, data, fam, scheme, pol, 500);
    const auto b = fit_surface(rev, data, fam, scheme, pol, 500);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(a[i].fit->theta_hat == b[grid.size() - 1 - i].fit->theta_hat);
  }
  SUBCASE("wider bandwidth, smoother surface") {
    double sd_narrow = 0.0, sd_wide = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      const Dataset d(locs, sample_field(NonstatModel::stationary({1.0, 0.5, 0.3}), locs, 100 + rep));
      auto spread = [&](double lambda) {
        BandwidthPolicy p;
        p.lambda = lambda;
        Eigen::VectorXd v(9);
        const auto s = fit_surface(grid, d, fam, scheme, p, 500);
        for (int i = 0; i < 9; ++i) v(i) = s[static_cast<std::size_t>(i)].fit->theta_hat;
        return std::sqrt((v.array() - v.mean()).square().mean());
      };
      sd_narrow += spread(0.03);
      sd_wide += spread(0.3);
    }
    CHECK(sd_wide < sd_narrow);
  }
  SUBCASE("failures are recorded per node") {
    BandwidthPolicy tiny;
    tiny.lambda = 1e-4;
    const auto s = fit_surface({make_location({0.1004})}, data,
                               fam, WeightScheme::from_kernel(KernelSpec::hard_threshold()), tiny, 500);
    CHECK_FALSE(s[0].fit);
    CHECK_FALSE(s[0].error.empty());
  }
}

TEST_CASE("kernel fits are smoother than hard-threshold fits") {
  const auto locs = gen_locations(LocationSpec::even_1d(200, 0.0, 0.1), 0);
  const LocalParamFunction sigma([](const Location& t) { return 2 * std::sin(t(0) / 0.015) + 2.8; }, "s");
  const Dataset data(locs, sample_variance_modulated(sigma, {1.0, 0.8, 0.2}, locs, 1));
  const auto fam = LocalModelFamily::variance_scale(0.8, 0.2);
  std::vector<Location> grid;
  std::vector<double> truth;
  for (int i = 0; i < 100; ++i) {
    grid.push_back(make_location({0.001 * i + 0.0005}));
    truth.push_back(std::pow(sigma(grid.back()), 2));
  }
  auto tv = [&](const WeightScheme& s, double lambda) {
    BandwidthPolicy p;
    p.lambda = lambda;
    std::vector<double> v;
    for (const auto& n : fit_surface(grid, data, fam, s, p, 500)) v.push_back(n.fit->theta_hat);
    return total_variation(v);
  };
  const double k6 = tv(WeightScheme::from_kernel(KernelSpec::gaussian(3)), 0.01);
  const double hard = tv(WeightScheme::from_kernel(KernelSpec::hard_threshold()), 0.01);
  CHECK(k6 <= 3 * total_variation(truth));
  CHECK(hard > k6);
}

TEST_CASE("family validation") {
  CHECK_THROWS_AS(LocalModelFamily::variance_scale(0.5, 0.3, 2.0, 1.0), ConfigError);
  CHECK_THROWS_AS(LocalModelFamily::matern_smoothness(1.0, 0.3, 0.0, 10.0), ConfigError);
  CHECK(LocalModelFamily::matern_smoothness(1.0, 0.3).free_parameter() == "nu");
}

}
