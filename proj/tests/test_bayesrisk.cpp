#include <doctest.h>

#include <cmath>
#include <random>

#include "locfield/bayesrisk.hpp"
#include "locfield/simulate.hpp"
#include "locfield/wll.hpp"
#include "oracles.hpp"

using namespace locfield;

namespace {

// Design around t0 in neighbor order, with kernel weights.
struct Design {
  std::vector<Location> locs;  // original order
  NeighborOrdering ord;
  Eigen::VectorXd t;           // neighbor order
  Eigen::MatrixXd sigma;       // neighbor order
  WeightVector w;
};

Design make_design(std::size_t n, double t0, const MaternParams& field, const KernelSpec& k, double lambda) {
  Design d;
  const Eigen::VectorXd pts = even_points_half_open(n);
  for (Eigen::Index i = 0; i < pts.size(); ++i) d.locs.push_back(make_location({pts(i)}));
  d.ord = order_neighbors(d.locs, make_location({t0}));
  const auto ordered = ordered_locations(d.locs, d.ord, n);
  d.t.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) d.t(static_cast<Eigen::Index>(i)) = ordered[i](0);
  d.sigma = oracle::matern_matrix(field.sigma2, field.nu, field.rho, ordered);
  BandwidthPolicy pol;
  pol.lambda = lambda;
  d.w = kernel_weights(k, d.ord, pol);
  return d;
}

double contract2(const Eigen::MatrixXd& b2, const Eigen::VectorXd& c) { return c.dot(b2 * c); }

double contract4(const std::vector<double>& b4, const Eigen::VectorXd& c) {
  const int m = static_cast<int>(c.size());
  double s = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int e = 0; e < m; ++e)
        for (int f = 0; f < m; ++f) s += c(a) * c(b) * c(e) * c(f) * b4[static_cast<std::size_t>(((a * m + b) * m + e) * m + f)];
  return s;
}

}  // namespace

TEST_SUITE("bayesrisk") {

TEST_CASE("B2 leading entries") {
  for (int r : {1, 3}) {
    const auto d = make_design(30, 0.5, {1.0, 0.8, 0.3}, KernelSpec::gaussian(r), 0.2);
    const Eigen::MatrixXd b2 = compute_B2(d.w, d.sigma, 0.5, d.t, 3);
    CHECK(b2(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    for (int p = 1; p <= 3; ++p) {
      double ref = 0.0;
      for (Eigen::Index k = 0; k < d.t.size(); ++k) ref += d.w.w(k) * std::pow(d.t(k) - 0.5, p);
      ref /= d.w.sum;
      CHECK(std::fabs(b2(0, p) - ref) < 1e-10);
      CHECK(std::fabs(b2(p, 0) - ref) < 1e-10);
    }
  }
}

TEST_CASE("fast trace functionals match the direct sums") {
  const auto d = make_design(10, 0.5, {1.0, 1.2, 0.4}, KernelSpec::gaussian(2), 0.3);
  const Eigen::MatrixXd fast2 = compute_B2(d.w, d.sigma, 0.5, d.t, 2);
  const Eigen::MatrixXd ref2 = compute_B2_reference(d.w, d.sigma, 0.5, d.t, 2);
  CHECK((fast2 - ref2).cwiseAbs().maxCoeff() < 1e-10);
  const auto fast4 = compute_B4(d.w, d.sigma, 0.5, d.t, 2, false);
  const auto ref4 = compute_B4_reference(d.w, d.sigma, 0.5, d.t, 2);
  // the contracted variance is what the risk consumes
  std::mt19937_64 gen(1);
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::VectorXd c = oracle::random_vector(3, gen);
    CHECK(contract4(fast4, c) == doctest::Approx(contract4(ref4, c)).epsilon(1e-10));
  }
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; b <= 2; ++b)
      for (int e = 0; e <= 2; ++e)
        for (int f = 0; f <= 2; ++f) {
          const auto i = static_cast<std::size_t>(((a * 3 + b) * 3 + e) * 3 + f);
          const auto j = static_cast<std::size_t>(((f * 3 + e) * 3 + b) * 3 + a);
          CHECK(std::fabs(fast4[i] - fast4[j]) < 1e-10);
        }
}

TEST_CASE("chi-square variance with equal weights") {
  const auto d = make_design(20, 0.5, {1.0, 0.8, 0.2}, KernelSpec::hard_threshold(), 10.0);
  const auto b4 = compute_B4(d.w, d.sigma, 0.5, d.t, 0);
  CHECK(b4[0] == doctest::Approx(2.0 / 20).epsilon(1e-10));
  PriorSpec prior = PriorSpec::gaussian(1.7, 0, 0.0);
  TraceDesign design(d.t, d.sigma, 0.5, 0);
  const auto r = bayes_risk(prior, design.tables(d.w));
  CHECK(r.expected_bias_sq == doctest::Approx(0.0));
  CHECK(r.risk == doctest::Approx(std::pow(1.7, 4) * 2.0 / 20).epsilon(1e-10));
}

TEST_CASE("conditional mean and variance by Monte Carlo") {
  const double t0 = 0.5;
  const auto d = make_design(25, t0, {1.0, 0.8, 0.2}, KernelSpec::gaussian(3), 0.25);
  const int N = 2;
  const Eigen::MatrixXd b2 = compute_B2(d.w, d.sigma, t0, d.t, N);
  const auto b4 = compute_B4(d.w, d.sigma, t0, d.t, N, false);
  const Eigen::Vector3d c(2.0, 1.3, -2.1);
  const LocalParamFunction sigma([&](const Location& t) {
    const double x = t(0) - t0;
    return c(0) + c(1) * x + c(2) * x * x;
  }, "poly");
  const FieldSampler w(oracle::matern_matrix(1.0, 0.8, 0.2, d.locs));
  Eigen::VectorXd s(static_cast<Eigen::Index>(d.locs.size()));
  for (std::size_t i = 0; i < d.locs.size(); ++i) s(static_cast<Eigen::Index>(i)) = sigma(d.locs[i]);
  const int reps = 50000;
  double m1 = 0.0, m2 = 0.0;
  const Dataset base(d.locs, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.locs.size())));
  std::vector<double> est(reps);
  for (int r = 0; r < reps; ++r) {
    const Eigen::VectorXd z = s.cwiseProduct(w.draw(static_cast<std::uint64_t>(r)));
    est[static_cast<std::size_t>(r)] = variance_estimate(make_location({t0}), base.with_responses(z), d.w, {1.0, 0.8, 0.2}).theta_hat;
    m1 += est[static_cast<std::size_t>(r)];
  }
  m1 /= reps;
  double m4 = 0.0;
  for (double e : est) {
    m2 += (e - m1) * (e - m1);
    m4 += std::pow(e - m1, 4);
  }
  m2 /= reps - 1;
  m4 /= reps;
  CHECK(std::fabs(m1 - contract2(b2, c)) < 3 * std::sqrt(m2 / reps));
  const double var_ref = contract4(b4, c);
  CHECK(std::fabs(m2 - var_ref) < 3 * std::sqrt((m4 - m2 * m2) / reps));
}

TEST_CASE("risk in the reference setting") {
  const PriorSpec prior = PriorSpec::gaussian(2.0, 4, 4.0);
  const Eigen::VectorXd pts = even_points_half_open(100);
  for (double nu : {0.5, 1.25, 2.0}) {
    for (double rho : {0.4, 1.2}) {
      RiskSetup setup{pts, 0.5, {1.0, nu, rho}};
      for (const auto& r : risk_curve(setup, prior, KernelSpec::gaussian(3), {0.05, 0.1, 0.2})) {
        CHECK(std::isfinite(r.risk));
        CHECK(r.risk > 0.0);
        CHECK(r.risk >= r.expected_bias_sq);
        CHECK(r.variance_part >= 0.0);
      }
    }
  }
}

TEST_CASE("improvement grid") {
  const PriorSpec prior = PriorSpec::gaussian(2.0, 4, 4.0);
  const Eigen::VectorXd pts = even_points_half_open(100);
  std::vector<double> lambdas;
  for (int i = 0; i < 20; ++i) lambdas.push_back(0.01 * std::pow(50.0, i / 19.0));
  const auto same = improvement_grid({0.8}, {0.8}, KernelSpec::gaussian(3), KernelSpec::gaussian(3), lambdas, prior, pts, 0.5);
  CHECK(same[0].pct_risk_improvement == doctest::Approx(0.0));
  CHECK(same[0].pct_bias_improvement == doctest::Approx(0.0));
  const auto cells = improvement_grid({0.8}, {0.8}, KernelSpec::gaussian(3), KernelSpec::hard_threshold(), lambdas, prior, pts, 0.5);
  CHECK(cells[0].pct_risk_improvement > 0.0);
}

TEST_CASE("higher-order kernel bias vanishes under infill") {
  for (int r = 2; r <= 3; ++r) {
    const auto coarse = make_design(50, 0.5, {1.0, 0.8, 0.3}, KernelSpec::gaussian(r), 0.2);
    const auto fine = make_design(400, 0.5, {1.0, 0.8, 0.3}, KernelSpec::gaussian(r), 0.05);
    const Eigen::MatrixXd bc = compute_B2(coarse.w, coarse.sigma, 0.5, coarse.t, 2 * r - 1);
    const Eigen::MatrixXd bf = compute_B2(fine.w, fine.sigma, 0.5, fine.t, 2 * r - 1);
    for (int p = 1; p < 2 * r; ++p) {
      if (std::fabs(bc(0, p)) < 1e-14) continue;
      CHECK(std::fabs(bf(0, p)) < 0.1 * std::fabs(bc(0, p)));
    }
  }
}

TEST_CASE("prior moments") {
  const PriorSpec p = PriorSpec::gaussian(2.0, 2, 3.0);
  CHECK(p.moment4(0, 0, 0, 0) == doctest::Approx(16.0));
  CHECK(p.moment4(1, 1, 0, 0) == doctest::Approx(12.0));
  CHECK(p.moment4(1, 1, 1, 1) == doctest::Approx(27.0));
  CHECK(p.moment4(1, 1, 2, 2) == doctest::Approx(9.0));
  CHECK(p.moment4(1, 2, 0, 0) == 0.0);
  CHECK(is_pairing(0, 1, 1, 0));
  CHECK_FALSE(is_pairing(0, 1, 2, 0));
  PriorSpec bad = p;
  bad.tau2(1) = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

}
