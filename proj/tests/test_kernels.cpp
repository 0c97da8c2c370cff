#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "locfield/kernels.hpp"
#include "oracles.hpp"

using namespace locfield;

namespace {

double phi(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); }

NeighborOrdering ordering_1d(const std::vector<double>& xs, double t, std::vector<Location>& locs) {
  locs.clear();
  for (double x : xs) locs.push_back(make_location({x}));
  return order_neighbors(locs, make_location({t}));
}

double constrained_objective(const Eigen::VectorXd& w, const Eigen::VectorXd& dist2, double lambda) {
  return (w.array().square() * (dist2.array() / (2 * lambda * lambda)).exp()).sum();
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("Hermite polynomials") {
  CHECK(hermite(0, 3.7) == 1.0);
  CHECK(hermite(2, 2.0) == doctest::Approx(3.0));
  CHECK(hermite(5, 1.0) == doctest::Approx(6.0));
  for (double t : {-1.3, 0.2, 2.5}) {
    CHECK(hermite(5, t) == doctest::Approx(std::pow(t, 5) - 10 * std::pow(t, 3) + 15 * t));
  }
}

TEST_CASE("kernel values") {
  for (double t : {0.0, 0.4, 1.7}) CHECK(kernel_value(KernelSpec::gaussian(1), t) == doctest::Approx(phi(t)));
  CHECK(kernel_value(KernelSpec::gaussian(3), 0.0) == doctest::Approx(0.74801).epsilon(1e-5));
  for (double t : {0.0, 0.8, 2.2}) {
    const double expect = (15 - 10 * t * t + std::pow(t, 4)) / 8 * phi(t);
    CHECK(kernel_value(KernelSpec::gaussian(3), t) == doctest::Approx(expect).epsilon(1e-13));
  }
  CHECK_THROWS(kernel_value(KernelSpec::hard_threshold(), 0.0));
}

TEST_CASE("kernel moments by quadrature") {
  for (int r = 1; r <= 4; ++r) {
    const auto spec = KernelSpec::gaussian(r);
    for (int p = 0; p < 2 * r; ++p) {
      const double m = oracle::integrate([&](double t) { return std::pow(t, p) * kernel_value(spec, t); }, -40.0, 40.0);
      CHECK(std::fabs(m - (p == 0 ? 1.0 : 0.0)) < 1e-8);
    }
  }
}

TEST_CASE("kernel names parse") {
  CHECK(KernelSpec::parse("K6") == KernelSpec::gaussian(3));
  CHECK(KernelSpec::parse("hard").kind == KernelSpec::Kind::hard_threshold);
  CHECK(KernelSpec::gaussian(4).name() == "K8");
  CHECK_THROWS_AS(KernelSpec::parse("K5"), ConfigError);
  CHECK(WeightScheme::parse("constrained").kind == WeightScheme::Kind::constrained);
}

TEST_CASE("kernel weights") {
  std::vector<Location> locs;
  BandwidthPolicy pol;
  pol.lambda = 2.0;
  SUBCASE("center value") {
    const auto ord = ordering_1d({0.0, 1.0, 3.0}, 0.0, locs);
    const auto w = kernel_weights(KernelSpec::gaussian(3), ord, pol);
    CHECK(w.w(0) == doctest::Approx(kernel_value(KernelSpec::gaussian(3), 0.0)));
  }
  SUBCASE("closed ball") {
    const auto ord = ordering_1d({1.0, 2.0, 3.0}, 0.0, locs);
    const auto w = kernel_weights(KernelSpec::hard_threshold(), ord, pol);
    CHECK(w.w(0) == 1.0);
    CHECK(w.w(1) == 1.0);
    CHECK(w.w(2) == 0.0);
    const auto tw = telescope_weights(w.w.head(2));
    CHECK(tw.wtilde(0) == 0.0);
  }
  SUBCASE("scale equivariance") {
    const auto ord = ordering_1d({0.3, 1.1, 2.4, 4.0}, 0.0, locs);
    const auto ord_half = ordering_1d({0.15, 0.55, 1.2, 2.0}, 0.0, locs);
    BandwidthPolicy one;
    one.lambda = 1.0;
    const auto a = kernel_weights(KernelSpec::gaussian(1), ord, pol);
    const auto b = kernel_weights(KernelSpec::gaussian(1), ord_half, one);
    for (int k = 0; k < 4; ++k) CHECK(a.w(k) == doctest::Approx(b.w(k)).epsilon(1e-14));
  }
  SUBCASE("isolated target") {
    const auto ord = ordering_1d({5.0, 6.0}, 0.0, locs);
    CHECK_THROWS_AS(kernel_weights(KernelSpec::hard_threshold(), ord, pol), NumericalError);
  }
}

TEST_CASE("constrained weights, symmetric pair") {
  std::vector<Location> locs;
  const auto ord = ordering_1d({-0.5, 0.5}, 0.0, locs);
  const auto w = constrained_weights(locs, ord, 1.0);
  CHECK(w.w(0) == doctest::Approx(0.5));
  CHECK(w.w(1) == doctest::Approx(0.5));
}

TEST_CASE("constrained weights match the QP oracle") {
  SUBCASE("offsets -1, +1, +2") {
    std::vector<Location> locs;
    const auto ord = ordering_1d({-1.0, 1.0, 2.0}, 0.0, locs);
    const auto w = constrained_weights(locs, ord, 1.0);
    Eigen::VectorXd d2(3);
    Eigen::MatrixXd a(2, 3);
    for (int k = 0; k < 3; ++k) {
      const double off = -locs[ord.perm[static_cast<std::size_t>(k)]](0);
      d2(k) = off * off;
      a(0, k) = 1.0;
      a(1, k) = off;
    }
    const Eigen::VectorXd ref = oracle::equality_qp((d2.array() / 2.0).exp(), a, Eigen::Vector2d(1, 0));
    CHECK((w.w - ref).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("random 2D geometries") {
    std::mt19937_64 gen(19);
    for (int rep = 0; rep < 20; ++rep) {
      const auto locs = oracle::random_points(30, 2, gen);
      const Location t = oracle::random_points(1, 2, gen)[0];
      const double lambda = 0.1 + 0.3 * std::uniform_real_distribution<double>()(gen);
      const auto ord = order_neighbors(locs, t);
      const auto w = constrained_weights(locs, ord, lambda);
      Eigen::VectorXd d2(30);
      Eigen::MatrixXd a(3, 30);
      for (int k = 0; k < 30; ++k) {
        const Location off = t - locs[ord.perm[static_cast<std::size_t>(k)]];
        d2(k) = off.squaredNorm();
        a(0, k) = 1.0;
        a(1, k) = off(0);
        a(2, k) = off(1);
      }
      const Eigen::VectorXd ref =
          oracle::equality_qp((d2.array() / (2 * lambda * lambda)).exp(), a, Eigen::Vector3d(1, 0, 0));
      CHECK((w.w - ref).cwiseAbs().maxCoeff() < 1e-8);
      CHECK((a * w.w - Eigen::Vector3d(1, 0, 0)).cwiseAbs().maxCoeff() < 1e-10);

      // feasible perturbations never improve the objective
      const Eigen::MatrixXd null = a.fullPivLu().kernel();
      const double f0 = constrained_objective(w.w, d2, lambda);
      for (int j = 0; j < 5; ++j) {
        Eigen::VectorXd dir = null * oracle::random_vector(static_cast<int>(null.cols()), gen);
        dir *= 1e-3 / dir.norm();
        CHECK(constrained_objective(w.w + dir, d2, lambda) >= f0);
        CHECK(constrained_objective(w.w - dir, d2, lambda) >= f0);
      }
    }
  }
}

TEST_CASE("constrained weights reject degenerate geometry") {
  std::vector<Location> locs;
  const auto ord = ordering_1d({0.5}, 0.0, locs);
  CHECK_THROWS_AS(constrained_weights(locs, ord, 1.0), NumericalError);
}

TEST_CASE("boundary bandwidth") {
  BandwidthPolicy pol;
  pol.lambda = 0.1;
  pol.boundary_correction = true;
  pol.domain_box = DomainBox{make_location({0, 0}), make_location({1, 1})};
  CHECK(boundary_bandwidth(make_location({0, 0}), pol) == doctest::Approx(0.2));
  CHECK(boundary_bandwidth(make_location({0.5, 0}), pol) == doctest::Approx(std::sqrt(2.0) * 0.1));
  CHECK(boundary_bandwidth(make_location({0.5, 0.5}), pol) == doctest::Approx(0.1));
  CHECK(boundary_bandwidth(make_location({0.85, 0.5}), pol) == doctest::Approx(0.1));
  CHECK_THROWS_AS(boundary_bandwidth(make_location({1.5, 0.5}), pol), ConfigError);
  // continuous across the interior threshold and along a path to the corner
  double prev = boundary_bandwidth(make_location({0.0, 0.0}), pol);
  for (int i = 1; i <= 300; ++i) {
    const double s = 0.3 * i / 300.0;
    const double cur = boundary_bandwidth(make_location({s, s}), pol);
    CHECK(std::fabs(cur - prev) < 2e-3);
    prev = cur;
  }
  pol.boundary_correction = false;
  CHECK(effective_bandwidth(make_location({0, 0}), pol) == 0.1);
}

TEST_CASE("tiny weights are clamped") {
  Eigen::VectorXd w(4);
  w << 1.0, 1e-3, 1e-15, -5e-16;
  clamp_small_weights(w);
  CHECK(w(1) == 1e-3);
  CHECK(w(2) == 0.0);
  CHECK(w(3) == 0.0);
}

}
