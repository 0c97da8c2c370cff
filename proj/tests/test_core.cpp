#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "locfield/core.hpp"
#include "locfield/dataset_io.hpp"
#include "oracles.hpp"

using namespace locfield;

TEST_SUITE("core") {

TEST_CASE("ordering puts a coincident location first") {
  std::vector<Location> locs = {make_location({0.3}), make_location({0.9}), make_location({0.1}),
                                make_location({0.55})};
  const auto ord = order_neighbors(locs, make_location({0.1}));
  CHECK(ord.perm[0] == 2);
  CHECK(ord.dists[0] == 0.0);
}

TEST_CASE("distance ties resolve to the smaller index") {
  std::vector<Location> locs = {make_location({0.1}), make_location({0.2}), make_location({0.5})};
  const auto ord = order_neighbors(locs, make_location({0.15}));
  CHECK(ord.perm == std::vector<std::size_t>{0, 1, 2});
  CHECK(ord.dists[0] == doctest::Approx(0.05));
  CHECK(ord.dists[1] == doctest::Approx(0.05));
}

TEST_CASE("ordering matches a brute-force sort") {
  std::mt19937_64 gen(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto locs = oracle::random_points(10, 2, gen);
    const auto t = oracle::random_points(1, 2, gen)[0];
    std::vector<std::pair<double, std::size_t>> ref;
    for (std::size_t i = 0; i < locs.size(); ++i) ref.emplace_back((locs[i] - t).norm(), i);
    std::sort(ref.begin(), ref.end());
    const auto ord = order_neighbors(locs, t);
    for (std::size_t i = 0; i < locs.size(); ++i) {
      CHECK(ord.perm[i] == ref[i].second);
      CHECK(ord.dists[i] == doctest::Approx(ref[i].first).epsilon(1e-15));
    }
  }
}

TEST_CASE("ordering is invariant to row shuffles") {
  std::mt19937_64 gen(5);
  auto locs = oracle::random_points(30, 2, gen);
  const Location t = make_location({0.4, 0.6});
  const auto a = ordered_locations(locs, order_neighbors(locs, t), locs.size());
  std::shuffle(locs.begin(), locs.end(), gen);
  const auto b = ordered_locations(locs, order_neighbors(locs, t), locs.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK((a[i] - b[i]).norm() == 0.0);
}

TEST_CASE("empty dataset is rejected") {
  std::vector<Location> none;
  CHECK_THROWS_AS(order_neighbors(none, make_location({0.0})), Error);
}

TEST_CASE("telescoped weights") {
  SUBCASE("constant weights") {
    const auto w = telescope_weights(Eigen::Vector3d(1, 1, 1));
    CHECK(w.wtilde(0) == doctest::Approx(0.0));
    CHECK(w.wtilde(1) == doctest::Approx(0.0));
    CHECK(w.wtilde(2) == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("single weight") {
    Eigen::VectorXd one(1);
    one << 7.5;
    CHECK(telescope_weights(one).wtilde(0) == doctest::Approx(1.0));
  }
  SUBCASE("decreasing weights") {
    const auto w = telescope_weights(Eigen::Vector3d(3, 2, 1));
    for (int k = 0; k < 3; ++k) CHECK(w.wtilde(k) == doctest::Approx(1.0 / 6.0));
  }
  SUBCASE("degenerate") {
    CHECK_THROWS_AS(telescope_weights(Eigen::Vector2d(1, -1)), Error);
    CHECK_THROWS_AS(telescope_weights(Eigen::Vector2d(0, 0)), Error);
  }
}

TEST_CASE("sum of k times wtilde is one") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-0.5, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd w(25);
    for (int i = 0; i < 25; ++i) w(i) = u(gen);
    if (w.sum() <= 0.1) continue;
    const auto tw = telescope_weights(w);
    double s = 0.0;
    for (int k = 0; k < 25; ++k) s += (k + 1) * tw.wtilde(k);
    CHECK(std::fabs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("non-increasing weights telescope to non-negative values") {
  Eigen::VectorXd w(6);
  w << 2.0, 2.0, 1.5, 0.7, 0.7, 0.1;
  const auto tw = telescope_weights(w);
  CHECK(tw.wtilde.minCoeff() >= 0.0);
}

TEST_CASE("duplicate and mixed-dimension locations are rejected") {
  CHECK_THROWS_AS(validate_locations({make_location({0.1}), make_location({0.1})}), ConfigError);
  CHECK_THROWS_AS(validate_locations({make_location({0.1}), make_location({0.1, 0.2})}), ConfigError);
  CHECK_THROWS_AS(Dataset({make_location({0.1})}, Eigen::VectorXd(2)), ConfigError);
}

TEST_CASE("dataset CSV round trip") {
  const Dataset d({make_location({0.1, 0.2}), make_location({0.3, 0.7})}, Eigen::Vector2d(1.0 / 3.0, -2.5e-7));
  std::stringstream ss;
  write_dataset_csv(ss, d);
  CHECK(ss.str().rfind("x,y,z\n", 0) == 0);
  const Dataset back = read_dataset_csv(ss);
  CHECK(back.dim() == 2);
  CHECK(back.responses() == d.responses());
  CHECK(back.location(1) == d.location(1));
  std::stringstream bad("x,q\n1,2\n");
  CHECK_THROWS_AS(read_dataset_csv(bad), ConfigError);
}

}
