#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace locfield {

/// Coordinates are stored inline; the public API accepts d in {1, 2}.
inline constexpr int kMaxDim = 3;
using Location = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input or configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Singular systems, failed factorizations, non-convergence (CLI exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

Location make_location(std::initializer_list<double> coords);
double distance(const Location& a, const Location& b);

/// Observation locations paired with scalar responses of one field realization.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Location> locations, Eigen::VectorXd responses);

  [[nodiscard]] std::size_t size() const { return locations_.size(); }
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const std::vector<Location>& locations() const { return locations_; }
  [[nodiscard]] const Location& location(std::size_t i) const { return locations_[i]; }
  [[nodiscard]] const Eigen::VectorXd& responses() const { return responses_; }

  /// Same locations, new responses.
  [[nodiscard]] Dataset with_responses(Eigen::VectorXd responses) const;

 private:
  std::vector<Location> locations_;
  Eigen::VectorXd responses_;
  int dim_ = 0;
};

/// Throws ConfigError unless all locations share a dimension in {1, 2}, are finite and distinct.
void validate_locations(const std::vector<Location>& locations);

/// Observation indices sorted by distance to a target point.
struct NeighborOrdering {
  Location target;
  std::vector<std::size_t> perm;
  std::vector<double> dists;

  [[nodiscard]] std::size_t size() const { return perm.size(); }
};

/// Ties in distance are broken by ascending original index.
NeighborOrdering order_neighbors(const std::vector<Location>& locations, const Location& t);
NeighborOrdering order_neighbors(const Dataset& data, const Location& t);

/// Per-neighbor weights w_k and the telescoped weights
/// wtilde_k = (w_k - w_{k+1}) / sum(w), wtilde_n = w_n / sum(w).
struct WeightVector {
  Eigen::VectorXd w;
  Eigen::VectorXd wtilde;
  double sum = 0.0;

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(w.size()); }
  /// One past the last nonzero weight. Observations beyond it never enter a fit.
  [[nodiscard]] std::size_t effective_size() const;
  /// w / sum(w)
  [[nodiscard]] Eigen::VectorXd normalized() const { return w / sum; }
};

WeightVector telescope_weights(const Eigen::VectorXd& w);

/// Responses permuted into neighbor order, truncated to the first `count` entries.
Eigen::VectorXd ordered_responses(const Dataset& data, const NeighborOrdering& ordering,
                                  std::size_t count);
/// Locations permuted into neighbor order, truncated to the first `count` entries.
std::vector<Location> ordered_locations(const std::vector<Location>& locations,
                                        const NeighborOrdering& ordering, std::size_t count);

}  // namespace locfield
