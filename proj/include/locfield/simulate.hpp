#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "locfield/core.hpp"
#include "locfield/covariance.hpp"
#include "locfield/kernels.hpp"

namespace locfield {

struct LocationSpec {
  enum class Kind { explicit_list, even_1d, uniform_2d };

  Kind kind = Kind::even_1d;
  std::size_t n = 0;
  DomainBox box;  // interval for even_1d, rectangle for uniform_2d
  std::vector<Location> points;

  static LocationSpec even_1d(std::size_t n, double a, double b);
  static LocationSpec uniform_2d(std::size_t n, const DomainBox& box);
  static LocationSpec explicit_list(std::vector<Location> points);
};

/// even_1d includes both endpoints. uniform_2d is deterministic in `seed`.
std::vector<Location> gen_locations(const LocationSpec& spec, std::uint64_t seed);

/// Draws z = L eps with L the lower Cholesky factor of a fixed covariance.
class FieldSampler {
 public:
  explicit FieldSampler(const Eigen::MatrixXd& cov);

  /// eps_i is normal draw i of the field stream of `seed`.
  [[nodiscard]] Eigen::VectorXd draw(std::uint64_t seed) const;
  [[nodiscard]] const Eigen::MatrixXd& factor() const { return lower_; }

 private:
  Eigen::MatrixXd lower_;
};

/// One mean-zero Gaussian draw with covariance cov_matrix(m, locs) (+ nugget).
Eigen::VectorXd sample_field(const NonstatModel& m, const std::vector<Location>& locs,
                             std::uint64_t seed, double nugget = 0.0);

/// z_j = sigma(t_j) W(t_j), W stationary Matern with parameters `w`.
Eigen::VectorXd sample_variance_modulated(const LocalParamFunction& sigma,
                                          const MaternParams& w,
                                          const std::vector<Location>& locs, std::uint64_t seed);

}  // namespace locfield
