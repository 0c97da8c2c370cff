#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "locfield/core.hpp"
#include "locfield/covariance.hpp"
#include "locfield/kernels.hpp"

namespace locfield {

/// One-parameter local model: theta * R(nu, rho) (variance scale) or
/// sigma2 * R(theta, rho) (Matern smoothness).
struct LocalModelFamily {
  enum class Kind { variance_scale, matern_smoothness };

  Kind kind = Kind::variance_scale;
  MaternParams base;  // the fixed parameters; the free one is ignored
  double lo = 1e-6;
  double hi = 1e6;

  static LocalModelFamily variance_scale(double nu, double rho, double lo = 1e-6, double hi = 1e6);
  static LocalModelFamily matern_smoothness(double sigma2, double rho, double lo = 0.05,
                                            double hi = 10.0);

  [[nodiscard]] MaternParams params(double theta) const;
  [[nodiscard]] std::string free_parameter() const;  // "sigma2" or "nu"
  void validate() const;
};

struct FitResult {
  double theta_hat = 0.0;
  double objective = 0.0;
  std::size_t neighborhood_size = 0;
  WeightVector weights_used;
  double lambda_used = 0.0;
};

/// The weighted local likelihood at one target, restricted to the neighbors with
/// nonzero weight. For the variance family the unit-variance factor is computed
/// once and the objective is exact in closed form for every theta.
class LocalLikelihood {
 public:
  LocalLikelihood(const Dataset& data, const NeighborOrdering& ordering, const WeightVector& w,
                  const LocalModelFamily& fam);

  /// sum_k w_k Delta_k(theta); -inf when the covariance is numerically singular.
  [[nodiscard]] double objective(double theta) const;
  [[nodiscard]] std::size_t size() const { return locs_.size(); }
  /// Closed-form maximizer for the variance family (clamped to the bounds).
  [[nodiscard]] double variance_closed_form() const;

 private:
  LocalModelFamily fam_;
  std::vector<Location> locs_;
  Eigen::VectorXd z_;
  Eigen::VectorXd w_;
  double wsum_ = 0.0;
  bool base_ok_ = false;
  double base_const_ = 0.0;  // sum_k w_k (-1/2 log 2 pi - log d_k) at unit variance
  double weighted_ss_ = 0.0;  // sum_k w_k u_k^2 at unit variance
};

/// sum_k w_k Delta_k(theta0) with Delta_k from successive Cholesky appends in
/// order of distance to t. `w` must be aligned with order_neighbors(data, t).
double wll_objective(double theta0, const Location& t, const Dataset& data, const WeightVector& w,
                     const LocalModelFamily& fam);
double wll_objective(const Eigen::VectorXd& theta0, const Location& t, const Dataset& data,
                     const WeightVector& w, const LocalModelFamily& fam);

/// sigma2_hat = sum_k w_k (q_k - q_{k-1}) / sum_k w_k with q_k = z_k' R_k^{-1} z_k
/// from inverse downdating of the unit-variance base correlation.
FitResult variance_estimate(const Location& t, const Dataset& data, const WeightVector& w,
                            const MaternParams& base);

/// Numeric maximizer of the weighted local likelihood over [fam.lo, fam.hi].
FitResult fit_point(const Location& t, const Dataset& data, const WeightVector& w,
                    const LocalModelFamily& fam);

struct SurfaceNode {
  Location location;
  std::optional<FitResult> fit;
  double lambda_used = 0.0;
  std::string error;
};

/// fit_point at every grid node with per-node weights; node failures are recorded.
std::vector<SurfaceNode> fit_surface(const std::vector<Location>& grid, const Dataset& data,
                                     const LocalModelFamily& fam, const WeightScheme& scheme,
                                     const BandwidthPolicy& policy,
                                     std::size_t k_max = static_cast<std::size_t>(-1));

/// Maximizer of the full joint log-likelihood over the free parameter.
double stationary_mle(const Dataset& data, const LocalModelFamily& fam);

}  // namespace locfield
