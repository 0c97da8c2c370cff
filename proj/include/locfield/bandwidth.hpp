#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "locfield/core.hpp"
#include "locfield/covariance.hpp"
#include "locfield/kernels.hpp"
#include "locfield/wll.hpp"

namespace locfield {

/// Regular cell-centered grid over a box; node index is ix + nx * iy.
struct EstimationGrid {
  std::vector<Location> nodes;
  std::vector<int> shape;
  std::vector<double> spacing;
  Location origin;  // first node

  /// Linear (1D) or bilinear (2D) interpolation of node values, constant outside.
  [[nodiscard]] double interpolate(const Eigen::VectorXd& values, const Location& t) const;
};

EstimationGrid make_estimation_grid(const DomainBox& box, int per_axis);

/// Integral of |grad theta|^2 over the grid: central differences inside, one-sided
/// at the edges, trapezoid cell weights.
double spatial_variation(const Eigen::VectorXd& values, const std::vector<int>& shape,
                         const std::vector<double>& spacing);

struct CalibrationResult {
  double mean = 0.0;
  double sd = 0.0;
  int replicates = 0;
  int dropped = 0;
};

/// Stationary simulations on fixed locations with the family at theta_bar.
struct SimTemplate {
  std::vector<Location> locations;
  LocalModelFamily family;
};

/// Mean and sd of `statistic` over R stationary simulations; replicate r uses
/// seed + r. Non-finite or throwing replicates are dropped; more than 20% dropped
/// is an error.
CalibrationResult calibrate(const std::function<double(const Dataset&)>& statistic,
                            double theta_bar, const SimTemplate& tmpl, int replicates,
                            std::uint64_t seed);

struct ProfileCurve {
  std::string name;
  std::vector<double> lambdas;
  Eigen::VectorXd criterion;
  Eigen::VectorXd statistic;  // uncalibrated statistic on the data (KL for the oracle)
  std::vector<CalibrationResult> calibration;
  std::size_t argmax = 0;

  [[nodiscard]] double lambda_hat() const { return lambdas[argmax]; }
  /// Criterion rescaled to mean 0 and sd 1 over the grid.
  [[nodiscard]] Eigen::VectorXd standardized() const;
};

/// First index attaining the maximum of the finite entries.
std::size_t argmax_finite(const Eigen::VectorXd& v);

/// 25 log-spaced points over [2 * median nearest-neighbor spacing, diameter / 2].
std::vector<double> default_lambda_grid(const std::vector<Location>& locations, int count = 25);

struct BandwidthSetup {
  LocalModelFamily family;
  WeightScheme scheme = WeightScheme::from_kernel(KernelSpec::gaussian(3));
  bool boundary_correction = false;
  std::optional<DomainBox> domain_box;  // bounding box of the data when absent
  std::size_t k_max = 500;
  std::vector<double> lambdas;          // default_lambda_grid when empty
  int replicates = 50;
  std::uint64_t seed = 0;
  int nu_grid_points = 41;
  int grid_per_axis = 0;                // 64 in 1D, 8 in 2D when 0
};

/// Estimates on the estimation grid for every bandwidth, for one response vector.
struct SurfaceStats {
  double theta_bar = 0.0;
  Eigen::MatrixXd theta;    // nodes x lambdas; NaN where a node failed
  Eigen::VectorXd variation;  // spatial_variation per lambda
  Eigen::VectorXd lr;         // sum_t [W(theta_hat(t), t) - W(theta_bar, t)] per lambda
};

/// Shared machinery for all selectors. Weights per (node, lambda) depend only on
/// the locations, so they are built once. Variance family: one unit-variance
/// factor per node, then closed forms. Smoothness family: factors on a log-spaced
/// nu grid per node; the objective is maximized by quadratic interpolation in
/// log nu around the best grid value.
class ProfileEngine {
 public:
  ProfileEngine(const std::vector<Location>& locations, const BandwidthSetup& setup);

  [[nodiscard]] const std::vector<double>& lambdas() const { return lambdas_; }
  [[nodiscard]] const EstimationGrid& grid() const { return grid_; }
  [[nodiscard]] const std::vector<Location>& locations() const { return locations_; }
  [[nodiscard]] const BandwidthSetup& setup() const { return setup_; }

  /// Stationary MLE for one response vector on the engine's locations.
  [[nodiscard]] double theta_bar(const Eigen::VectorXd& z) const;

  /// Node-major evaluation of a batch of response vectors.
  [[nodiscard]] std::vector<SurfaceStats> evaluate(const std::vector<Eigen::VectorXd>& zs) const;

 private:
  struct NodePlan {
    NeighborOrdering ordering;
    std::size_t k = 0;
    std::vector<Eigen::VectorXd> w;  // per lambda, length k; empty when weights failed
  };

  void evaluate_variance_node(const NodePlan& plan, std::size_t node,
                              const std::vector<Eigen::VectorXd>& zs,
                              std::vector<SurfaceStats>& out) const;
  void evaluate_smoothness_node(const NodePlan& plan, std::size_t node,
                                const std::vector<Eigen::VectorXd>& zs,
                                std::vector<SurfaceStats>& out) const;

  std::vector<Location> locations_;
  BandwidthSetup setup_;
  std::vector<double> lambdas_;
  EstimationGrid grid_;
  std::vector<NodePlan> plans_;
  Eigen::MatrixXd global_lower_;  // variance family: factor of the unit correlation
};

struct BandwidthResult {
  ProfileCurve lambda1;
  ProfileCurve lambda2;
  std::optional<ProfileCurve> oracle;
  double theta_bar = 0.0;
  EstimationGrid grid;
  Eigen::MatrixXd theta;  // nodes x lambdas on the data
};

/// Both data-driven selectors from one set of calibration replicates, plus the
/// KL oracle when a truth model is given.
BandwidthResult select_bandwidths(const Dataset& data, const BandwidthSetup& setup,
                                  const NonstatModel* truth = nullptr);

ProfileCurve select_lambda1(const Dataset& data, const BandwidthSetup& setup);
ProfileCurve select_lambda2(const Dataset& data, const BandwidthSetup& setup);
ProfileCurve select_lambda_oracle(const Dataset& data, const NonstatModel& truth,
                                  const BandwidthSetup& setup);

/// Covariance at the observation locations implied by a fitted grid surface:
/// diag(s) R diag(s) with s the interpolated sqrt(theta) for the variance family,
/// the smoothness-only model with interpolated nu otherwise.
Eigen::MatrixXd fitted_covariance(const EstimationGrid& grid, const Eigen::VectorXd& theta,
                                  const LocalModelFamily& family,
                                  const std::vector<Location>& locations);

/// 1 / KL(fitted || truth), capped at 1e12.
double oracle_criterion(double kl);

}  // namespace locfield
