#pragma once

#include <optional>
#include <string>
#include <vector>

#include "locfield/core.hpp"

namespace locfield {

/// Gaussian-based kernel K_{2r} of order 2r, or the indicator of a closed ball.
struct KernelSpec {
  enum class Kind { higher_order, hard_threshold };

  Kind kind = Kind::higher_order;
  int r = 1;

  static KernelSpec gaussian(int r);
  static KernelSpec hard_threshold() { return {Kind::hard_threshold, 0}; }

  /// "K2", "K4", ... or "hard".
  [[nodiscard]] std::string name() const;
  static KernelSpec parse(const std::string& name);

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// Axis-aligned box [lo, hi].
struct DomainBox {
  Location lo;
  Location hi;

  [[nodiscard]] bool contains(const Location& t) const;
  [[nodiscard]] double diameter() const { return (hi - lo).norm(); }
  static DomainBox bounding(const std::vector<Location>& locations);
};

struct BandwidthPolicy {
  double lambda = 1.0;
  bool boundary_correction = false;
  std::optional<DomainBox> domain_box;
};

/// How per-neighbor weights are built: from a kernel of d/lambda, or as the
/// minimum-variance weights with sum one and vanishing first moment.
struct WeightScheme {
  enum class Kind { kernel, constrained };

  Kind kind = Kind::kernel;
  KernelSpec kernel = KernelSpec::gaussian(3);

  static WeightScheme from_kernel(KernelSpec k) { return {Kind::kernel, k}; }
  static WeightScheme constrained() { return {Kind::constrained, KernelSpec::gaussian(1)}; }
  [[nodiscard]] std::string name() const;
  static WeightScheme parse(const std::string& name);
};

/// Probabilists' Hermite polynomial He_j(t), j <= 15.
double hermite(int j, double t);
/// Monomial coefficients of He_j, lowest degree first.
std::vector<double> hermite_coefficients(int j);

/// K_{2r}(t) normalized to unit mass; throws for hard_threshold.
double kernel_value(const KernelSpec& spec, double t);

/// Weights with |w_k| < 1e-14 max|w| are set to zero.
void clamp_small_weights(Eigen::VectorXd& w);

/// Bandwidth after the boundary adjustment, or policy.lambda when it is off.
double effective_bandwidth(const Location& t, const BandwidthPolicy& policy);

/// lambda * prod_i g(d_i / lambda), g(u) = sqrt2 - (sqrt2 - 1) min(u, 1),
/// d_i the distance from t to the nearer face of the box along axis i.
double boundary_bandwidth(const Location& t, const BandwidthPolicy& policy);

/// w_k = K(dist_k / lambda) over the first min(n, k_max) neighbors.
WeightVector kernel_weights(const KernelSpec& spec, const NeighborOrdering& ordering,
                            const BandwidthPolicy& policy,
                            std::size_t k_max = static_cast<std::size_t>(-1));

/// Minimizer of sum w_k^2 exp(|t - t_k|^2 / 2 lambda^2) subject to sum w_k = 1 and
/// sum w_k (t - t_k) = 0, over the first min(n, k_max) neighbors.
WeightVector constrained_weights(const std::vector<Location>& locations,
                                 const NeighborOrdering& ordering, double lambda,
                                 std::size_t k_max = static_cast<std::size_t>(-1));

/// Dispatch on the scheme; applies the boundary adjustment from the policy.
WeightVector make_weights(const WeightScheme& scheme, const std::vector<Location>& locations,
                          const NeighborOrdering& ordering, const BandwidthPolicy& policy,
                          std::size_t k_max = static_cast<std::size_t>(-1));

}  // namespace locfield
