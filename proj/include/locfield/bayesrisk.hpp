#pragma once

#include <vector>

#include <Eigen/Core>

#include "locfield/core.hpp"
#include "locfield/covariance.hpp"
#include "locfield/kernels.hpp"

namespace locfield {

/// sigma(t) = c0 + sum_{p=1..N} c_p (t - t0)^p with independent mean-zero c_p,
/// Var(c_p) = tau2[p], zero third moments and fourth moments fourth[p].
struct PriorSpec {
  double c0 = 1.0;
  int N = 0;
  Eigen::VectorXd tau2;    // length N + 1; entry 0 unused
  Eigen::VectorXd fourth;  // length N + 1; entry 0 unused

  /// c_p ~ N(0, tau2) for p = 1..N, so E c_p^4 = 3 tau2^2.
  static PriorSpec gaussian(double c0, int N, double tau2);
  void validate() const;
  /// E[c_{p1} c_{p2} c_{p3} c_{p4}] with c0 deterministic.
  [[nodiscard]] double moment4(int p1, int p2, int p3, int p4) const;
};

struct TraceTables {
  int N = 0;
  Eigen::MatrixXd B2;         // (N+1) x (N+1)
  std::vector<double> B4;     // (N+1)^4, row-major in (p1, p2, p3, p4); NaN where not computed
  Eigen::MatrixXd delta_powers;  // k x (N+1), (t_i - t0)^p
  std::size_t k_effective = 0;

  [[nodiscard]] double b4(int p1, int p2, int p3, int p4) const;
};

/// True when every nonzero index occurs an even number of times, i.e. the prior
/// moment of the tuple can be nonzero.
bool is_pairing(int p1, int p2, int p3, int p4);

/// Trace functionals for a fixed design: positions t (in neighbor order around t0)
/// and their covariance Sigma_n. With L the Cholesky factor of Sigma_n and
/// G_p = L^{-1} D_p L, D_p = diag((t_i - t0)^p):
///   B2(p, q) = tr(W G_p G_q')
///   B4(p1..p4) = 2 tr(W G_p1 G_p2' W G_p3 G_p4')
/// with W = diag(w / sum w). Leading blocks give every neighborhood size at once.
class TraceDesign {
 public:
  TraceDesign(const Eigen::VectorXd& t, const Eigen::MatrixXd& sigma, double t0, int N);

  [[nodiscard]] TraceTables tables(const WeightVector& w, bool pairings_only = true) const;
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(t_.size()); }
  [[nodiscard]] int order() const { return N_; }

 private:
  [[nodiscard]] const Eigen::MatrixXd& h(int p, int q) const {
    return h_[static_cast<std::size_t>(p * (N_ + 1) + q)];
  }

  Eigen::VectorXd t_;
  double t0_;
  int N_;
  Eigen::MatrixXd delta_powers_;
  std::vector<Eigen::MatrixXd> h_;  // G_p G_q'
};

Eigen::MatrixXd compute_B2(const WeightVector& w, const Eigen::MatrixXd& sigma, double t0,
                           const Eigen::VectorXd& t, int N);
std::vector<double> compute_B4(const WeightVector& w, const Eigen::MatrixXd& sigma, double t0,
                               const Eigen::VectorXd& t, int N, bool pairings_only = true);

/// Direct evaluation of the defining sums over neighborhood sizes, with explicit
/// inverses of every Sigma_k. O(n^5); meant for small n.
Eigen::MatrixXd compute_B2_reference(const WeightVector& w, const Eigen::MatrixXd& sigma,
                                     double t0, const Eigen::VectorXd& t, int N);
std::vector<double> compute_B4_reference(const WeightVector& w, const Eigen::MatrixXd& sigma,
                                         double t0, const Eigen::VectorXd& t, int N);

struct RiskResult {
  double risk = 0.0;
  double expected_bias_sq = 0.0;
  double variance_part = 0.0;
};

RiskResult bayes_risk(const PriorSpec& prior, const TraceTables& tables);

/// A 1D design around t0: locations ordered by distance to t0 and the Matern
/// correlation of the underlying stationary field.
struct RiskSetup {
  Eigen::VectorXd locations;  // unordered 1D positions
  double t0 = 0.5;
  MaternParams field;
};

/// Risk of the estimator at t0 for each bandwidth.
std::vector<RiskResult> risk_curve(const RiskSetup& setup, const PriorSpec& prior,
                                   const KernelSpec& kernel, const std::vector<double>& lambdas);

struct ImprovementCell {
  double nu = 0.0;
  double rho = 0.0;
  double pct_risk_improvement = 0.0;
  double pct_bias_improvement = 0.0;
  double lambda_a = 0.0;
  double lambda_b = 0.0;
  RiskResult best_a;
  RiskResult best_b;
};

/// For each (nu, rho): the risk-minimizing bandwidth over `lambdas` for each kernel,
/// and 100 (risk_B - risk_A) / risk_B, likewise for the expected squared bias.
std::vector<ImprovementCell> improvement_grid(const std::vector<double>& nu_grid,
                                              const std::vector<double>& rho_grid,
                                              const KernelSpec& kernel_a,
                                              const KernelSpec& kernel_b,
                                              const std::vector<double>& lambdas,
                                              const PriorSpec& prior,
                                              const Eigen::VectorXd& locations, double t0);

/// n points i / n, i = 0..n-1.
Eigen::VectorXd even_points_half_open(std::size_t n);

}  // namespace locfield
