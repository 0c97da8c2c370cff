#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "locfield/core.hpp"

namespace locfield {

/// Lower Cholesky factor of a covariance matrix grown one bordered row at a time.
/// Tracks conditional means and variances of the appended responses when given.
class CholSequence {
 public:
  explicit CholSequence(std::size_t capacity = 0);

  [[nodiscard]] std::size_t size() const { return size_; }

  /// Borders the factor with (new_col, new_diag); new_col holds covariances with
  /// the existing entries. Throws NumericalError when the conditional variance
  /// falls below 1e-12 times the largest diagonal seen.
  void append(const Eigen::Ref<const Eigen::VectorXd>& new_col, double new_diag);

  /// append() plus the response z; returns the log-likelihood increment
  /// -1/2 log(2 pi) - log d_k - e_k^2 / (2 d_k^2).
  double append_observation(const Eigen::Ref<const Eigen::VectorXd>& new_col, double new_diag,
                            double z);

  [[nodiscard]] Eigen::MatrixXd factor() const;
  [[nodiscard]] double diag(std::size_t k) const { return l_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)); }
  [[nodiscard]] const std::vector<double>& cond_means() const { return cond_means_; }
  [[nodiscard]] const std::vector<double>& cond_vars() const { return cond_vars_; }

 private:
  void reserve(std::size_t capacity);

  Eigen::MatrixXd l_;
  Eigen::VectorXd u_;  // L^{-1} z for the appended responses
  std::size_t size_ = 0;
  double max_diag_ = 0.0;
  std::vector<double> cond_means_;
  std::vector<double> cond_vars_;
};

/// Functional form of CholSequence::append.
CholSequence chol_append(CholSequence seq, const Eigen::Ref<const Eigen::VectorXd>& new_col,
                         double new_diag);

/// Delta_k = l(first k) - l(first k-1) for a mean-zero Gaussian with covariance `cov`
/// (already in neighbor order), via successive Cholesky appends.
Eigen::VectorXd loglik_increments(const Eigen::VectorXd& z, const Eigen::MatrixXd& cov);

/// Blocked Cholesky with the same singularity floor as CholSequence. Returns L.
Eigen::MatrixXd factor_lower(const Eigen::MatrixXd& cov);

/// Increments from an existing lower factor L of the ordered covariance.
Eigen::VectorXd increments_from_factor(const Eigen::MatrixXd& lower, const Eigen::VectorXd& z);

/// -1/2 z' S^{-1} z - 1/2 log|2 pi S| by dense Cholesky.
double dense_loglik(const Eigen::VectorXd& z, const Eigen::MatrixXd& cov);

/// Inverse of the principal submatrix with row/column `drop` removed, from the
/// inverse of the full matrix: inv(-d,-d) - inv(-d,d) inv(d,-d) / inv(d,d).
Eigen::MatrixXd inverse_downdate(const Eigen::MatrixXd& inv, Eigen::Index drop);

/// q_k = z_k' Sigma_k^{-1} z_k, k = 1..n, from Sigma_n^{-1} by repeated downdating
/// of the last row and column. `z` is in neighbor order.
Eigen::VectorXd quad_form_sequence(const Eigen::MatrixXd& inv_n, const Eigen::VectorXd& z);

/// KL(N(0, s1) || N(0, s2)) = 1/2 [tr(s2^{-1} s1) - n + log|s2| - log|s1|].
double kl_mean_zero(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2);

}  // namespace locfield
