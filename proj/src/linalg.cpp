#include "locfield/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace locfield {

namespace {

constexpr double kCondVarFloor = 1e-12;
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

CholSequence::CholSequence(std::size_t capacity) { reserve(capacity); }

void CholSequence::reserve(std::size_t capacity) {
  const auto cap = static_cast<Eigen::Index>(capacity);
  if (cap <= l_.rows()) return;
  Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(cap, cap);
  const auto k = static_cast<Eigen::Index>(size_);
  grown.topLeftCorner(k, k) = l_.topLeftCorner(k, k);
  l_ = std::move(grown);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(cap);
  u.head(k) = u_.head(k);
  u_ = std::move(u);
}

void CholSequence::append(const Eigen::Ref<const Eigen::VectorXd>& new_col, double new_diag) {
  const auto k = static_cast<Eigen::Index>(size_);
  if (new_col.size() != k) throw ConfigError("chol_append: column length must equal current size");
  if (!(new_diag > 0.0) || !std::isfinite(new_diag)) {
    throw NumericalError("numerically singular append");
  }
  if (size_ + 1 > static_cast<std::size_t>(l_.rows())) reserve(std::max<std::size_t>(2 * size_, 8));
  max_diag_ = std::max(max_diag_, new_diag);
  Eigen::VectorXd row = new_col;
  if (k > 0) l_.topLeftCorner(k, k).triangularView<Eigen::Lower>().solveInPlace(row);
  const double cond_var = new_diag - row.squaredNorm();
  if (!(cond_var > kCondVarFloor * max_diag_)) throw NumericalError("numerically singular append");
  l_.block(k, 0, 1, k) = row.transpose();
  l_(k, k) = std::sqrt(cond_var);
  cond_vars_.push_back(cond_var);
  cond_means_.push_back(0.0);
  ++size_;
}

double CholSequence::append_observation(const Eigen::Ref<const Eigen::VectorXd>& new_col,
                                        double new_diag, double z) {
  append(new_col, new_diag);
  const auto k = static_cast<Eigen::Index>(size_ - 1);
  const double mean = l_.row(k).head(k).dot(u_.head(k).transpose());
  const double d = l_(k, k);
  const double e = z - mean;
  u_(k) = e / d;
  cond_means_.back() = mean;
  return -kHalfLog2Pi - std::log(d) - 0.5 * u_(k) * u_(k);
}

Eigen::MatrixXd CholSequence::factor() const {
  const auto k = static_cast<Eigen::Index>(size_);
  return l_.topLeftCorner(k, k).triangularView<Eigen::Lower>();
}

CholSequence chol_append(CholSequence seq, const Eigen::Ref<const Eigen::VectorXd>& new_col,
                         double new_diag) {
  seq.append(new_col, new_diag);
  return seq;
}

Eigen::VectorXd loglik_increments(const Eigen::VectorXd& z, const Eigen::MatrixXd& cov) {
  const Eigen::Index n = z.size();
  if (cov.rows() != n || cov.cols() != n) throw ConfigError("loglik_increments: size mismatch");
  CholSequence seq(static_cast<std::size_t>(n));
  Eigen::VectorXd out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out(k) = seq.append_observation(cov.row(k).head(k).transpose(), cov(k, k), z(k));
  }
  return out;
}

Eigen::MatrixXd factor_lower(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("numerically singular append");
  Eigen::MatrixXd l = llt.matrixL();
  // Same floor as sequential appends: d_k^2 > 1e-12 max_{j<=k} Sigma_jj.
  double max_diag = 0.0;
  for (Eigen::Index k = 0; k < l.rows(); ++k) {
    max_diag = std::max(max_diag, cov(k, k));
    if (!(l(k, k) * l(k, k) > kCondVarFloor * max_diag)) {
      throw NumericalError("numerically singular append");
    }
  }
  return l;
}

Eigen::VectorXd increments_from_factor(const Eigen::MatrixXd& lower, const Eigen::VectorXd& z) {
  const Eigen::Index n = z.size();
  const Eigen::VectorXd u = lower.topLeftCorner(n, n).triangularView<Eigen::Lower>().solve(z);
  Eigen::VectorXd out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out(k) = -kHalfLog2Pi - std::log(lower(k, k)) - 0.5 * u(k) * u(k);
  }
  return out;
}

double dense_loglik(const Eigen::VectorXd& z, const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  const Eigen::VectorXd u = llt.matrixL().solve(z);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * u.squaredNorm() - 0.5 * log_det -
         static_cast<double>(z.size()) * kHalfLog2Pi;
}

Eigen::MatrixXd inverse_downdate(const Eigen::MatrixXd& inv, Eigen::Index drop) {
  const Eigen::Index k = inv.rows();
  if (inv.cols() != k || drop < 0 || drop >= k) throw ConfigError("inverse_downdate: bad index");
  const double pivot = inv(drop, drop);
  if (!(pivot > 1e-14)) throw NumericalError("inverse_downdate: non-positive pivot");
  // Keep order of the remaining indices; equivalent to permuting `drop` last.
  Eigen::MatrixXd rest(k - 1, k - 1);
  Eigen::VectorXd col(k - 1);
  for (Eigen::Index j = 0, jj = 0; j < k; ++j) {
    if (j == drop) continue;
    col(jj) = inv(j, drop);
    for (Eigen::Index i = 0, ii = 0; i < k; ++i) {
      if (i == drop) continue;
      rest(ii++, jj) = inv(i, j);
    }
    ++jj;
  }
  rest.noalias() -= col * col.transpose() / pivot;
  return rest;
}

Eigen::VectorXd quad_form_sequence(const Eigen::MatrixXd& inv_n, const Eigen::VectorXd& z) {
  const Eigen::Index n = z.size();
  if (inv_n.rows() != n || inv_n.cols() != n) throw ConfigError("quad_form_sequence: size mismatch");
  Eigen::VectorXd q(n);
  // Work in place on the leading block; dropping the last index needs no reordering.
  Eigen::MatrixXd inv = inv_n;
  for (Eigen::Index k = n; k >= 1; --k) {
    const auto zk = z.head(k);
    q(k - 1) = zk.dot(inv.topLeftCorner(k, k).selfadjointView<Eigen::Lower>() * zk);
    if (k == 1) break;
    const double pivot = inv(k - 1, k - 1);
    if (!(pivot > 1e-14)) throw NumericalError("inverse_downdate: non-positive pivot");
    const Eigen::VectorXd col = inv.col(k - 1).head(k - 1);
    inv.topLeftCorner(k - 1, k - 1).noalias() -= col * col.transpose() / pivot;
  }
  return q.cwiseMax(0.0);
}

double kl_mean_zero(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2) {
  const Eigen::Index n = s1.rows();
  if (s1.cols() != n || s2.rows() != n || s2.cols() != n) throw ConfigError("kl_mean_zero: size mismatch");
  Eigen::LLT<Eigen::MatrixXd> l1(s1);
  Eigen::LLT<Eigen::MatrixXd> l2(s2);
  if (l1.info() != Eigen::Success || l2.info() != Eigen::Success) {
    throw NumericalError("kl_mean_zero: covariance is not positive definite");
  }
  const Eigen::MatrixXd m = l2.matrixL().solve(Eigen::MatrixXd(l1.matrixL()));
  const double trace = m.squaredNorm();
  const double logdet1 = 2.0 * l1.matrixLLT().diagonal().array().log().sum();
  const double logdet2 = 2.0 * l2.matrixLLT().diagonal().array().log().sum();
  return std::max(0.0, 0.5 * (trace - static_cast<double>(n) + logdet2 - logdet1));
}

}  // namespace locfield
