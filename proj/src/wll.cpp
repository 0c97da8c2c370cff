#include "locfield/wll.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "locfield/linalg.hpp"
#include "locfield/optimize.hpp"

namespace locfield {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double clamp_to(const LocalModelFamily& fam, double v) { return std::clamp(v, fam.lo, fam.hi); }

ScalarMaxOptions fit_options(const LocalModelFamily& fam) {
  ScalarMaxOptions opt;
  opt.scan_points = fam.kind == LocalModelFamily::Kind::variance_scale ? 25 : 13;
  return opt;
}

}  // namespace

LocalModelFamily LocalModelFamily::variance_scale(double nu, double rho, double lo, double hi) {
  LocalModelFamily f;
  f.kind = Kind::variance_scale;
  f.base = {1.0, nu, rho};
  f.lo = lo;
  f.hi = hi;
  f.validate();
  return f;
}

LocalModelFamily LocalModelFamily::matern_smoothness(double sigma2, double rho, double lo,
                                                     double hi) {
  LocalModelFamily f;
  f.kind = Kind::matern_smoothness;
  f.base = {sigma2, 1.0, rho};
  f.lo = lo;
  f.hi = hi;
  f.validate();
  return f;
}

MaternParams LocalModelFamily::params(double theta) const {
  MaternParams p = base;
  if (kind == Kind::variance_scale) {
    p.sigma2 = theta;
  } else {
    p.nu = theta;
  }
  return p;
}

std::string LocalModelFamily::free_parameter() const {
  return kind == Kind::variance_scale ? "sigma2" : "nu";
}

void LocalModelFamily::validate() const {
  if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi)) {
    throw ConfigError("family bounds must satisfy 0 < lo < hi");
  }
  params(lo).validate();
  params(hi).validate();
}

LocalLikelihood::LocalLikelihood(const Dataset& data, const NeighborOrdering& ordering,
                                 const WeightVector& w, const LocalModelFamily& fam)
    : fam_(fam) {
  if (w.size() > ordering.size()) throw ConfigError("weights longer than the neighbor ordering");
  const std::size_t k = w.effective_size();
  if (k == 0) throw NumericalError("empty effective neighborhood");
  locs_ = ordered_locations(data.locations(), ordering, k);
  z_ = ordered_responses(data, ordering, k);
  w_ = w.w.head(static_cast<Eigen::Index>(k));
  wsum_ = w_.sum();
  if (fam_.kind == LocalModelFamily::Kind::variance_scale) {
    try {
      const Eigen::MatrixXd lower = factor_lower(matern_matrix(fam_.params(1.0), locs_));
      const Eigen::VectorXd u = lower.triangularView<Eigen::Lower>().solve(z_);
      base_const_ = -wsum_ * kHalfLog2Pi - w_.dot(lower.diagonal().array().log().matrix());
      weighted_ss_ = w_.dot(u.cwiseAbs2());
      base_ok_ = true;
    } catch (const NumericalError&) {
      base_ok_ = false;
    }
  }
}

double LocalLikelihood::objective(double theta) const {
  if (!(theta > 0.0) || !std::isfinite(theta)) return kNegInf;
  if (fam_.kind == LocalModelFamily::Kind::variance_scale) {
    // theta R: d_k scales by sqrt(theta), u_k by 1/sqrt(theta).
    if (!base_ok_) return kNegInf;
    return base_const_ - 0.5 * wsum_ * std::log(theta) - 0.5 * weighted_ss_ / theta;
  }
  try {
    const Eigen::MatrixXd lower = factor_lower(matern_matrix(fam_.params(theta), locs_));
    return w_.dot(increments_from_factor(lower, z_));
  } catch (const Error&) {
    return kNegInf;
  }
}

double LocalLikelihood::variance_closed_form() const {
  if (fam_.kind != LocalModelFamily::Kind::variance_scale) {
    throw ConfigError("closed form exists only for the variance family");
  }
  if (!base_ok_) throw NumericalError("numerically singular append");
  if (!(wsum_ > 0.0)) throw NumericalError("degenerate weights");
  // Maximizer of -W/2 log(theta) - S/(2 theta); for S <= 0 the objective increases toward lo.
  if (!(weighted_ss_ > 0.0)) return fam_.lo;
  return clamp_to(fam_, weighted_ss_ / wsum_);
}

double wll_objective(double theta0, const Location& t, const Dataset& data, const WeightVector& w,
                     const LocalModelFamily& fam) {
  const auto ordering = order_neighbors(data, t);
  if (w.size() > ordering.size()) throw ConfigError("weights longer than the neighbor ordering");
  const std::size_t k = w.effective_size();
  const auto locs = ordered_locations(data.locations(), ordering, k);
  const Eigen::VectorXd z = ordered_responses(data, ordering, k);
  const MaternParams p = fam.params(theta0);
  p.validate();
  CholSequence seq(k);
  Eigen::VectorXd col(static_cast<Eigen::Index>(k));
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      col(static_cast<Eigen::Index>(i)) = matern_cov(p, distance(locs[i], locs[j]));
    }
    const double delta =
        seq.append_observation(col.head(static_cast<Eigen::Index>(j)), p.sigma2, z(static_cast<Eigen::Index>(j)));
    total += w.w(static_cast<Eigen::Index>(j)) * delta;
  }
  return total;
}

double wll_objective(const Eigen::VectorXd& theta0, const Location& t, const Dataset& data,
                     const WeightVector& w, const LocalModelFamily& fam) {
  if (theta0.size() != 1) throw ConfigError("local families have one free parameter");
  return wll_objective(theta0(0), t, data, w, fam);
}

FitResult variance_estimate(const Location& t, const Dataset& data, const WeightVector& w,
                            const MaternParams& base) {
  const auto fam = LocalModelFamily::variance_scale(base.nu, base.rho);
  const auto ordering = order_neighbors(data, t);
  if (w.size() > ordering.size()) throw ConfigError("weights longer than the neighbor ordering");
  if (!(w.sum > 0.0)) throw NumericalError("degenerate weights");
  const std::size_t k = w.effective_size();
  const auto locs = ordered_locations(data.locations(), ordering, k);
  const Eigen::VectorXd z = ordered_responses(data, ordering, k);
  const Eigen::MatrixXd r = matern_matrix(fam.params(1.0), locs);
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) throw NumericalError("numerically singular append");
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(r.rows(), r.cols()));
  const Eigen::VectorXd q = quad_form_sequence(inv, z);
  double num = 0.0;
  double prev = 0.0;
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    num += w.w(j) * (q(j) - prev);
    prev = q(j);
  }
  FitResult out;
  out.theta_hat = num > 0.0 ? clamp_to(fam, num / w.sum) : fam.lo;
  out.neighborhood_size = k;
  out.weights_used = w;
  out.objective = LocalLikelihood(data, ordering, w, fam).objective(out.theta_hat);
  return out;
}

FitResult fit_point(const Location& t, const Dataset& data, const WeightVector& w,
                    const LocalModelFamily& fam) {
  const auto ordering = order_neighbors(data, t);
  const LocalLikelihood ll(data, ordering, w, fam);
  const auto best = maximize_scalar([&](double th) { return ll.objective(th); }, fam.lo, fam.hi,
                                    fit_options(fam));
  FitResult out;
  out.theta_hat = best.x;
  out.objective = best.fx;
  out.neighborhood_size = ll.size();
  out.weights_used = w;
  return out;
}

std::vector<SurfaceNode> fit_surface(const std::vector<Location>& grid, const Dataset& data,
                                     const LocalModelFamily& fam, const WeightScheme& scheme,
                                     const BandwidthPolicy& policy, std::size_t k_max) {
  if (!(policy.lambda > 0.0)) throw ConfigError("bandwidth must be positive");
  if (policy.boundary_correction && !policy.domain_box) {
    throw ConfigError("boundary correction needs a domain box");
  }
  std::vector<SurfaceNode> out;
  out.reserve(grid.size());
  for (const auto& t : grid) {
    SurfaceNode node;
    node.location = t;
    try {
      node.lambda_used = effective_bandwidth(t, policy);
      const auto ordering = order_neighbors(data, t);
      const auto w = make_weights(scheme, data.locations(), ordering, policy, k_max);
      node.fit = fit_point(t, data, w, fam);
      node.fit->lambda_used = node.lambda_used;
    } catch (const Error& e) {
      node.error = e.what();
    }
    out.push_back(std::move(node));
  }
  return out;
}

double stationary_mle(const Dataset& data, const LocalModelFamily& fam) {
  const auto& locs = data.locations();
  const Eigen::VectorXd& z = data.responses();
  if (fam.kind == LocalModelFamily::Kind::variance_scale) {
    Eigen::LLT<Eigen::MatrixXd> llt(matern_matrix(fam.params(1.0), locs));
    if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
    const double q = llt.matrixL().solve(z).squaredNorm();
    return q > 0.0 ? clamp_to(fam, q / static_cast<double>(z.size())) : fam.lo;
  }
  auto f = [&](double nu) {
    try {
      return dense_loglik(z, matern_matrix(fam.params(nu), locs));
    } catch (const Error&) {
      return kNegInf;
    }
  };
  ScalarMaxOptions opt;
  opt.scan_points = 9;
  return maximize_scalar(f, fam.lo, fam.hi, opt).x;
}

}  // namespace locfield
