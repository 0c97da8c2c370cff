#include "locfield/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "locfield/linalg.hpp"
#include "locfield/simulate.hpp"

namespace locfield {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

/// Lower factor of `cov` and the length of the leading block that factors
/// without hitting the singularity floor.
std::pair<Eigen::MatrixXd, Eigen::Index> prefix_factor(const Eigen::MatrixXd& cov) {
  try {
    return {factor_lower(cov), cov.rows()};
  } catch (const NumericalError&) {
  }
  const Eigen::Index n = cov.rows();
  CholSequence seq(static_cast<std::size_t>(n));
  try {
    for (Eigen::Index k = 0; k < n; ++k) seq.append(cov.col(k).head(k), cov(k, k));
  } catch (const NumericalError&) {
  }
  const auto v = static_cast<Eigen::Index>(seq.size());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  if (v > 0) l.topLeftCorner(v, v) = seq.factor();
  return {l, v};
}

std::size_t effective_length(const Eigen::VectorXd& w) {
  for (Eigen::Index k = w.size(); k > 0; --k) {
    if (w(k - 1) != 0.0) return static_cast<std::size_t>(k);
  }
  return 0;
}

/// Quadratic refinement around the best of equally spaced values f on x0 + i h.
std::pair<double, double> surrogate_max(double x0, double h, const Eigen::VectorXd& f) {
  Eigen::Index best = -1;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (f(i) > kNegInf && (best < 0 || f(i) > f(best))) best = i;
  }
  if (best < 0) return {kNaN, kNegInf};
  double x = x0 + h * static_cast<double>(best);
  double fx = f(best);
  if (best > 0 && best + 1 < f.size() && std::isfinite(f(best - 1)) && std::isfinite(f(best + 1))) {
    const double a = (f(best - 1) - 2.0 * f(best) + f(best + 1)) / (2.0 * h * h);
    const double b = (f(best + 1) - f(best - 1)) / (2.0 * h);
    if (a < 0.0) {
      const double d = std::clamp(-b / (2.0 * a), -h, h);
      x += d;
      fx += b * d + a * d * d;
    }
  }
  return {x, fx};
}

/// Piecewise quadratic interpolation of the same grid values at x.
double surrogate_at(double x0, double h, const Eigen::VectorXd& f, double x) {
  const Eigen::Index g = f.size();
  if (g == 1) return f(0);
  const double pos = std::clamp((x - x0) / h, 0.0, static_cast<double>(g - 1));
  const auto j = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(pos)), g - 2);
  for (Eigen::Index s : {j - 1, j}) {
    if (s < 0 || s + 2 >= g) continue;
    if (!std::isfinite(f(s)) || !std::isfinite(f(s + 1)) || !std::isfinite(f(s + 2))) continue;
    const double u = pos - static_cast<double>(s);
    return f(s) * (u - 1.0) * (u - 2.0) / 2.0 - f(s + 1) * u * (u - 2.0) +
           f(s + 2) * u * (u - 1.0) / 2.0;
  }
  if (std::isfinite(f(j)) && std::isfinite(f(j + 1))) {
    const double u = pos - static_cast<double>(j);
    return (1.0 - u) * f(j) + u * f(j + 1);
  }
  return kNaN;
}

double sample_sd(const std::vector<double>& v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

CalibrationResult summarize(const std::vector<double>& values, int replicates) {
  std::vector<double> kept;
  for (double v : values) {
    if (std::isfinite(v)) kept.push_back(v);
  }
  CalibrationResult c;
  c.replicates = static_cast<int>(kept.size());
  c.dropped = replicates - c.replicates;
  if (c.dropped > replicates / 5 || c.replicates < 2) {
    throw NumericalError("calibration: too many failed replicates (" + std::to_string(c.dropped) +
                         " of " + std::to_string(replicates) + ")");
  }
  double sum = 0.0;
  for (double v : kept) sum += v;
  c.mean = sum / static_cast<double>(kept.size());
  c.sd = sample_sd(kept, c.mean);
  return c;
}

ProfileCurve calibrated_profile(std::string name, const std::vector<double>& lambdas,
                                const std::vector<SurfaceStats>& stats, bool use_lr,
                                int replicates) {
  ProfileCurve p;
  p.name = std::move(name);
  p.lambdas = lambdas;
  const auto m = static_cast<Eigen::Index>(lambdas.size());
  p.criterion.resize(m);
  p.statistic.resize(m);
  for (Eigen::Index l = 0; l < m; ++l) {
    std::vector<double> reps;
    reps.reserve(static_cast<std::size_t>(replicates));
    for (std::size_t r = 1; r < stats.size(); ++r) {
      reps.push_back(use_lr ? stats[r].lr(l) : stats[r].variation(l));
    }
    const CalibrationResult c = summarize(reps, replicates);
    const double s = use_lr ? stats[0].lr(l) : stats[0].variation(l);
    p.statistic(l) = s;
    p.calibration.push_back(c);
    p.criterion(l) = c.sd > 0.0 ? (s - c.mean) / c.sd : 0.0;
    if (!std::isfinite(s)) p.criterion(l) = kNaN;
  }
  p.argmax = argmax_finite(p.criterion);
  return p;
}

}  // namespace

double EstimationGrid::interpolate(const Eigen::VectorXd& values, const Location& t) const {
  const std::size_t dim = shape.size();
  double idx[2] = {0.0, 0.0};
  int i0[2] = {0, 0};
  for (std::size_t a = 0; a < dim; ++a) {
    const int n = shape[a];
    const double f = std::clamp((t(static_cast<Eigen::Index>(a)) - origin(static_cast<Eigen::Index>(a))) /
                                    spacing[a],
                                0.0, static_cast<double>(n - 1));
    i0[a] = n > 1 ? std::min(static_cast<int>(std::floor(f)), n - 2) : 0;
    idx[a] = n > 1 ? f - i0[a] : 0.0;
  }
  auto at = [&](int ix, int iy) { return values(ix + shape[0] * iy); };
  if (dim == 1) {
    if (shape[0] == 1) return values(0);
    return (1.0 - idx[0]) * at(i0[0], 0) + idx[0] * at(i0[0] + 1, 0);
  }
  const int ix1 = shape[0] > 1 ? i0[0] + 1 : i0[0];
  const int iy1 = shape[1] > 1 ? i0[1] + 1 : i0[1];
  return (1.0 - idx[0]) * (1.0 - idx[1]) * at(i0[0], i0[1]) + idx[0] * (1.0 - idx[1]) * at(ix1, i0[1]) +
         (1.0 - idx[0]) * idx[1] * at(i0[0], iy1) + idx[0] * idx[1] * at(ix1, iy1);
}

EstimationGrid make_estimation_grid(const DomainBox& box, int per_axis) {
  if (per_axis < 1) throw ConfigError("estimation grid needs at least one node per axis");
  const auto dim = box.lo.size();
  if (dim < 1 || dim > 2 || box.hi.size() != dim) throw ConfigError("estimation grid must be 1D or 2D");
  EstimationGrid g;
  g.origin = box.lo;
  for (Eigen::Index a = 0; a < dim; ++a) {
    if (!(box.hi(a) > box.lo(a))) throw ConfigError("degenerate domain box");
    const double h = (box.hi(a) - box.lo(a)) / per_axis;
    g.shape.push_back(per_axis);
    g.spacing.push_back(h);
    g.origin(a) = box.lo(a) + 0.5 * h;
  }
  const int ny = dim == 2 ? per_axis : 1;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < per_axis; ++ix) {
      Location t = g.origin;
      t(0) += ix * g.spacing[0];
      if (dim == 2) t(1) += iy * g.spacing[1];
      g.nodes.push_back(t);
    }
  }
  return g;
}

double spatial_variation(const Eigen::VectorXd& values, const std::vector<int>& shape,
                         const std::vector<double>& spacing) {
  if (shape.empty() || shape.size() > 2 || spacing.size() != shape.size()) {
    throw ConfigError("spatial_variation: grid must be 1D or 2D");
  }
  for (int n : shape) {
    if (n < 2) throw ConfigError("spatial_variation: need at least 2 nodes per axis");
  }
  const int nx = shape[0];
  const int ny = shape.size() == 2 ? shape[1] : 1;
  if (values.size() != static_cast<Eigen::Index>(nx) * ny) throw ConfigError("spatial_variation: size mismatch");
  auto v = [&](int ix, int iy) { return values(ix + nx * iy); };
  auto diff = [](int i, int n, double h, const auto& get) {
    if (i == 0) return (get(1) - get(0)) / h;
    if (i == n - 1) return (get(n - 1) - get(n - 2)) / h;
    return (get(i + 1) - get(i - 1)) / (2.0 * h);
  };
  double total = 0.0;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double gx = diff(ix, nx, spacing[0], [&](int j) { return v(j, iy); });
      double g2 = gx * gx;
      double weight = spacing[0] * ((ix == 0 || ix == nx - 1) ? 0.5 : 1.0);
      if (shape.size() == 2) {
        const double gy = diff(iy, ny, spacing[1], [&](int j) { return v(ix, j); });
        g2 += gy * gy;
        weight *= spacing[1] * ((iy == 0 || iy == ny - 1) ? 0.5 : 1.0);
      }
      total += weight * g2;
    }
  }
  return total;
}

CalibrationResult calibrate(const std::function<double(const Dataset&)>& statistic,
                            double theta_bar, const SimTemplate& tmpl, int replicates,
                            std::uint64_t seed) {
  if (replicates < 2) throw ConfigError("calibration needs at least 2 replicates");
  const FieldSampler sampler(matern_matrix(tmpl.family.params(theta_bar), tmpl.locations));
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(replicates));
  for (int r = 1; r <= replicates; ++r) {
    const Dataset d(tmpl.locations, sampler.draw(seed + static_cast<std::uint64_t>(r)));
    try {
      values.push_back(statistic(d));
    } catch (const Error&) {
      values.push_back(kNaN);
    }
  }
  return summarize(values, replicates);
}

Eigen::VectorXd ProfileCurve::standardized() const {
  std::vector<double> finite;
  for (Eigen::Index i = 0; i < criterion.size(); ++i) {
    if (std::isfinite(criterion(i))) finite.push_back(criterion(i));
  }
  double mean = 0.0;
  for (double v : finite) mean += v;
  if (!finite.empty()) mean /= static_cast<double>(finite.size());
  const double sd = sample_sd(finite, mean);
  Eigen::VectorXd out(criterion.size());
  for (Eigen::Index i = 0; i < criterion.size(); ++i) {
    out(i) = sd > 0.0 ? (criterion(i) - mean) / sd : (std::isfinite(criterion(i)) ? 0.0 : kNaN);
  }
  return out;
}

std::size_t argmax_finite(const Eigen::VectorXd& v) {
  Eigen::Index best = -1;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v(i)) && (best < 0 || v(i) > v(best))) best = i;
  }
  if (best < 0) throw NumericalError("profile has no finite value");
  return static_cast<std::size_t>(best);
}

std::vector<double> default_lambda_grid(const std::vector<Location>& locations, int count) {
  validate_locations(locations);
  if (locations.size() < 2) throw ConfigError("need at least two locations for a bandwidth grid");
  if (count < 1) throw ConfigError("bandwidth grid needs at least one point");
  std::vector<double> nn(locations.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < locations.size(); ++i) {
    for (std::size_t j = i + 1; j < locations.size(); ++j) {
      const double d = distance(locations[i], locations[j]);
      nn[i] = std::min(nn[i], d);
      nn[j] = std::min(nn[j], d);
    }
  }
  std::nth_element(nn.begin(), nn.begin() + static_cast<std::ptrdiff_t>(nn.size() / 2), nn.end());
  double median = nn[nn.size() / 2];
  if (nn.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(nn.begin(), nn.begin() + static_cast<std::ptrdiff_t>(nn.size() / 2)));
  }
  const double lo = 2.0 * median;
  const double hi = DomainBox::bounding(locations).diameter() / 2.0;
  if (!(hi > lo)) throw ConfigError("bandwidth grid is empty: locations too sparse");
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  }
  return out;
}

ProfileEngine::ProfileEngine(const std::vector<Location>& locations, const BandwidthSetup& setup)
    : locations_(locations), setup_(setup) {
  validate_locations(locations_);
  setup_.family.validate();
  lambdas_ = setup_.lambdas.empty() ? default_lambda_grid(locations_) : setup_.lambdas;
  for (double l : lambdas_) {
    if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("bandwidths must be positive");
  }
  if (setup_.replicates < 2) throw ConfigError("calibration needs at least 2 replicates");
  if (setup_.nu_grid_points < 3) throw ConfigError("nu grid needs at least 3 points");
  const DomainBox box = setup_.domain_box ? *setup_.domain_box : DomainBox::bounding(locations_);
  const int dim = static_cast<int>(locations_.front().size());
  const int per_axis = setup_.grid_per_axis > 0 ? setup_.grid_per_axis : (dim == 1 ? 64 : 8);
  grid_ = make_estimation_grid(box, per_axis);

  plans_.reserve(grid_.nodes.size());
  for (const auto& t : grid_.nodes) {
    NodePlan plan;
    plan.ordering = order_neighbors(locations_, t);
    std::vector<Eigen::VectorXd> raw;
    for (double lam : lambdas_) {
      BandwidthPolicy policy;
      policy.lambda = lam;
      policy.boundary_correction = setup_.boundary_correction;
      policy.domain_box = box;
      try {
        const auto w = make_weights(setup_.scheme, locations_, plan.ordering, policy, setup_.k_max);
        raw.push_back(w.w.head(static_cast<Eigen::Index>(w.effective_size())));
        plan.k = std::max(plan.k, w.effective_size());
      } catch (const Error&) {
        raw.emplace_back();
      }
    }
    for (auto& w : raw) {
      if (w.size() == 0) {
        plan.w.emplace_back();
        continue;
      }
      Eigen::VectorXd padded = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(plan.k));
      padded.head(w.size()) = w;
      plan.w.push_back(std::move(padded));
    }
    plans_.push_back(std::move(plan));
  }
  if (setup_.family.kind == LocalModelFamily::Kind::variance_scale) {
    global_lower_ = factor_lower(matern_matrix(setup_.family.params(1.0), locations_));
  }
}

double ProfileEngine::theta_bar(const Eigen::VectorXd& z) const {
  const auto& fam = setup_.family;
  if (fam.kind == LocalModelFamily::Kind::variance_scale) {
    const double q = global_lower_.triangularView<Eigen::Lower>().solve(z).squaredNorm();
    return q > 0.0 ? std::clamp(q / static_cast<double>(z.size()), fam.lo, fam.hi) : fam.lo;
  }
  return stationary_mle(Dataset(locations_, z), fam);
}

std::vector<SurfaceStats> ProfileEngine::evaluate(const std::vector<Eigen::VectorXd>& zs) const {
  const auto nodes = static_cast<Eigen::Index>(grid_.nodes.size());
  const auto m = static_cast<Eigen::Index>(lambdas_.size());
  std::vector<SurfaceStats> out(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) {
    if (zs[i].size() != static_cast<Eigen::Index>(locations_.size())) {
      throw ConfigError("response vector does not match the locations");
    }
    out[i].theta_bar = theta_bar(zs[i]);
    out[i].theta = Eigen::MatrixXd::Constant(nodes, m, kNaN);
    out[i].lr = Eigen::VectorXd::Zero(m);
  }
  for (std::size_t node = 0; node < plans_.size(); ++node) {
    const auto& plan = plans_[node];
    if (plan.k == 0) {
      for (auto& s : out) s.lr.setConstant(kNaN);
      continue;
    }
    if (setup_.family.kind == LocalModelFamily::Kind::variance_scale) {
      evaluate_variance_node(plan, node, zs, out);
    } else {
      evaluate_smoothness_node(plan, node, zs, out);
    }
  }
  for (auto& s : out) {
    s.variation.resize(m);
    for (Eigen::Index l = 0; l < m; ++l) {
      s.variation(l) = s.theta.col(l).allFinite()
                           ? spatial_variation(s.theta.col(l), grid_.shape, grid_.spacing)
                           : kNaN;
    }
  }
  return out;
}

void ProfileEngine::evaluate_variance_node(const NodePlan& plan, std::size_t node,
                                           const std::vector<Eigen::VectorXd>& zs,
                                           std::vector<SurfaceStats>& out) const {
  const auto& fam = setup_.family;
  const auto k = static_cast<Eigen::Index>(plan.k);
  const auto locs = ordered_locations(locations_, plan.ordering, plan.k);
  Eigen::MatrixXd lower;
  try {
    lower = factor_lower(matern_matrix(fam.params(1.0), locs));
  } catch (const NumericalError&) {
    for (auto& s : out) s.lr.setConstant(kNaN);
    return;
  }
  const Eigen::VectorXd log_d = lower.diagonal().array().log();
  for (std::size_t i = 0; i < zs.size(); ++i) {
    Eigen::VectorXd u(k);
    for (Eigen::Index j = 0; j < k; ++j) u(j) = zs[i](static_cast<Eigen::Index>(plan.ordering.perm[static_cast<std::size_t>(j)]));
    lower.triangularView<Eigen::Lower>().solveInPlace(u);
    const Eigen::VectorXd u2 = u.cwiseAbs2();
    auto& s = out[i];
    for (std::size_t l = 0; l < plan.w.size(); ++l) {
      const auto li = static_cast<Eigen::Index>(l);
      const Eigen::VectorXd& w = plan.w[l];
      if (w.size() == 0) {
        s.lr(li) = kNaN;
        continue;
      }
      const double wsum = w.sum();
      const double ss = w.dot(u2);
      const double c = -wsum * kHalfLog2Pi - w.dot(log_d);
      auto objective = [&](double th) { return c - 0.5 * wsum * std::log(th) - 0.5 * ss / th; };
      const double hat = ss > 0.0 ? std::clamp(ss / wsum, fam.lo, fam.hi) : fam.lo;
      s.theta(static_cast<Eigen::Index>(node), li) = hat;
      s.lr(li) += objective(hat) - objective(s.theta_bar);
    }
  }
}

void ProfileEngine::evaluate_smoothness_node(const NodePlan& plan, std::size_t node,
                                             const std::vector<Eigen::VectorXd>& zs,
                                             std::vector<SurfaceStats>& out) const {
  const auto& fam = setup_.family;
  const auto k = static_cast<Eigen::Index>(plan.k);
  const int g_count = setup_.nu_grid_points;
  const double x0 = std::log(fam.lo);
  const double h = (std::log(fam.hi) - x0) / (g_count - 1);
  const auto locs = ordered_locations(locations_, plan.ordering, plan.k);

  std::vector<Eigen::MatrixXd> factors;
  std::vector<Eigen::Index> valid;
  factors.reserve(static_cast<std::size_t>(g_count));
  for (int g = 0; g < g_count; ++g) {
    const double nu = g == g_count - 1 ? fam.hi : std::exp(x0 + h * g);
    auto [l, v] = prefix_factor(matern_matrix(fam.params(nu), locs));
    factors.push_back(std::move(l));
    valid.push_back(v);
  }
  std::vector<std::size_t> keff;
  for (const auto& w : plan.w) keff.push_back(w.size() == 0 ? 0 : effective_length(w));

  Eigen::MatrixXd delta(k, g_count);
  Eigen::VectorXd z(k);
  Eigen::VectorXd objective(g_count);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    for (Eigen::Index j = 0; j < k; ++j) z(j) = zs[i](static_cast<Eigen::Index>(plan.ordering.perm[static_cast<std::size_t>(j)]));
    for (int g = 0; g < g_count; ++g) {
      const Eigen::Index v = valid[static_cast<std::size_t>(g)];
      const auto& l = factors[static_cast<std::size_t>(g)];
      delta.col(g).setConstant(kNaN);
      if (v == 0) continue;
      const Eigen::VectorXd u = l.topLeftCorner(v, v).triangularView<Eigen::Lower>().solve(z.head(v));
      for (Eigen::Index j = 0; j < v; ++j) {
        delta(j, g) = -kHalfLog2Pi - std::log(l(j, j)) - 0.5 * u(j) * u(j);
      }
    }
    auto& s = out[i];
    const double xbar = std::log(s.theta_bar);
    for (std::size_t li = 0; li < plan.w.size(); ++li) {
      const auto lidx = static_cast<Eigen::Index>(li);
      const auto ke = static_cast<Eigen::Index>(keff[li]);
      if (ke == 0) {
        s.lr(lidx) = kNaN;
        continue;
      }
      const auto w = plan.w[li].head(ke);
      for (int g = 0; g < g_count; ++g) {
        objective(g) = valid[static_cast<std::size_t>(g)] >= ke ? w.dot(delta.col(g).head(ke)) : kNegInf;
        if (!std::isfinite(objective(g))) objective(g) = kNegInf;
      }
      const auto [xhat, fhat] = surrogate_max(x0, h, objective);
      if (!std::isfinite(fhat)) {
        s.lr(lidx) = kNaN;
        continue;
      }
      s.theta(static_cast<Eigen::Index>(node), lidx) = std::clamp(std::exp(xhat), fam.lo, fam.hi);
      const double fbar = surrogate_at(x0, h, objective, xbar);
      s.lr(lidx) += std::isfinite(fbar) ? std::max(0.0, fhat - fbar) : kNaN;
    }
  }
}

Eigen::MatrixXd fitted_covariance(const EstimationGrid& grid, const Eigen::VectorXd& theta,
                                  const LocalModelFamily& family,
                                  const std::vector<Location>& locations) {
  if (!theta.allFinite()) throw NumericalError("fitted surface has failed nodes");
  if (family.kind == LocalModelFamily::Kind::variance_scale) {
    Eigen::VectorXd s(static_cast<Eigen::Index>(locations.size()));
    for (std::size_t j = 0; j < locations.size(); ++j) {
      s(static_cast<Eigen::Index>(j)) = std::sqrt(grid.interpolate(theta, locations[j]));
    }
    return matern_matrix(family.params(1.0), locations).cwiseProduct(s * s.transpose());
  }
  const LocalParamFunction nu([grid, theta](const Location& t) { return grid.interpolate(theta, t); },
                              "fitted");
  return cov_matrix(NonstatModel::smoothness_only(family.base.sigma2, family.base.rho, nu), locations);
}

double oracle_criterion(double kl) {
  if (!(kl >= 0.0)) return kNaN;
  return kl <= 1e-12 ? 1e12 : std::min(1e12, 1.0 / kl);
}

namespace {

ProfileCurve oracle_profile(const EstimationGrid& grid, const Eigen::MatrixXd& theta,
                            const LocalModelFamily& fam, const std::vector<Location>& locations,
                            const std::vector<double>& lambdas, const NonstatModel& truth) {
  const Eigen::MatrixXd s2 = cov_matrix(truth, locations);
  ProfileCurve p;
  p.name = "oracle";
  p.lambdas = lambdas;
  const auto m = static_cast<Eigen::Index>(lambdas.size());
  p.criterion.resize(m);
  p.statistic.resize(m);
  for (Eigen::Index l = 0; l < m; ++l) {
    double kl = kNaN;
    try {
      kl = kl_mean_zero(fitted_covariance(grid, theta.col(l), fam, locations), s2);
    } catch (const NumericalError&) {
    }
    p.statistic(l) = kl;
    p.criterion(l) = oracle_criterion(kl);
  }
  p.argmax = argmax_finite(p.criterion);
  return p;
}

}  // namespace

BandwidthResult select_bandwidths(const Dataset& data, const BandwidthSetup& setup,
                                  const NonstatModel* truth) {
  const ProfileEngine engine(data.locations(), setup);
  BandwidthResult res;
  res.grid = engine.grid();
  res.theta_bar = engine.theta_bar(data.responses());
  const FieldSampler sampler(matern_matrix(setup.family.params(res.theta_bar), data.locations()));
  std::vector<Eigen::VectorXd> zs;
  zs.reserve(static_cast<std::size_t>(setup.replicates) + 1);
  zs.push_back(data.responses());
  for (int r = 1; r <= setup.replicates; ++r) {
    zs.push_back(sampler.draw(setup.seed + static_cast<std::uint64_t>(r)));
  }
  const auto stats = engine.evaluate(zs);
  res.theta = stats[0].theta;
  res.lambda1 = calibrated_profile("lambda1", engine.lambdas(), stats, false, setup.replicates);
  res.lambda2 = calibrated_profile("lambda2", engine.lambdas(), stats, true, setup.replicates);
  if (truth != nullptr) {
    res.oracle = oracle_profile(res.grid, res.theta, setup.family, data.locations(),
                                engine.lambdas(), *truth);
  }
  return res;
}

ProfileCurve select_lambda1(const Dataset& data, const BandwidthSetup& setup) {
  return select_bandwidths(data, setup).lambda1;
}

ProfileCurve select_lambda2(const Dataset& data, const BandwidthSetup& setup) {
  return select_bandwidths(data, setup).lambda2;
}

ProfileCurve select_lambda_oracle(const Dataset& data, const NonstatModel& truth,
                                  const BandwidthSetup& setup) {
  const ProfileEngine engine(data.locations(), setup);
  const auto stats = engine.evaluate({data.responses()});
  return oracle_profile(engine.grid(), stats[0].theta, setup.family, data.locations(),
                        engine.lambdas(), truth);
}

}  // namespace locfield
