#include "locfield/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace locfield {

namespace {

constexpr int kMaxHermite = 15;
constexpr int kMaxOrder = (kMaxHermite + 1) / 2;

// Q_{2r-2} = s_r (H_{2r-1}(t)/t) / (2^{r-1} (r-1)!), stored as coefficients of t^0, t^2, ...
struct KernelPolynomial {
  std::vector<double> even_coeffs;
};

const KernelPolynomial& kernel_polynomial(int r) {
  static const auto table = [] {
    std::array<KernelPolynomial, kMaxOrder + 1> t{};
    for (int r = 1; r <= kMaxOrder; ++r) {
      const auto h = hermite_coefficients(2 * r - 1);
      double norm = std::ldexp(1.0, r - 1) * std::tgamma(static_cast<double>(r));
      const double sign = (r % 2 == 1) ? 1.0 : -1.0;
      for (std::size_t p = 1; p < h.size(); p += 2) t[static_cast<std::size_t>(r)].even_coeffs.push_back(sign * h[p] / norm);
    }
    return t;
  }();
  return table[static_cast<std::size_t>(r)];
}

}  // namespace

KernelSpec KernelSpec::gaussian(int r) {
  if (r < 1 || r > kMaxOrder) throw ConfigError("kernel order r must be in [1, 8]");
  return {Kind::higher_order, r};
}

std::string KernelSpec::name() const {
  if (kind == Kind::hard_threshold) return "hard";
  return "K" + std::to_string(2 * r);
}

KernelSpec KernelSpec::parse(const std::string& name) {
  if (name == "hard" || name == "hard_threshold") return hard_threshold();
  if (name.size() >= 2 && (name[0] == 'K' || name[0] == 'k')) {
    try {
      const int order = std::stoi(name.substr(1));
      if (order >= 2 && order % 2 == 0) return gaussian(order / 2);
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("unknown kernel '" + name + "' (expected K2, K4, ..., K16 or hard)");
}

std::string WeightScheme::name() const {
  return kind == Kind::constrained ? "constrained" : kernel.name();
}

WeightScheme WeightScheme::parse(const std::string& name) {
  if (name == "constrained") return constrained();
  return from_kernel(KernelSpec::parse(name));
}

bool DomainBox::contains(const Location& t) const {
  if (t.size() != lo.size()) return false;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    if (t(i) < lo(i) || t(i) > hi(i)) return false;
  }
  return true;
}

DomainBox DomainBox::bounding(const std::vector<Location>& locations) {
  if (locations.empty()) throw ConfigError("empty dataset");
  DomainBox box{locations.front(), locations.front()};
  for (const auto& l : locations) {
    box.lo = box.lo.cwiseMin(l);
    box.hi = box.hi.cwiseMax(l);
  }
  return box;
}

std::vector<double> hermite_coefficients(int j) {
  if (j < 0 || j > kMaxHermite) throw ConfigError("hermite degree must be in [0, 15]");
  std::vector<double> prev{1.0};
  if (j == 0) return prev;
  std::vector<double> cur{0.0, 1.0};
  for (int m = 1; m < j; ++m) {
    // He_{m+1} = t He_m - m He_{m-1}
    std::vector<double> next(static_cast<std::size_t>(m + 2), 0.0);
    for (std::size_t p = 0; p < cur.size(); ++p) next[p + 1] += cur[p];
    for (std::size_t p = 0; p < prev.size(); ++p) next[p] -= m * prev[p];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

double hermite(int j, double t) {
  if (j < 0 || j > kMaxHermite) throw ConfigError("hermite degree must be in [0, 15]");
  double prev = 1.0;
  if (j == 0) return prev;
  double cur = t;
  for (int m = 1; m < j; ++m) {
    const double next = t * cur - m * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double kernel_value(const KernelSpec& spec, double t) {
  if (spec.kind != KernelSpec::Kind::higher_order) {
    throw ConfigError("kernel_value requires a higher-order Gaussian kernel");
  }
  const auto& poly = kernel_polynomial(spec.r);
  const double t2 = t * t;
  double q = 0.0;
  for (auto it = poly.even_coeffs.rbegin(); it != poly.even_coeffs.rend(); ++it) q = q * t2 + *it;
  return q * std::exp(-0.5 * t2) / std::sqrt(2.0 * std::numbers::pi);
}

void clamp_small_weights(Eigen::VectorXd& w) {
  if (w.size() == 0) return;
  const double cutoff = 1e-14 * w.cwiseAbs().maxCoeff();
  for (auto& v : w) {
    if (std::abs(v) < cutoff) v = 0.0;
  }
}

double boundary_bandwidth(const Location& t, const BandwidthPolicy& policy) {
  if (!(policy.lambda > 0.0)) throw ConfigError("bandwidth must be positive");
  if (!policy.domain_box) throw ConfigError("boundary correction requires a domain box");
  const auto& box = *policy.domain_box;
  if (!box.contains(t)) throw ConfigError("target outside the domain box");
  const double lam = policy.lambda;
  double scale = 1.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double d = std::min(t(i) - box.lo(i), box.hi(i) - t(i));
    const double u = std::min(d / lam, 1.0);
    scale *= std::numbers::sqrt2 - (std::numbers::sqrt2 - 1.0) * u;
  }
  return lam * scale;
}

double effective_bandwidth(const Location& t, const BandwidthPolicy& policy) {
  if (!(policy.lambda > 0.0)) throw ConfigError("bandwidth must be positive");
  return policy.boundary_correction ? boundary_bandwidth(t, policy) : policy.lambda;
}

WeightVector kernel_weights(const KernelSpec& spec, const NeighborOrdering& ordering,
                            const BandwidthPolicy& policy, std::size_t k_max) {
  const double lam = effective_bandwidth(ordering.target, policy);
  const std::size_t n = std::min(ordering.size(), k_max);
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const double u = ordering.dists[k] / lam;
    w(static_cast<Eigen::Index>(k)) = spec.kind == KernelSpec::Kind::hard_threshold
                                          ? (ordering.dists[k] <= lam ? 1.0 : 0.0)
                                          : kernel_value(spec, u);
  }
  clamp_small_weights(w);
  if (w.size() == 0 || w.cwiseAbs().maxCoeff() == 0.0) {
    throw NumericalError("empty effective neighborhood");
  }
  return telescope_weights(w);
}

WeightVector constrained_weights(const std::vector<Location>& locations,
                                 const NeighborOrdering& ordering, double lambda,
                                 std::size_t k_max) {
  if (!(lambda > 0.0)) throw ConfigError("bandwidth must be positive");
  const std::size_t n = std::min(ordering.size(), k_max);
  if (n == 0) throw NumericalError("degenerate geometry");
  const Eigen::Index dim = ordering.target.size();
  const Eigen::Index m = dim + 1;

  // exp(-(d_k^2 - d_1^2) / 2 lambda^2): a constant rescaling of e_k that leaves w unchanged.
  const double d0 = ordering.dists.front();
  Eigen::VectorXd e(static_cast<Eigen::Index>(n));
  Eigen::MatrixXd v(m, static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const double dk = ordering.dists[k];
    e(kk) = std::exp(-(dk - d0) * (dk + d0) / (2.0 * lambda * lambda));
    v(0, kk) = 1.0;
    v.block(1, kk, dim, 1) = (ordering.target - locations[ordering.perm[k]]) / lambda;
  }
  const Eigen::MatrixXd moments = v * e.asDiagonal() * v.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(moments);
  const auto& ev = eig.eigenvalues();
  if (!(ev.minCoeff() > 1e-12 * ev.maxCoeff())) throw NumericalError("degenerate geometry");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs(0) = 1.0;
  const Eigen::VectorXd ab = eig.eigenvectors() *
                             (eig.eigenvalues().cwiseInverse().asDiagonal() *
                              (eig.eigenvectors().transpose() * rhs));
  Eigen::VectorXd w = (v.transpose() * ab).cwiseProduct(e);
  clamp_small_weights(w);
  return telescope_weights(w);
}

WeightVector make_weights(const WeightScheme& scheme, const std::vector<Location>& locations,
                          const NeighborOrdering& ordering, const BandwidthPolicy& policy,
                          std::size_t k_max) {
  if (scheme.kind == WeightScheme::Kind::kernel) {
    return kernel_weights(scheme.kernel, ordering, policy, k_max);
  }
  return constrained_weights(locations, ordering, effective_bandwidth(ordering.target, policy),
                             k_max);
}

}  // namespace locfield
