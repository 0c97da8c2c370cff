#include "locfield/bayesrisk.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace locfield {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t b4_index(int N, int p1, int p2, int p3, int p4) {
  const auto m = static_cast<std::size_t>(N + 1);
  return ((static_cast<std::size_t>(p1) * m + static_cast<std::size_t>(p2)) * m +
          static_cast<std::size_t>(p3)) * m + static_cast<std::size_t>(p4);
}

Eigen::MatrixXd powers(const Eigen::VectorXd& t, double t0, int N) {
  Eigen::MatrixXd d(t.size(), N + 1);
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    double v = 1.0;
    for (int p = 0; p <= N; ++p) {
      d(i, p) = v;
      v *= t(i) - t0;
    }
  }
  return d;
}

void check_design(const WeightVector& w, const Eigen::MatrixXd& sigma, const Eigen::VectorXd& t,
                  int N) {
  if (N < 0) throw ConfigError("polynomial order must be non-negative");
  if (sigma.rows() != t.size() || sigma.cols() != t.size()) {
    throw ConfigError("covariance and positions disagree in size");
  }
  if (w.size() > static_cast<std::size_t>(t.size())) throw ConfigError("more weights than positions");
  if (!(w.sum > 0.0)) throw NumericalError("degenerate weights");
}

}  // namespace

PriorSpec PriorSpec::gaussian(double c0, int N, double tau2) {
  PriorSpec p;
  p.c0 = c0;
  p.N = N;
  p.tau2 = Eigen::VectorXd::Constant(N + 1, tau2);
  p.fourth = Eigen::VectorXd::Constant(N + 1, 3.0 * tau2 * tau2);
  p.tau2(0) = 0.0;
  p.fourth(0) = 0.0;
  p.validate();
  return p;
}

void PriorSpec::validate() const {
  if (N < 0) throw ConfigError("prior order N must be non-negative");
  if (tau2.size() != N + 1 || fourth.size() != N + 1) {
    throw ConfigError("prior moment vectors must have length N + 1");
  }
  if (!std::isfinite(c0)) throw ConfigError("c0 must be finite");
  for (int p = 1; p <= N; ++p) {
    if (!(tau2(p) >= 0.0) || !(fourth(p) >= 0.0)) throw ConfigError("prior moments must be non-negative");
  }
}

double PriorSpec::moment4(int p1, int p2, int p3, int p4) const {
  int count[64] = {0};
  if (N >= 64) throw ConfigError("prior order too large");
  for (int p : {p1, p2, p3, p4}) ++count[p];
  double m = std::pow(c0, count[0]);
  for (int p = 1; p <= N; ++p) {
    switch (count[p]) {
      case 0: break;
      case 2: m *= tau2(p); break;
      case 4: m *= fourth(p); break;
      default: return 0.0;
    }
  }
  return m;
}

double TraceTables::b4(int p1, int p2, int p3, int p4) const {
  return B4[b4_index(N, p1, p2, p3, p4)];
}

bool is_pairing(int p1, int p2, int p3, int p4) {
  const int ps[4] = {p1, p2, p3, p4};
  for (int p : ps) {
    if (p == 0) continue;
    int c = 0;
    for (int q : ps) c += q == p;
    if (c % 2 != 0) return false;
  }
  return true;
}

TraceDesign::TraceDesign(const Eigen::VectorXd& t, const Eigen::MatrixXd& sigma, double t0, int N)
    : t_(t), t0_(t0), N_(N) {
  if (N < 0) throw ConfigError("polynomial order must be non-negative");
  if (sigma.rows() != t.size() || sigma.cols() != t.size()) {
    throw ConfigError("covariance and positions disagree in size");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  const Eigen::MatrixXd lower = llt.matrixL();
  delta_powers_ = powers(t, t0, N);
  std::vector<Eigen::MatrixXd> g;
  g.reserve(static_cast<std::size_t>(N + 1));
  for (int p = 0; p <= N; ++p) {
    Eigen::MatrixXd dl = delta_powers_.col(p).asDiagonal() * lower;
    lower.triangularView<Eigen::Lower>().solveInPlace(dl);
    g.push_back(dl.triangularView<Eigen::Lower>());
  }
  h_.resize(static_cast<std::size_t>((N + 1) * (N + 1)));
  for (int p = 0; p <= N; ++p) {
    for (int q = p; q <= N; ++q) {
      Eigen::MatrixXd hpq = g[static_cast<std::size_t>(p)] * g[static_cast<std::size_t>(q)].transpose();
      h_[static_cast<std::size_t>(q * (N + 1) + p)] = hpq.transpose();
      h_[static_cast<std::size_t>(p * (N + 1) + q)] = std::move(hpq);
    }
  }
}

TraceTables TraceDesign::tables(const WeightVector& w, bool pairings_only) const {
  if (w.size() > size()) throw ConfigError("more weights than positions");
  if (!(w.sum > 0.0)) throw NumericalError("degenerate weights");
  const auto k = static_cast<Eigen::Index>(w.effective_size());
  const Eigen::VectorXd wn = w.w.head(k) / w.sum;
  const Eigen::MatrixXd ww = wn * wn.transpose();
  TraceTables out;
  out.N = N_;
  out.k_effective = static_cast<std::size_t>(k);
  out.delta_powers = delta_powers_.topRows(k);
  out.B2.resize(N_ + 1, N_ + 1);
  for (int p = 0; p <= N_; ++p) {
    for (int q = 0; q <= N_; ++q) {
      out.B2(p, q) = wn.dot(h(p, q).diagonal().head(k));
    }
  }
  const auto m = static_cast<std::size_t>(N_ + 1);
  out.B4.assign(m * m * m * m, kNaN);
  for (int p1 = 0; p1 <= N_; ++p1) {
    for (int p2 = 0; p2 <= N_; ++p2) {
      const Eigen::MatrixXd left = ww.cwiseProduct(h(p1, p2).topLeftCorner(k, k));
      for (int p3 = 0; p3 <= N_; ++p3) {
        for (int p4 = 0; p4 <= N_; ++p4) {
          if (pairings_only && !is_pairing(p1, p2, p3, p4)) continue;
          // 2 tr(W H12 W H34) = 2 sum_ij w_i w_j H12_ij H34_ji
          out.B4[b4_index(N_, p1, p2, p3, p4)] =
              2.0 * left.cwiseProduct(h(p4, p3).topLeftCorner(k, k)).sum();
        }
      }
    }
  }
  return out;
}

Eigen::MatrixXd compute_B2(const WeightVector& w, const Eigen::MatrixXd& sigma, double t0,
                           const Eigen::VectorXd& t, int N) {
  check_design(w, sigma, t, N);
  return TraceDesign(t, sigma, t0, N).tables(w).B2;
}

std::vector<double> compute_B4(const WeightVector& w, const Eigen::MatrixXd& sigma, double t0,
                               const Eigen::VectorXd& t, int N, bool pairings_only) {
  check_design(w, sigma, t, N);
  return TraceDesign(t, sigma, t0, N).tables(w, pairings_only).B4;
}

Eigen::MatrixXd compute_B2_reference(const WeightVector& w, const Eigen::MatrixXd& sigma,
                                     double t0, const Eigen::VectorXd& t, int N) {
  check_design(w, sigma, t, N);
  const Eigen::MatrixXd d = powers(t, t0, N);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(N + 1, N + 1);
  for (Eigen::Index k = 1; k <= static_cast<Eigen::Index>(w.size()); ++k) {
    const double wt = w.wtilde(k - 1);
    if (wt == 0.0) continue;
    const Eigen::MatrixXd s = sigma.topLeftCorner(k, k);
    const Eigen::MatrixXd inv = s.llt().solve(Eigen::MatrixXd::Identity(k, k));
    for (int p1 = 0; p1 <= N; ++p1) {
      for (int p2 = 0; p2 <= N; ++p2) {
        const Eigen::MatrixXd m = inv * d.col(p1).head(k).asDiagonal() * s *
                                  d.col(p2).head(k).asDiagonal();
        b(p1, p2) += wt * m.trace();
      }
    }
  }
  return b;
}

std::vector<double> compute_B4_reference(const WeightVector& w, const Eigen::MatrixXd& sigma,
                                         double t0, const Eigen::VectorXd& t, int N) {
  check_design(w, sigma, t, N);
  const Eigen::MatrixXd d = powers(t, t0, N);
  const auto n = static_cast<Eigen::Index>(w.size());
  std::vector<Eigen::MatrixXd> inv(static_cast<std::size_t>(n + 1));
  for (Eigen::Index k = 1; k <= n; ++k) {
    inv[static_cast<std::size_t>(k)] =
        sigma.topLeftCorner(k, k).llt().solve(Eigen::MatrixXd::Identity(k, k));
  }
  const auto mm = static_cast<std::size_t>(N + 1);
  std::vector<double> b(mm * mm * mm * mm, 0.0);
  std::vector<Eigen::MatrixXd> x(mm * mm);
  std::vector<Eigen::MatrixXd> y(mm * mm);
  for (Eigen::Index k = 1; k <= n; ++k) {
    for (Eigen::Index j = 1; j <= n; ++j) {
      const double wt = w.wtilde(k - 1) * w.wtilde(j - 1);
      if (wt == 0.0) continue;
      const Eigen::Index m = std::max(j, k);
      const Eigen::Index l = std::min(j, k);
      const Eigen::MatrixXd s = sigma.topLeftCorner(m, m);
      Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(m, m);
      padded.topLeftCorner(l, l) = inv[static_cast<std::size_t>(l)];
      for (int p1 = 0; p1 <= N; ++p1) {
        for (int p2 = 0; p2 <= N; ++p2) {
          const auto dp1 = d.col(p1).head(m).asDiagonal();
          const auto dp2 = d.col(p2).head(m).asDiagonal();
          x[static_cast<std::size_t>(p1) * mm + static_cast<std::size_t>(p2)] =
              inv[static_cast<std::size_t>(m)] * dp1 * s * dp2;
          y[static_cast<std::size_t>(p1) * mm + static_cast<std::size_t>(p2)] = padded * dp1 * s * dp2;
        }
      }
      for (int p1 = 0; p1 <= N; ++p1) {
        for (int p2 = 0; p2 <= N; ++p2) {
          const auto& xa = x[static_cast<std::size_t>(p1) * mm + static_cast<std::size_t>(p2)];
          for (int p3 = 0; p3 <= N; ++p3) {
            for (int p4 = 0; p4 <= N; ++p4) {
              const auto& yb = y[static_cast<std::size_t>(p3) * mm + static_cast<std::size_t>(p4)];
              b[b4_index(N, p1, p2, p3, p4)] += 2.0 * wt * xa.cwiseProduct(yb.transpose()).sum();
            }
          }
        }
      }
    }
  }
  return b;
}

RiskResult bayes_risk(const PriorSpec& prior, const TraceTables& tables) {
  prior.validate();
  if (prior.N != tables.N) throw ConfigError("prior order does not match the trace tables");
  const int N = prior.N;
  RiskResult r;
  double nuisance = 0.0;
  for (int p1 = 0; p1 <= N; ++p1) {
    for (int p2 = 0; p2 <= N; ++p2) {
      for (int p3 = 0; p3 <= N; ++p3) {
        for (int p4 = 0; p4 <= N; ++p4) {
          const double m = prior.moment4(p1, p2, p3, p4);
          if (m == 0.0) continue;
          r.variance_part += m * tables.b4(p1, p2, p3, p4);
          if (p1 > 0 && p2 > 0 && p3 > 0 && p4 > 0) {
            nuisance += m * tables.B2(p1, p2) * tables.B2(p3, p4);
          }
        }
      }
    }
  }
  double linear = 0.0;
  for (int p = 1; p <= N; ++p) linear += prior.tau2(p) * tables.B2(0, p) * tables.B2(0, p);
  r.expected_bias_sq = nuisance + 4.0 * prior.c0 * prior.c0 * linear;
  r.risk = r.variance_part + r.expected_bias_sq;
  return r;
}

namespace {

struct OrderedDesign {
  NeighborOrdering ordering;
  Eigen::VectorXd t;
  std::vector<Location> locs;
};

OrderedDesign order_design(const Eigen::VectorXd& locations, double t0) {
  std::vector<Location> raw;
  raw.reserve(static_cast<std::size_t>(locations.size()));
  for (Eigen::Index i = 0; i < locations.size(); ++i) raw.push_back(make_location({locations(i)}));
  validate_locations(raw);
  OrderedDesign d;
  d.ordering = order_neighbors(raw, make_location({t0}));
  d.locs = ordered_locations(raw, d.ordering, raw.size());
  d.t.resize(locations.size());
  for (std::size_t i = 0; i < d.locs.size(); ++i) d.t(static_cast<Eigen::Index>(i)) = d.locs[i](0);
  return d;
}

RiskResult risk_at(const TraceDesign& design, const NeighborOrdering& ordering,
                   const PriorSpec& prior, const KernelSpec& kernel, double lambda) {
  BandwidthPolicy policy;
  policy.lambda = lambda;
  try {
    return bayes_risk(prior, design.tables(kernel_weights(kernel, ordering, policy)));
  } catch (const NumericalError&) {
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, inf, inf};
  }
}

}  // namespace

std::vector<RiskResult> risk_curve(const RiskSetup& setup, const PriorSpec& prior,
                                   const KernelSpec& kernel, const std::vector<double>& lambdas) {
  const auto d = order_design(setup.locations, setup.t0);
  const TraceDesign design(d.t, matern_matrix(setup.field, d.locs), setup.t0, prior.N);
  std::vector<RiskResult> out;
  out.reserve(lambdas.size());
  for (double lam : lambdas) out.push_back(risk_at(design, d.ordering, prior, kernel, lam));
  return out;
}

std::vector<ImprovementCell> improvement_grid(const std::vector<double>& nu_grid,
                                              const std::vector<double>& rho_grid,
                                              const KernelSpec& kernel_a,
                                              const KernelSpec& kernel_b,
                                              const std::vector<double>& lambdas,
                                              const PriorSpec& prior,
                                              const Eigen::VectorXd& locations, double t0) {
  if (nu_grid.empty() || rho_grid.empty() || lambdas.empty()) throw ConfigError("empty grid");
  const auto d = order_design(locations, t0);
  std::vector<ImprovementCell> out;
  for (double nu : nu_grid) {
    for (double rho : rho_grid) {
      const TraceDesign design(d.t, matern_matrix({1.0, nu, rho}, d.locs), t0, prior.N);
      auto best = [&](const KernelSpec& kernel, double& lam_out) {
        RiskResult b{std::numeric_limits<double>::infinity(), 0.0, 0.0};
        for (double lam : lambdas) {
          const RiskResult r = risk_at(design, d.ordering, prior, kernel, lam);
          if (r.risk < b.risk) {
            b = r;
            lam_out = lam;
          }
        }
        if (!std::isfinite(b.risk)) throw NumericalError("no bandwidth gives a finite risk");
        return b;
      };
      ImprovementCell c;
      c.nu = nu;
      c.rho = rho;
      c.best_a = best(kernel_a, c.lambda_a);
      c.best_b = best(kernel_b, c.lambda_b);
      c.pct_risk_improvement = 100.0 * (c.best_b.risk - c.best_a.risk) / c.best_b.risk;
      c.pct_bias_improvement =
          c.best_b.expected_bias_sq > 0.0
              ? 100.0 * (c.best_b.expected_bias_sq - c.best_a.expected_bias_sq) / c.best_b.expected_bias_sq
              : 0.0;
      out.push_back(c);
    }
  }
  return out;
}

Eigen::VectorXd even_points_half_open(std::size_t n) {
  Eigen::VectorXd t(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) t(static_cast<Eigen::Index>(i)) = static_cast<double>(i) / static_cast<double>(n);
  return t;
}

}  // namespace locfield
