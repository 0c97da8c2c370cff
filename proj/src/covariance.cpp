#include "locfield/covariance.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <Eigen/Cholesky>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "locfield/special.hpp"

namespace locfield {

void MaternParams::validate() const {
  if (!(sigma2 > 0.0) || !(nu > 0.0) || !(rho > 0.0) || !std::isfinite(sigma2) ||
      !std::isfinite(rho)) {
    throw ConfigError("Matern parameters must be positive and finite");
  }
  if (nu > 20.0) throw ConfigError("Matern smoothness must not exceed 20");
}

double matern_cov(const MaternParams& p, double h) {
  p.validate();
  const MaternRadial m(p.nu);
  return p.sigma2 * m(2.0 * std::sqrt(p.nu) * std::abs(h) / p.rho) / m.at_zero();
}

LocalParamFunction::LocalParamFunction(double constant)
    : constant_(constant), label_(std::to_string(constant)) {}

LocalParamFunction::LocalParamFunction(std::function<double(const Location&)> fn,
                                       std::string label)
    : fn_(std::move(fn)), label_(std::move(label)) {}

double LocalParamFunction::operator()(const Location& t) const {
  return fn_ ? fn_(t) : constant_;
}

AnisotropyFunction AnisotropyFunction::isotropic(LocalParamFunction scale) {
  AnisotropyFunction a;
  a.scale_ = std::move(scale);
  return a;
}

AnisotropyFunction AnisotropyFunction::general(
    std::function<Eigen::MatrixXd(const Location&)> fn) {
  AnisotropyFunction a;
  a.general_ = std::move(fn);
  return a;
}

Eigen::MatrixXd AnisotropyFunction::operator()(const Location& t) const {
  if (general_) return general_(t);
  return scale_(t) * Eigen::MatrixXd::Identity(t.size(), t.size());
}

NonstatModel NonstatModel::full_R(LocalParamFunction sigma, LocalParamFunction nu,
                                  AnisotropyFunction alpha) {
  NonstatModel m;
  m.variant_ = Variant::full_R;
  m.sigma_ = std::move(sigma);
  m.nu_ = std::move(nu);
  m.alpha_ = std::move(alpha);
  return m;
}

NonstatModel NonstatModel::reparam_K(LocalParamFunction sigma, LocalParamFunction nu,
                                     LocalParamFunction rho) {
  NonstatModel m;
  m.variant_ = Variant::reparam_K;
  m.sigma_ = std::move(sigma);
  m.nu_ = std::move(nu);
  m.rho_ = std::move(rho);
  return m;
}

NonstatModel NonstatModel::smoothness_only(double sigma2, double rho, LocalParamFunction nu) {
  if (!(sigma2 > 0.0) || !(rho > 0.0)) throw ConfigError("sigma2 and rho must be positive");
  NonstatModel m;
  m.variant_ = Variant::smoothness_only;
  m.sigma_ = LocalParamFunction(std::sqrt(sigma2));
  m.rho_ = LocalParamFunction(rho);
  m.nu_ = std::move(nu);
  return m;
}

NonstatModel NonstatModel::stationary(const MaternParams& p) {
  p.validate();
  return reparam_K(std::sqrt(p.sigma2), p.nu, p.rho);
}

std::string NonstatModel::variant_name() const {
  switch (variant_) {
    case Variant::full_R: return "full_R";
    case Variant::reparam_K: return "reparam_K";
    case Variant::smoothness_only: return "smoothness_only";
  }
  return "unknown";
}

bool NonstatModel::is_stationary() const {
  const bool base = sigma_.is_constant() && nu_.is_constant();
  switch (variant_) {
    case Variant::full_R: return base && alpha_.is_isotropic() && alpha_.scale().is_constant();
    case Variant::reparam_K: return base && rho_.is_constant();
    case Variant::smoothness_only: return nu_.is_constant();
  }
  return false;
}

namespace {

// Parameters evaluated once per location.
struct PointParams {
  double sigma = 1.0;
  double nu = 0.5;
  double a = 1.0;      // reparam_K: rho^2 / (8 nu)
  double norm = 1.0;   // reparam_K / smoothness_only normalizer
  Eigen::MatrixXd alpha;
};

double positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw NumericalError(std::string("local parameter ") + what + " must be positive, got " +
                         std::to_string(v));
  }
  return v;
}

PointParams evaluate(const NonstatModel& m, const Location& t) {
  PointParams p;
  const double d = static_cast<double>(t.size());
  p.sigma = positive(m.sigma()(t), "sigma");
  p.nu = positive(m.nu()(t), "nu");
  if (p.nu > 20.0) throw NumericalError("local smoothness exceeds 20");
  const double log_gamma_term = std::lgamma(p.nu) + (p.nu - 1.0) * std::numbers::ln2;
  switch (m.variant()) {
    case NonstatModel::Variant::full_R:
      p.alpha = m.alpha()(t);
      break;
    case NonstatModel::Variant::reparam_K: {
      const double rho = positive(m.rho()(t), "rho");
      p.a = rho * rho / (8.0 * p.nu);
      // [(rho^2 / 4 nu)^{d/2} / (Gamma(nu) 2^{nu-1})]^{1/2}
      p.norm = std::exp(0.5 * (0.5 * d * std::log(2.0 * p.a) - log_gamma_term));
      break;
    }
    case NonstatModel::Variant::smoothness_only:
      // nu^{d/4} / (Gamma(nu) 2^{nu-1})^{1/2}
      p.norm = std::exp(0.25 * d * std::log(p.nu) - 0.5 * log_gamma_term);
      break;
  }
  return p;
}

class RadialCache {
 public:
  const MaternRadial& get(double nu) {
    if (!cached_ || cached_->nu() != nu) cached_.emplace(nu);
    return *cached_;
  }

 private:
  std::optional<MaternRadial> cached_;
};

double pair_value(const NonstatModel& m, const PointParams& ps, const PointParams& pt,
                  const Location& s, const Location& t, RadialCache& cache) {
  const double d = static_cast<double>(t.size());
  const double nu_st = 0.5 * (ps.nu + pt.nu);
  const auto& radial = cache.get(nu_st);
  switch (m.variant()) {
    case NonstatModel::Variant::full_R: {
      const Eigen::MatrixXd a_st = 0.5 * (ps.alpha + pt.alpha);
      Eigen::LLT<Eigen::MatrixXd> llt(a_st);
      if (llt.info() != Eigen::Success) throw NumericalError("alpha_st is not positive definite");
      const Eigen::VectorXd h = (t - s);
      const double r = llt.matrixL().solve(h).norm();
      const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
      return ps.sigma * pt.sigma * std::exp(-0.5 * log_det) * radial(r);
    }
    case NonstatModel::Variant::reparam_K: {
      const double a_st = ps.a + pt.a;
      return ps.sigma * pt.sigma * ps.norm * pt.norm * std::pow(a_st, -0.5 * d) *
             radial(distance(s, t) / std::sqrt(a_st));
    }
    case NonstatModel::Variant::smoothness_only: {
      const double rho = m.rho().constant_value();
      const double arg = 2.0 * std::sqrt(ps.nu * pt.nu) / (rho * std::sqrt(nu_st)) * distance(s, t);
      return ps.sigma * pt.sigma * ps.norm * pt.norm * std::pow(nu_st, -0.5 * d) * radial(arg);
    }
  }
  return 0.0;
}

}  // namespace

double cov_value(const NonstatModel& m, const Location& s, const Location& t) {
  if (s.size() != t.size()) throw ConfigError("location dimension mismatch");
  RadialCache cache;
  return pair_value(m, evaluate(m, s), evaluate(m, t), s, t, cache);
}

Eigen::MatrixXd cov_matrix(const NonstatModel& m, const std::vector<Location>& locs,
                           double nugget) {
  const auto n = static_cast<Eigen::Index>(locs.size());
  std::vector<PointParams> params;
  params.reserve(locs.size());
  for (const auto& l : locs) params.push_back(evaluate(m, l));
  Eigen::MatrixXd out(n, n);
  RadialCache cache;
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    for (Eigen::Index i = j; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const double v = pair_value(m, params[ui], params[uj], locs[ui], locs[uj], cache);
      out(i, j) = v;
      out(j, i) = v;
    }
    out(j, j) += nugget;
  }
  return out;
}

Eigen::MatrixXd matern_matrix(const MaternParams& p, const std::vector<Location>& locs,
                              double nugget) {
  p.validate();
  const auto n = static_cast<Eigen::Index>(locs.size());
  const MaternRadial radial(p.nu);
  const double scale = p.sigma2 / radial.at_zero();
  const double k = 2.0 * std::sqrt(p.nu) / p.rho;
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& lj = locs[static_cast<std::size_t>(j)];
    out(j, j) = p.sigma2 + nugget;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = scale * radial(k * distance(locs[static_cast<std::size_t>(i)], lj));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

AppendixReport verify_appendix_identities(double nu_s, double nu_t, double q,
                                          const ConvolutionArgs& conv) {
  if (!(q > 0.0)) throw ConfigError("q must be positive");
  AppendixReport r;
  r.nu_st = 0.5 * (nu_s + nu_t);
  r.q = q;
  const double nu = r.nu_st;

  // int_0^inf x^{nu-1} exp(-q^2/(4x) - x) dx = 2^{1-nu} M_nu(q)
  const double q2 = q * q;
  auto integrand = [nu, q2](double x) {
    if (x <= 0.0) return 0.0;
    return std::exp((nu - 1.0) * std::log(x) - q2 / (4.0 * x) - x);
  };
  double err = 0.0;
  double l1 = 0.0;
  boost::math::quadrature::exp_sinh<double> es;
  r.integral = es.integrate(integrand, 0.0, std::numeric_limits<double>::infinity(), 1e-13,
                            &err, &l1);
  if (!std::isfinite(r.integral) || err > 1e-9 * l1) {
    throw NumericalError("appendix integral: quadrature did not converge");
  }
  r.closed_form = std::pow(2.0, 1.0 - nu) * matern_m(nu, q);
  r.integral_rel_residual = std::abs(r.integral - r.closed_form) / std::abs(r.closed_form);

  // Gaussian convolution in d = 1, with a_st = (a_s + a_t) / 2:
  //   a_st^{-1/2} exp(-(s-t)^2 / (2 sigma^2 a_st))
  //     = c_s c_t int exp(-(u-s)^2/(sigma^2 a_s)) exp(-(u-t)^2/(sigma^2 a_t)) du,
  //   c_s = (2/pi)^{1/4} sigma^{-1/2} a_s^{-1/2}.
  const double as = conv.alpha_s;
  const double at = conv.alpha_t;
  const double sg = conv.sigma;
  if (!(as > 0.0) || !(at > 0.0) || !(sg > 0.0)) throw ConfigError("convolution args must be positive");
  const double ast = 0.5 * (as + at);
  const double diff = conv.s - conv.t;
  r.convolution_lhs = std::exp(-diff * diff / (2.0 * sg * sg * ast)) / std::sqrt(ast);
  auto c = [sg](double a) { return std::pow(2.0 / std::numbers::pi, 0.25) / std::sqrt(sg * a); };
  auto conv_integrand = [&](double u) {
    const double ds = u - conv.s;
    const double dt = u - conv.t;
    return std::exp(-ds * ds / (sg * sg * as) - dt * dt / (sg * sg * at));
  };
  double cerr = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      conv_integrand, -std::numeric_limits<double>::infinity(),
      std::numeric_limits<double>::infinity(), 15, 1e-14, &cerr);
  if (!std::isfinite(integral) || cerr > 1e-10 * std::abs(integral)) {
    throw NumericalError("convolution integral: quadrature did not converge");
  }
  r.convolution_rhs = c(as) * c(at) * integral;
  r.convolution_residual = std::abs(r.convolution_lhs - r.convolution_rhs);
  return r;
}

}  // namespace locfield
