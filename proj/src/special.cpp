#include "locfield/special.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "locfield/core.hpp"

namespace locfield {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 10000;

// 1/Gamma(z) = sum_{k>=1} c_k z^k.
constexpr std::array<double, 26> kRecipGamma = {
    1.0000000000000000,  0.5772156649015329,  -0.6558780715202538, -0.0420026350340952,
    0.1665386113822915,  -0.0421977345555443, -0.0096219715278770, 0.0072189432466630,
    -0.0011651675918591, -0.0002152416741149, 0.0001280502823882,  -0.0000201348547807,
    -0.0000012504934821, 0.0000011330272320,  -0.0000002056338417, 0.0000000061160950,
    0.0000000050020075,  -0.0000000011812746, 0.0000000001043427,  0.0000000000077823,
    -0.0000000000036968, 0.0000000000005100,  -0.0000000000000206, -0.0000000000000054,
    0.0000000000000014,  0.0000000000000001};

void check_order(double nu) {
  if (!(nu > 0.0) || nu > 21.0 || !std::isfinite(nu)) {
    throw NumericalError("bessel_k: order out of range (0, 21]: " + std::to_string(nu));
  }
}

}  // namespace

MaternRadial::MaternRadial(double nu) : nu_(nu) {
  check_order(nu);
  steps_ = static_cast<int>(nu + 0.5);
  mu_ = nu - steps_;  // |mu| <= 1/2
  const double mu2 = mu_ * mu_;
  // gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu), gam2 = (1/G(1-mu) + 1/G(1+mu)) / 2
  double odd = 0.0;
  double even = 0.0;
  double pw = 1.0;
  for (std::size_t k = 0; k + 1 < kRecipGamma.size(); k += 2) {
    even += kRecipGamma[k] * pw;
    odd += kRecipGamma[k + 1] * pw;
    pw *= mu2;
  }
  gam1_ = -odd;
  gam2_ = even;
  gampl_ = gam2_ - mu_ * gam1_;
  gammi_ = gam2_ + mu_ * gam1_;
  at_zero_ = std::exp((nu - 1.0) * std::numbers::ln2 + std::lgamma(nu));
  // Below this x the correction to the x = 0 limit is under one ulp.
  const double lead = 2.0 * std::min(nu, 1.0);
  small_x_cutoff_ = std::exp(std::log(1e-17) / lead);
}

double MaternRadial::scaled_k(double x) const {
  double kmu = 0.0;
  double k1 = 0.0;
  const double xi = 1.0 / x;
  if (x < 2.0) {
    // Temme's series for K_mu and K_{mu+1}.
    const double x2 = 0.5 * x;
    const double pimu = std::numbers::pi * mu_;
    const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = mu_ * d;
    const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
    double ff = fact * (gam1_ * std::cosh(e) + gam2_ * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / gampl_;
    double q = 0.5 / (e * gammi_);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    const double mu2 = mu_ * mu_;
    int i = 1;
    for (; i <= kMaxIter; ++i) {
      ff = (i * ff + p + q) / (i * i - mu2);
      c *= d / i;
      p /= i - mu_;
      q /= i + mu_;
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - i * ff);
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    if (i > kMaxIter) throw NumericalError("bessel_k: series did not converge");
    const double ex = std::exp(x);
    kmu = sum * ex;
    k1 = sum1 * 2.0 * xi * ex;
  } else {
    // Steed's method for the continued fraction CF2 (Temme's normalization).
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25 - mu_ * mu_;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    int i = 2;
    for (; i <= kMaxIter; ++i) {
      a -= 2 * (i - 1);
      c = -a * c / i;
      const double qnew = (q1 - b * q2) / a;
      q1 = q2;
      q2 = qnew;
      q += c * qnew;
      b += 2.0;
      d = 1.0 / (b + a * d);
      delh = (b * d - 1.0) * delh;
      h += delh;
      const double dels = q * delh;
      s += dels;
      if (std::abs(dels / s) < kEps) break;
    }
    if (i > kMaxIter) throw NumericalError("bessel_k: continued fraction did not converge");
    h = a1 * h;
    kmu = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
    k1 = kmu * (mu_ + x + 0.5 - h) * xi;
  }
  // Upward recurrence K_{v+1} = (2v/x) K_v + K_{v-1}, stable for K.
  for (int i = 1; i <= steps_; ++i) {
    const double next = (mu_ + i) * 2.0 * xi * k1 + kmu;
    kmu = k1;
    k1 = next;
  }
  return kmu;
}

double MaternRadial::operator()(double x) const {
  if (x < 0.0 || std::isnan(x)) throw NumericalError("matern_m: negative argument");
  if (x <= small_x_cutoff_) return at_zero_;
  if (x > 1e4) return 0.0;
  return std::exp(nu_ * std::log(x) - x) * scaled_k(x);
}

double bessel_k_scaled(double nu, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw NumericalError("bessel_k: argument must be positive");
  return MaternRadial(nu).scaled_k(x);
}

double bessel_k(double nu, double x) {
  check_order(nu);
  if (!(x >= 1e-12) || !(x <= 700.0)) {
    throw NumericalError("bessel_k: argument out of range [1e-12, 700]: " + std::to_string(x));
  }
  return MaternRadial(nu).scaled_k(x) * std::exp(-x);
}

double matern_m(double nu, double x) { return MaternRadial(nu)(x); }

}  // namespace locfield
