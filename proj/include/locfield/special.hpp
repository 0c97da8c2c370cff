#pragma once

namespace locfield {

/// Modified Bessel function of the second kind K_nu(x) for 0 < nu <= 21 and
/// 1e-12 <= x <= 700. Relative accuracy is close to machine precision.
double bessel_k(double nu, double x);

/// e^x K_nu(x) for any x > 0 and 0 < nu <= 21 (no underflow for large x).
double bessel_k_scaled(double nu, double x);

/// M_nu(x) = x^nu K_nu(x), with the limit 2^{nu-1} Gamma(nu) at x = 0.
double matern_m(double nu, double x);

/// M_nu(x) at a fixed order. The order-dependent series constants are computed
/// once, which pays off when filling a covariance matrix.
class MaternRadial {
 public:
  explicit MaternRadial(double nu);

  double operator()(double x) const;
  [[nodiscard]] double nu() const { return nu_; }
  /// 2^{nu-1} Gamma(nu)
  [[nodiscard]] double at_zero() const { return at_zero_; }

  /// e^x K_nu(x), x > 0.
  [[nodiscard]] double scaled_k(double x) const;

 private:
  double nu_;
  double mu_;
  int steps_;
  double gam1_, gam2_, gampl_, gammi_;
  double at_zero_;
  double small_x_cutoff_;
};

}  // namespace locfield
