#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "locfield/core.hpp"

namespace locfield {

/// Stationary Matern triple in the parameterization
/// C(h) = sigma2 2^{1-nu} / Gamma(nu) M_nu(2 sqrt(nu) h / rho).
struct MaternParams {
  double sigma2 = 1.0;
  double nu = 0.5;
  double rho = 1.0;

  void validate() const;
};

double matern_cov(const MaternParams& p, double h);

/// A positive scalar function of location; either a constant or an arbitrary callable.
class LocalParamFunction {
 public:
  LocalParamFunction(double constant);  // NOLINT(google-explicit-constructor)
  LocalParamFunction(std::function<double(const Location&)> fn, std::string label);

  double operator()(const Location& t) const;
  [[nodiscard]] bool is_constant() const { return !fn_; }
  [[nodiscard]] double constant_value() const { return constant_; }
  [[nodiscard]] const std::string& label() const { return label_; }

 private:
  double constant_ = 0.0;
  std::function<double(const Location&)> fn_;
  std::string label_;
};

/// Local geometric anisotropy alpha_t: a positive definite d x d matrix per location.
class AnisotropyFunction {
 public:
  /// alpha_t = c(t) I
  static AnisotropyFunction isotropic(LocalParamFunction scale);
  static AnisotropyFunction general(std::function<Eigen::MatrixXd(const Location&)> fn);

  Eigen::MatrixXd operator()(const Location& t) const;
  [[nodiscard]] bool is_isotropic() const { return !general_; }
  [[nodiscard]] const LocalParamFunction& scale() const { return scale_; }

 private:
  LocalParamFunction scale_{1.0};
  std::function<Eigen::MatrixXd(const Location&)> general_;
};

/// Nonstationary covariance families with spatially varying Matern parameters.
class NonstatModel {
 public:
  enum class Variant { full_R, reparam_K, smoothness_only };

  /// sigma_t sigma_s det(a_st^{-1/2}) M_{nu_st}(|a_st^{-1/2}(t - s)|)
  static NonstatModel full_R(LocalParamFunction sigma, LocalParamFunction nu,
                             AnisotropyFunction alpha);
  /// Variance / smoothness / range parameterization; locally Matern(sigma_t^2, nu_t, rho_t).
  static NonstatModel reparam_K(LocalParamFunction sigma, LocalParamFunction nu,
                                LocalParamFunction rho);
  /// Constant variance and range, varying smoothness.
  static NonstatModel smoothness_only(double sigma2, double rho, LocalParamFunction nu);
  /// Stationary Matern expressed as a constant reparam_K model.
  static NonstatModel stationary(const MaternParams& p);

  [[nodiscard]] Variant variant() const { return variant_; }
  [[nodiscard]] std::string variant_name() const;
  [[nodiscard]] const LocalParamFunction& sigma() const { return sigma_; }
  [[nodiscard]] const LocalParamFunction& nu() const { return nu_; }
  [[nodiscard]] const LocalParamFunction& rho() const { return rho_; }
  [[nodiscard]] const AnisotropyFunction& alpha() const { return alpha_; }
  [[nodiscard]] bool is_stationary() const;

 private:
  NonstatModel() = default;

  Variant variant_ = Variant::reparam_K;
  LocalParamFunction sigma_{1.0};  // standard deviation
  LocalParamFunction nu_{0.5};
  LocalParamFunction rho_{1.0};
  AnisotropyFunction alpha_;
};

double cov_value(const NonstatModel& m, const Location& s, const Location& t);

/// Symmetric matrix of cov_value over `locs`, with `nugget` added to the diagonal.
Eigen::MatrixXd cov_matrix(const NonstatModel& m, const std::vector<Location>& locs,
                           double nugget = 0.0);

/// Stationary Matern covariance matrix over `locs`; the workhorse for local models.
Eigen::MatrixXd matern_matrix(const MaternParams& p, const std::vector<Location>& locs,
                              double nugget = 0.0);

struct AppendixReport {
  double nu_st = 0.0;
  double q = 0.0;
  double integral = 0.0;         // quadrature of x^{nu-1} exp(-q^2/(4x) - x) over (0, inf)
  double closed_form = 0.0;      // 2^{1-nu} M_nu(q)
  double integral_rel_residual = 0.0;
  double convolution_lhs = 0.0;  // closed form of the Gaussian convolution
  double convolution_rhs = 0.0;  // quadrature of the convolution integral
  double convolution_residual = 0.0;
};

struct ConvolutionArgs {
  double alpha_s = 0.5;
  double alpha_t = 2.0;
  double sigma = 1.0;
  double s = 0.0;
  double t = 1.0;
};

/// Numerical check of the integral representation of M_nu and of the Gaussian
/// convolution identity behind the positive-definiteness argument (d = 1).
AppendixReport verify_appendix_identities(double nu_s, double nu_t, double q,
                                          const ConvolutionArgs& conv = {});

}  // namespace locfield
