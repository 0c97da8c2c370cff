#pragma once

#include <functional>

namespace locfield {

struct ScalarMaxOptions {
  int scan_points = 13;
  bool log_scan = true;  // log-spaced scan when lo > 0
  double abs_tol = 1e-6;
  double rel_tol = 1e-10;
  int max_iter = 200;
};

struct ScalarMax {
  double x = 0.0;
  double fx = 0.0;
  int evaluations = 0;
};

/// Global-ish maximizer of f over [lo, hi]: a scan brackets the best grid point,
/// then Brent's method (golden section with parabolic steps) refines it.
/// Non-finite values count as -inf; ties go to the smaller x.
/// Throws NumericalError when f is non-finite at every scan point.
ScalarMax maximize_scalar(const std::function<double(double)>& f, double lo, double hi,
                          const ScalarMaxOptions& opt = {});

/// Brent's method on [a, b] without a preliminary scan.
ScalarMax brent_maximize(const std::function<double(double)>& f, double a, double b,
                         double abs_tol, double rel_tol, int max_iter);

}  // namespace locfield
