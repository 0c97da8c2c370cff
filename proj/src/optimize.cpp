#include "locfield/optimize.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "locfield/core.hpp"

namespace locfield {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double finite_or_neg_inf(double v) { return std::isfinite(v) ? v : kNegInf; }

bool better(double fx, double x, double fbest, double xbest) {
  return fx > fbest || (fx == fbest && x < xbest);
}

}  // namespace

ScalarMax brent_maximize(const std::function<double(double)>& f, double a, double b,
                         double abs_tol, double rel_tol, int max_iter) {
  constexpr double kGold = 0.3819660112501051;
  ScalarMax out;
  auto g = [&](double x) {
    ++out.evaluations;
    return -finite_or_neg_inf(f(x));
  };
  double x = a + kGold * (b - a);
  double w = x;
  double v = x;
  double fx = g(x);
  double fw = fx;
  double fv = fx;
  double d = 0.0;
  double e = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double m = 0.5 * (a + b);
    const double tol = rel_tol * std::abs(x) + abs_tol / 3.0;
    const double tol2 = 2.0 * tol;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    bool golden = true;
    if (std::abs(e) > tol && std::isfinite(fx) && std::isfinite(fw) && std::isfinite(fv)) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = x < m ? tol : -tol;
        golden = false;
      }
    }
    if (golden) {
      e = (x >= m ? a : b) - x;
      d = kGold * e;
    }
    const double u = std::abs(d) >= tol ? x + d : x + (d > 0.0 ? tol : -tol);
    const double fu = g(u);
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  out.x = x;
  out.fx = -fx;
  return out;
}

ScalarMax maximize_scalar(const std::function<double(double)>& f, double lo, double hi,
                          const ScalarMaxOptions& opt) {
  if (!(hi > lo)) throw ConfigError("maximize_scalar: empty bracket");
  const int m = std::max(3, opt.scan_points);
  const bool log_scan = opt.log_scan && lo > 0.0;
  std::vector<double> xs(static_cast<std::size_t>(m));
  std::vector<double> fs(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double frac = static_cast<double>(i) / (m - 1);
    double x = log_scan ? lo * std::pow(hi / lo, frac) : lo + (hi - lo) * frac;
    if (i == 0) x = lo;
    if (i == m - 1) x = hi;
    xs[static_cast<std::size_t>(i)] = x;
  }
  ScalarMax best{xs[0], kNegInf, 0};
  std::size_t ib = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    fs[i] = finite_or_neg_inf(f(xs[i]));
    ++best.evaluations;
    if (better(fs[i], xs[i], best.fx, best.x)) {
      best.x = xs[i];
      best.fx = fs[i];
      ib = i;
    }
  }
  if (best.fx == kNegInf) throw NumericalError("objective is non-finite across the whole bracket");

  const double a = xs[ib == 0 ? 0 : ib - 1];
  const double b = xs[ib + 1 == xs.size() ? ib : ib + 1];
  const ScalarMax refined = brent_maximize(f, a, b, opt.abs_tol, opt.rel_tol, opt.max_iter);
  best.evaluations += refined.evaluations;
  if (better(refined.fx, refined.x, best.fx, best.x)) {
    best.x = refined.x;
    best.fx = refined.fx;
  }
  return best;
}

}  // namespace locfield
