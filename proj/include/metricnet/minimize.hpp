#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "metricnet/error.hpp"

namespace metricnet {

struct MinimizeResult {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Bounded scalar minimization on [lo, hi]: golden-section search with
/// parabolic interpolation steps (Brent's localmin). Stops when the bracket
/// around the best point shrinks below roughly 2 * (4 eps |x| + abs_tol / 3).
inline MinimizeResult minimize_bounded(const std::function<double(double)>& f, double lo, double hi,
                                       double abs_tol = 1e-14, int max_iter = 500) {
  require(lo < hi, ErrorKind::invalid_parameter, "minimization bounds must satisfy lo < hi");
  const double golden = 0.5 * (3.0 - std::sqrt(5.0));
  const double eps = std::numeric_limits<double>::epsilon();

  double a = lo, b = hi;
  double x = a + golden * (b - a);
  double w = x, v = x;
  double fx = f(x);
  double fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  MinimizeResult out;
  out.evaluations = 1;

  for (int iter = 0; iter < max_iter; ++iter) {
    double mid = 0.5 * (a + b);
    double tol1 = 4.0 * eps * std::abs(x) + abs_tol / 3.0;
    double tol2 = 2.0 * tol1;
    if (std::abs(x - mid) <= tol2 - 0.5 * (b - a)) {
      out.converged = true;
      break;
    }
    bool golden_step = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      double e_prev = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (mid >= x) ? tol1 : -tol1;
        golden_step = false;
      }
    }
    if (golden_step) {
      e = (x >= mid) ? a - x : b - x;
      d = golden * e;
    }
    double u = (std::abs(d) >= tol1) ? x + d : x + (d > 0.0 ? tol1 : -tol1);
    double fu = f(u);
    ++out.evaluations;
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
  out.value = fx;
  return out;
}

}  // namespace metricnet
