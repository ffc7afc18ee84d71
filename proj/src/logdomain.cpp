#include "mrshe/logdomain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mrshe {

double log_sum_exp(double a, double b) {
  if (std::isinf(a) && a < 0.0) return b;
  if (std::isinf(b) && b < 0.0) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

MinResult golden_section_min(const std::function<double(double)>& f, double lo,
                             double hi, double x_tol, int max_iter) {
  constexpr double kInvPhi = 0.6180339887498948482;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > x_tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  const double fx = f(x);
  MinResult best{x, fx};
  if (fc < best.value) best = {c, fc};
  if (fd < best.value) best = {d, fd};
  return best;
}

namespace {

MinResult refine_around(const std::function<double(double)>& f,
                        const std::vector<double>& xs, double x_tol) {
  std::size_t best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<double> vals(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    vals[i] = f(xs[i]);
    if (vals[i] < best_val) {
      best_val = vals[i];
      best = i;
    }
  }
  const double lo = xs[best == 0 ? 0 : best - 1];
  const double hi = xs[std::min(best + 1, xs.size() - 1)];
  MinResult refined = golden_section_min(f, lo, hi, x_tol);
  if (best_val < refined.value) refined = {xs[best], best_val};
  return refined;
}

}  // namespace

MinResult scan_then_refine(const std::function<double(double)>& f, double lo,
                           double hi, int n_scan, double x_tol) {
  std::vector<double> xs(static_cast<std::size_t>(n_scan));
  for (int k = 1; k <= n_scan; ++k)
    xs[static_cast<std::size_t>(k - 1)] = lo + (hi - lo) * k / (n_scan + 1);
  return refine_around(f, xs, x_tol);
}

MinResult scan_geometric_then_refine(const std::function<double(double)>& f,
                                     double lo, double hi, double first_offset,
                                     int n_scan, double x_tol) {
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(n_scan));
  const double span = hi - lo;
  const double ratio = std::pow(span / first_offset, 1.0 / (n_scan - 1));
  double off = first_offset;
  for (int k = 0; k < n_scan; ++k) {
    xs.push_back(std::min(lo + off, hi));
    off *= ratio;
  }
  return refine_around(f, xs, x_tol);
}

}  // namespace mrshe
