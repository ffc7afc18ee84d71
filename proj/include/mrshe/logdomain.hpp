#pragma once

#include <functional>

namespace mrshe {

// log(e^a + e^b) without leaving the log domain.
double log_sum_exp(double a, double b);

struct MinResult {
  double x = 0.0;
  double value = 0.0;
};

// Golden-section search for the minimum of a unimodal f on [lo, hi].
// Tolerates +inf plateaus at the edges (saturated log-domain values).
MinResult golden_section_min(const std::function<double(double)>& f, double lo,
                             double hi, double x_tol, int max_iter = 200);

// Uniform pre-scan of n_scan interior points followed by golden-section
// refinement on the bracketing interval.
MinResult scan_then_refine(const std::function<double(double)>& f, double lo,
                           double hi, int n_scan, double x_tol);

// Geometric pre-scan of offsets from lo in [first_offset, hi-lo]; for
// objectives with a pole at lo.
MinResult scan_geometric_then_refine(const std::function<double(double)>& f,
                                     double lo, double hi, double first_offset,
                                     int n_scan, double x_tol);

}  // namespace mrshe
