#pragma once

#include <span>
#include <vector>

#include "mrshe/errors.hpp"

namespace mrshe {

/// Truncation parameters for the Dirichlet heat kernel on [0,1].
///
/// Two series representations are kept: the image-charge series converges
/// fast for small times, the sine-eigenfunction series for large times. The
/// evaluator switches at t_switch. Both are truncated with an early exit once
/// the term envelope drops below round-off, so generous mode counts cost
/// nothing at the times where they are not needed.
struct HeatKernelConfig {
  int n_images = 64;       // image pairs n = -n_images..n_images
  int n_modes = 256;       // sine modes; enough for agreement down to t = 1e-4
  double t_switch = 0.05;  // image series below, eigenfunction series above
  double tol = 1e-10;      // absolute evaluation tolerance

  void validate() const {
    if (n_images < 1) throw config_error("kernel: n_images must be >= 1");
    if (n_modes < 1) throw config_error("kernel: n_modes must be >= 1");
    if (!(t_switch > 0.0)) throw config_error("kernel: t_switch must be > 0");
    if (!(tol > 0.0)) throw config_error("kernel: tol must be > 0");
  }
};

/// Image-charge series: sum over reflections of the free Gaussian kernel.
double eval_kernel_image(double t, double x, double y,
                         const HeatKernelConfig& cfg);

/// Eigenfunction series 2 sum_n sin(n pi x) sin(n pi y) exp(-n^2 pi^2 t).
double eval_kernel_eigen(double t, double x, double y,
                         const HeatKernelConfig& cfg);

/// Kernel value G_t(x,y); exact 0 on the boundary, negative round-off clamped
/// to 0 (the kernel is analytically nonnegative).
double eval_kernel(double t, double x, double y, const HeatKernelConfig& cfg);

/// Gaussian upper bound (2 pi t)^(-1/2) exp(-(x-y)^2 / (2t)).
double nash_aronson_bound(double t, double x, double y);

struct RowIntegrals {
  double mass;  // integral of G_t(x, .) over [0,1]
  double l2;    // integral of G_t(x, .)^2 over [0,1]
};

/// Composite-trapezoid row integrals with quad_n panels (quad_n >= 64).
RowIntegrals kernel_row_integrals(double t, double x,
                                  const HeatKernelConfig& cfg, int quad_n);

/// One mild-form propagation step: applies the kernel-matrix trapezoid
/// quadrature of integral G_dt(x, y) field(y) dy on the uniform node grid the
/// field lives on. Boundary entries of the result are exactly 0.
std::vector<double> heat_propagate(std::span<const double> field, double dt,
                                   const HeatKernelConfig& cfg);

}  // namespace mrshe
