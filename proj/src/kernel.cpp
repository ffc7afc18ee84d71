#include "mrshe/kernel.hpp"

#include <cmath>

namespace mrshe {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Terms whose envelope falls below this are dropped; far below every
// tolerance the config can express.
constexpr double kTermCutoff = 1e-22;

void check_point(double t, double x, double y) {
  if (!(t > 0.0)) throw std::domain_error("heat kernel: t must be > 0");
  if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0))
    throw std::domain_error("heat kernel: x and y must lie in [0,1]");
}

bool on_boundary(double x, double y) {
  return x == 0.0 || x == 1.0 || y == 0.0 || y == 1.0;
}

}  // namespace

double eval_kernel_image(double t, double x, double y,
                         const HeatKernelConfig& cfg) {
  check_point(t, x, y);
  if (on_boundary(x, y)) return 0.0;
  const double inv4t = 1.0 / (4.0 * t);
  const double pref = 1.0 / std::sqrt(4.0 * kPi * t);
  auto pair_term = [&](int n) {
    const double a = x - y + 2.0 * n;
    const double b = x + y + 2.0 * n;
    return std::exp(-a * a * inv4t) - std::exp(-b * b * inv4t);
  };
  double sum = pair_term(0);
  for (int n = 1; n <= cfg.n_images; ++n) {
    sum += pair_term(n) + pair_term(-n);
    // Smallest surviving distance at level n+1 is 2n (for x+y near 2).
    const double gap = 2.0 * n;
    if (std::exp(-gap * gap * inv4t) < kTermCutoff) break;
  }
  return pref * sum;
}

double eval_kernel_eigen(double t, double x, double y,
                         const HeatKernelConfig& cfg) {
  check_point(t, x, y);
  if (on_boundary(x, y)) return 0.0;
  double sum = 0.0;
  for (int n = 1; n <= cfg.n_modes; ++n) {
    const double decay = std::exp(-static_cast<double>(n) * n * kPi * kPi * t);
    if (2.0 * decay < kTermCutoff) break;
    sum += 2.0 * std::sin(n * kPi * x) * std::sin(n * kPi * y) * decay;
  }
  return sum;
}

double eval_kernel(double t, double x, double y, const HeatKernelConfig& cfg) {
  const double v = (t < cfg.t_switch) ? eval_kernel_image(t, x, y, cfg)
                                      : eval_kernel_eigen(t, x, y, cfg);
  return v < 0.0 ? 0.0 : v;
}

double nash_aronson_bound(double t, double x, double y) {
  const double d = x - y;
  return std::exp(-d * d / (2.0 * t)) / std::sqrt(2.0 * kPi * t);
}

RowIntegrals kernel_row_integrals(double t, double x,
                                  const HeatKernelConfig& cfg, int quad_n) {
  if (!(t > 0.0)) throw std::domain_error("kernel_row_integrals: t must be > 0");
  if (quad_n < 64)
    throw std::domain_error("kernel_row_integrals: quad_n must be >= 64");
  const double h = 1.0 / quad_n;
  double mass = 0.0;
  double l2 = 0.0;
  for (int j = 0; j <= quad_n; ++j) {
    const double w = (j == 0 || j == quad_n) ? 0.5 * h : h;
    const double g = eval_kernel(t, static_cast<double>(j) * h, x, cfg);
    mass += w * g;
    l2 += w * g * g;
  }
  return {mass, l2};
}

std::vector<double> heat_propagate(std::span<const double> field, double dt,
                                   const HeatKernelConfig& cfg) {
  if (!(dt > 0.0)) throw std::domain_error("heat_propagate: dt must be > 0");
  if (field.size() < 3) throw contract_error("heat_propagate: field too short");
  const int m = static_cast<int>(field.size()) - 1;  // panels
  const double h = 1.0 / m;
  std::vector<double> out(field.size(), 0.0);
  for (int i = 1; i < m; ++i) {
    const double xi = static_cast<double>(i) * h;
    double acc = 0.0;
    for (int j = 1; j < m; ++j) {
      acc += eval_kernel(dt, xi, static_cast<double>(j) * h, cfg) * field[j];
    }
    // Endpoint trapezoid weights are irrelevant: the kernel vanishes there.
    out[static_cast<std::size_t>(i)] = acc * h;
  }
  return out;
}

}  // namespace mrshe
