#include "mrshe/coefficients.hpp"

#include <cmath>

#include "mrshe/philox.hpp"

namespace mrshe {

CoeffFn CoeffFn::zero() { return {}; }

CoeffFn CoeffFn::constant(double c) {
  CoeffFn f;
  f.kind_ = Kind::Constant;
  f.a_ = c;
  return f;
}

CoeffFn CoeffFn::linear_u(double a) {
  CoeffFn f;
  f.kind_ = Kind::LinearU;
  f.a_ = a;
  return f;
}

CoeffFn CoeffFn::custom(std::function<double(double, double, double)> fn) {
  CoeffFn f;
  f.kind_ = Kind::Custom;
  f.fn_ = std::move(fn);
  return f;
}

double CoeffFn::operator()(double t, double x, double u) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Constant:
      return a_;
    case Kind::LinearU:
      return a_ * u;
    case Kind::Custom:
      return fn_(t, x, u);
  }
  return 0.0;
}

std::string CoeffFn::describe() const {
  switch (kind_) {
    case Kind::Zero:
      return "zero";
    case Kind::Constant:
      return "constant";
    case Kind::LinearU:
      return "linear_u";
    case Kind::Custom:
      return "custom";
  }
  return "?";
}

std::vector<double> CoefficientSpec::sample_u0(const SpaceTimeGrid& grid) const {
  std::vector<double> field(static_cast<std::size_t>(grid.n_nodes()));
  for (int j = 0; j <= grid.nx; ++j)
    field[static_cast<std::size_t>(j)] = u0(0.0, grid.x_at(j));
  field.front() = 0.0;
  field.back() = 0.0;
  return field;
}

void CoefficientSpec::validate(double horizon, std::uint64_t check_seed) const {
  if (!(sigma_bound > 0.0))
    throw config_error("coefficients: sigma_bound must be > 0");
  if (lipschitz_u < 0.0 || growth_bound < 0.0)
    throw config_error("coefficients: declared constants must be >= 0");
  for (int k = 0; k <= 32; ++k) {
    const double x = k / 32.0;
    const double v = u0(0.0, x);
    if (v < -1e-12) throw config_error("coefficients: u0 must be nonnegative");
  }
  if (std::abs(u0(0.0, 0.0)) > 1e-12 || std::abs(u0(0.0, 1.0)) > 1e-12)
    throw config_error("coefficients: u0 must vanish at the endpoints");
  const double slack = 1e-9;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const double t = horizon * uniform_at(check_seed, 0, 4 * i);
    const double x = uniform_at(check_seed, 0, 4 * i + 1);
    const auto uv = uniform_pair_at(check_seed, 1, i);
    const double a = 4.0 * uv[0] - 2.0;
    const double b = 4.0 * uv[1] - 2.0;
    if (std::abs(sigma(t, x, a)) > sigma_bound + slack)
      throw config_error("coefficients: |sigma| exceeds the declared bound");
    const double lip =
        std::abs(f(t, x, a) - f(t, x, b)) + std::abs(sigma(t, x, a) - sigma(t, x, b));
    if (lip > lipschitz_u * std::abs(a - b) + slack)
      throw config_error(
          "coefficients: sampled Lipschitz quotient exceeds the declaration");
  }
}

}  // namespace mrshe
