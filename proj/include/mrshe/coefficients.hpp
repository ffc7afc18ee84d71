#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mrshe/grid.hpp"
#include "mrshe/obstacle.hpp"

namespace mrshe {

/// Coefficient function (t, x, u) -> value, restricted to pointwise
/// dependence on u.
class CoeffFn {
 public:
  static CoeffFn zero();
  static CoeffFn constant(double c);
  /// a * u.
  static CoeffFn linear_u(double a);
  static CoeffFn custom(std::function<double(double, double, double)> fn);

  double operator()(double t, double x, double u) const;
  bool is_zero() const { return kind_ == Kind::Zero; }
  std::string describe() const;

 private:
  enum class Kind { Zero, Constant, LinearU, Custom };
  Kind kind_ = Kind::Zero;
  double a_ = 0.0;
  std::function<double(double, double, double)> fn_;
};

/// Equation coefficients plus the user-declared constants consumed by the
/// transport-constant formulas. The solver never infers the constants; they
/// are carried as declared.
struct CoefficientSpec {
  CoeffFn f = CoeffFn::zero();
  CoeffFn sigma = CoeffFn::zero();
  double lipschitz_u = 0.0;   // joint Lipschitz constant of f and sigma in u
  double growth_bound = 0.0;  // linear-growth constant of f (metadata only)
  double sigma_bound = 1.0;   // uniform bound of sigma
  ScalarField u0 = ScalarField::zero();

  /// Samples u0 on the grid nodes; boundary values are snapped to exact 0.
  std::vector<double> sample_u0(const SpaceTimeGrid& grid) const;

  /// Spot checks: u0 nonnegative and vanishing at the endpoints; |sigma|
  /// within sigma_bound and the Lipschitz declaration on random samples.
  void validate(double horizon, std::uint64_t check_seed = 0xc0effULL) const;
};

}  // namespace mrshe
