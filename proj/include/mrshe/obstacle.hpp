#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>

#include "mrshe/errors.hpp"

namespace mrshe {

/// Deterministic scalar field on [0,T] x [0,1], used for obstacle floors and
/// initial data. Built-in shapes cover the configuration surface; custom
/// callables exist for tests and are not serializable.
class ScalarField {
 public:
  static ScalarField zero();
  static ScalarField constant(double c);
  /// amplitude * sin(mode * pi * x), time-independent.
  static ScalarField sine(double amplitude, int mode);
  /// amplitude * min(t/tau, 1) * sin(mode * pi * x).
  static ScalarField ramp_sine(double amplitude, double tau, int mode);
  static ScalarField custom(std::function<double(double, double)> fn);

  double operator()(double t, double x) const;
  bool is_zero() const { return kind_ == Kind::Zero; }
  std::string describe() const;

 private:
  enum class Kind { Zero, Constant, Sine, RampSine, Custom };
  Kind kind_ = Kind::Zero;
  double a_ = 0.0;
  double tau_ = 1.0;
  int mode_ = 1;
  std::function<double(double, double)> fn_;
};

/// Constraint function h(t, x, y): strictly increasing and bi-Lipschitz in y.
class MeanConstraint {
 public:
  /// scale * (y - floor(t,x)); both Lipschitz constants equal scale.
  static MeanConstraint affine(double scale, ScalarField floor);
  /// y^3 + y; lower constant 1 near the origin, upper constant set by the
  /// range the caller declares.
  static MeanConstraint cubic_plus_linear();
  /// slope_neg * y below 0, slope_pos * y above.
  static MeanConstraint two_slope(double slope_neg, double slope_pos);
  static MeanConstraint custom(std::function<double(double, double, double)> fn);

  double operator()(double t, double x, double y) const;
  std::string describe() const;

 private:
  enum class Kind { Affine, Cubic, TwoSlope, Custom };
  Kind kind_ = Kind::Affine;
  double scale_ = 1.0;
  double slope_neg_ = 1.0, slope_pos_ = 1.0;
  ScalarField floor_;
  std::function<double(double, double, double)> fn_;
};

/// Linear mean reflection: the ensemble mean must stay above floor(t, x).
struct LinearObstacle {
  ScalarField floor;
};

/// General mean reflection: the ensemble mean of h(t, x, u) must stay >= 0;
/// lip_lower/lip_upper are the declared bi-Lipschitz constants of h in y.
struct GeneralObstacle {
  MeanConstraint h;
  double lip_lower = 1.0;
  double lip_upper = 1.0;
};

using ObstacleSpec = std::variant<LinearObstacle, GeneralObstacle>;

/// Spot checks: linear floors must vanish at t = 0 and at the spatial
/// boundary; general h must be bi-Lipschitz within the declared constants on
/// random triples and vanish at (t, 0, 0) and (t, 1, 0).
void validate_obstacle(const ObstacleSpec& obstacle, double horizon,
                       std::uint64_t check_seed = 0x0b57ac1eULL);

}  // namespace mrshe
