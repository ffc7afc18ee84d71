#include "mrshe/obstacle.hpp"

#include <algorithm>
#include <cmath>

#include "mrshe/philox.hpp"

namespace mrshe {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

ScalarField ScalarField::zero() { return {}; }

ScalarField ScalarField::constant(double c) {
  ScalarField f;
  f.kind_ = Kind::Constant;
  f.a_ = c;
  return f;
}

ScalarField ScalarField::sine(double amplitude, int mode) {
  if (mode < 1) throw config_error("field: sine mode must be >= 1");
  ScalarField f;
  f.kind_ = Kind::Sine;
  f.a_ = amplitude;
  f.mode_ = mode;
  return f;
}

ScalarField ScalarField::ramp_sine(double amplitude, double tau, int mode) {
  if (!(tau > 0.0)) throw config_error("field: ramp tau must be > 0");
  if (mode < 1) throw config_error("field: sine mode must be >= 1");
  ScalarField f;
  f.kind_ = Kind::RampSine;
  f.a_ = amplitude;
  f.tau_ = tau;
  f.mode_ = mode;
  return f;
}

ScalarField ScalarField::custom(std::function<double(double, double)> fn) {
  ScalarField f;
  f.kind_ = Kind::Custom;
  f.fn_ = std::move(fn);
  return f;
}

double ScalarField::operator()(double t, double x) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Constant:
      return a_;
    case Kind::Sine:
      return a_ * std::sin(mode_ * kPi * x);
    case Kind::RampSine:
      return a_ * std::min(t / tau_, 1.0) * std::sin(mode_ * kPi * x);
    case Kind::Custom:
      return fn_(t, x);
  }
  return 0.0;
}

std::string ScalarField::describe() const {
  switch (kind_) {
    case Kind::Zero:
      return "zero";
    case Kind::Constant:
      return "constant";
    case Kind::Sine:
      return "sine";
    case Kind::RampSine:
      return "ramp_sine";
    case Kind::Custom:
      return "custom";
  }
  return "?";
}

MeanConstraint MeanConstraint::affine(double scale, ScalarField floor) {
  if (!(scale > 0.0)) throw config_error("constraint: affine scale must be > 0");
  MeanConstraint h;
  h.kind_ = Kind::Affine;
  h.scale_ = scale;
  h.floor_ = std::move(floor);
  return h;
}

MeanConstraint MeanConstraint::cubic_plus_linear() {
  MeanConstraint h;
  h.kind_ = Kind::Cubic;
  return h;
}

MeanConstraint MeanConstraint::two_slope(double slope_neg, double slope_pos) {
  if (!(slope_neg > 0.0) || !(slope_pos > 0.0))
    throw config_error("constraint: two_slope slopes must be > 0");
  MeanConstraint h;
  h.kind_ = Kind::TwoSlope;
  h.slope_neg_ = slope_neg;
  h.slope_pos_ = slope_pos;
  return h;
}

MeanConstraint MeanConstraint::custom(
    std::function<double(double, double, double)> fn) {
  MeanConstraint h;
  h.kind_ = Kind::Custom;
  h.fn_ = std::move(fn);
  return h;
}

double MeanConstraint::operator()(double t, double x, double y) const {
  switch (kind_) {
    case Kind::Affine:
      return scale_ * (y - floor_(t, x));
    case Kind::Cubic:
      return y * y * y + y;
    case Kind::TwoSlope:
      return y < 0.0 ? slope_neg_ * y : slope_pos_ * y;
    case Kind::Custom:
      return fn_(t, x, y);
  }
  return 0.0;
}

std::string MeanConstraint::describe() const {
  switch (kind_) {
    case Kind::Affine:
      return "affine";
    case Kind::Cubic:
      return "cubic_plus_linear";
    case Kind::TwoSlope:
      return "two_slope";
    case Kind::Custom:
      return "custom";
  }
  return "?";
}

void validate_obstacle(const ObstacleSpec& obstacle, double horizon,
                       std::uint64_t check_seed) {
  if (const auto* lin = std::get_if<LinearObstacle>(&obstacle)) {
    for (int k = 0; k <= 16; ++k) {
      const double x = k / 16.0;
      if (std::abs(lin->floor(0.0, x)) > 1e-12)
        throw config_error("obstacle: linear floor must vanish at t = 0");
    }
    for (int k = 0; k <= 16; ++k) {
      const double t = horizon * k / 16.0;
      if (std::abs(lin->floor(t, 0.0)) > 1e-12 ||
          std::abs(lin->floor(t, 1.0)) > 1e-12)
        throw config_error("obstacle: linear floor must vanish at x = 0, 1");
    }
    return;
  }
  const auto& gen = std::get<GeneralObstacle>(obstacle);
  if (!(gen.lip_lower > 0.0) || gen.lip_upper < gen.lip_lower)
    throw config_error("obstacle: need 0 < lip_lower <= lip_upper");
  for (int k = 0; k <= 16; ++k) {
    const double t = horizon * k / 16.0;
    if (std::abs(gen.h(t, 0.0, 0.0)) > 1e-12 ||
        std::abs(gen.h(t, 1.0, 0.0)) > 1e-12)
      throw config_error("obstacle: h(t, boundary, 0) must vanish");
  }
  // Bi-Lipschitz spot check on random triples, y and z in [-1, 1].
  const double slack = 1e-9;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const double t = horizon * uniform_at(check_seed, 0, 3 * i);
    const double x = uniform_at(check_seed, 0, 3 * i + 1);
    const auto u = uniform_pair_at(check_seed, 1, i);
    double y = 2.0 * u[0] - 1.0;
    double z = 2.0 * u[1] - 1.0;
    if (y > z) std::swap(y, z);
    if (z - y < 1e-6) continue;
    const double diff = gen.h(t, x, z) - gen.h(t, x, y);
    if (diff < gen.lip_lower * (z - y) - slack ||
        diff > gen.lip_upper * (z - y) + slack)
      throw config_error(
          "obstacle: h violates the declared bi-Lipschitz constants");
  }
}

}  // namespace mrshe
