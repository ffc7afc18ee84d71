#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrshe/coefficients.hpp"
#include "mrshe/constants.hpp"
#include "mrshe/grid.hpp"
#include "mrshe/kernel.hpp"
#include "mrshe/noise.hpp"
#include "mrshe/obstacle.hpp"

namespace mrshe {

// Descriptor parsing. Each parser throws config_error with the offending key
// in the message.
SpaceTimeGrid parse_grid(const nlohmann::json& j);
ScalarField parse_field(const nlohmann::json& j, const std::string& key);
CoeffFn parse_coeff(const nlohmann::json& j, const std::string& key);
CoefficientSpec parse_coefficients(const nlohmann::json& j);
ObstacleSpec parse_obstacle(const nlohmann::json& j);
DriftField parse_drift(const nlohmann::json& j, const SpaceTimeGrid& grid);
HeatKernelConfig parse_kernel_config(const nlohmann::json& j);

struct SimulateConfig {
  SpaceTimeGrid grid;
  CoefficientSpec coeffs;
  ObstacleSpec obstacle;
  std::optional<DriftField> drift;
  int n_particles = 1;
  std::uint64_t seed = 0;
  std::vector<double> snapshots;
  int workers = 1;
  std::string output_dir = "out";
  bool allow_unstable = false;
  nlohmann::json echo;
};
SimulateConfig parse_simulate(const nlohmann::json& j);

struct CoupleConfig {
  SpaceTimeGrid grid;
  CoefficientSpec coeffs;
  ObstacleSpec obstacle;
  DriftField drift = DriftField::constant(0.0);
  int n_pairs = 100;
  std::uint64_t seed = 0;
  double marginal_t = 0.0;  // 0 means horizon
  double marginal_x = 0.5;
  std::vector<double> snapshots;
  int workers = 1;
  std::string output_dir = "out";
  nlohmann::json echo;
};
CoupleConfig parse_couple(const nlohmann::json& j);

struct ConstantsConfig {
  ConstantEnv env;
  std::vector<double> q_samples{12.0, 16.0, 24.0};
  double p = 2.0;
  double eps = 0.01;
  std::string output_dir;  // empty: stdout only
  nlohmann::json echo;
};
ConstantsConfig parse_constants(const nlohmann::json& j);

struct KernelCheckConfig {
  int t_samples = 50;
  int x_samples = 50;
  int y_samples = 50;
  double t_min = 1e-4;
  double t_max = 0.5;
  int quad_n = 1024;
  HeatKernelConfig kernel;
  int workers = 1;
  std::string output_dir = "out";
  nlohmann::json echo;
};
KernelCheckConfig parse_kernel_check(const nlohmann::json& j);

struct ConcentrationConfig {
  std::string source = "gaussian";  // "gaussian" | "simulation"
  int n_samples = 10000;
  std::uint64_t seed = 0;
  std::vector<double> eps;
  // Simulation source only:
  SpaceTimeGrid grid;
  CoefficientSpec coeffs;
  ObstacleSpec obstacle;
  int workers = 1;
  std::string output_dir = "out";
  nlohmann::json echo;
};
ConcentrationConfig parse_concentration(const nlohmann::json& j);

}  // namespace mrshe
