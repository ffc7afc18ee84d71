#include "mrshe/config.hpp"

#include "mrshe/csv.hpp"

namespace mrshe {

namespace {

using nlohmann::json;

const json& require(const json& j, const std::string& key) {
  if (!j.contains(key)) throw config_error("missing config key: " + key);
  return j.at(key);
}

double require_number(const json& j, const std::string& key) {
  const json& v = require(j, key);
  if (!v.is_number()) throw config_error("config key must be a number: " + key);
  return v.get<double>();
}

double number_or(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  return require_number(j, key);
}

int int_or(const json& j, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  return static_cast<int>(require_number(j, key));
}

std::uint64_t seed_or(const json& j, const std::string& key,
                      std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    throw config_error("config key must be an integer: " + key);
  return v.get<std::uint64_t>();
}

std::vector<double> numbers_or(const json& j, const std::string& key) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  for (const json& v : j.at(key)) out.push_back(v.get<double>());
  return out;
}

}  // namespace

SpaceTimeGrid parse_grid(const json& j) {
  SpaceTimeGrid grid;
  grid.T = require_number(j, "T");
  grid.nt = static_cast<int>(require_number(j, "nt"));
  grid.nx = static_cast<int>(require_number(j, "nx"));
  grid.validate();
  return grid;
}

ScalarField parse_field(const json& j, const std::string& key) {
  const std::string kind = require(j, "kind").get<std::string>();
  if (kind == "zero") return ScalarField::zero();
  if (kind == "constant") return ScalarField::constant(require_number(j, "c"));
  if (kind == "sine")
    return ScalarField::sine(require_number(j, "amplitude"),
                             int_or(j, "mode", 1));
  if (kind == "ramp_sine")
    return ScalarField::ramp_sine(require_number(j, "amplitude"),
                                  require_number(j, "tau"), int_or(j, "mode", 1));
  throw config_error("unknown field kind for " + key + ": " + kind);
}

CoeffFn parse_coeff(const json& j, const std::string& key) {
  const std::string kind = require(j, "kind").get<std::string>();
  if (kind == "zero") return CoeffFn::zero();
  if (kind == "constant") return CoeffFn::constant(require_number(j, "c"));
  if (kind == "linear_u") return CoeffFn::linear_u(require_number(j, "a"));
  throw config_error("unknown coefficient kind for " + key + ": " + kind);
}

CoefficientSpec parse_coefficients(const json& j) {
  CoefficientSpec spec;
  spec.f = parse_coeff(require(j, "f"), "f");
  spec.sigma = parse_coeff(require(j, "sigma"), "sigma");
  spec.lipschitz_u = number_or(j, "C_T", 0.0);
  spec.growth_bound = number_or(j, "M_T", 0.0);
  spec.sigma_bound = number_or(j, "M_sigma", 1.0);
  spec.u0 = j.contains("u0") ? parse_field(j.at("u0"), "u0")
                             : ScalarField::zero();
  return spec;
}

ObstacleSpec parse_obstacle(const json& j) {
  const std::string kind = require(j, "kind").get<std::string>();
  if (kind == "linear") {
    LinearObstacle lin;
    lin.floor = parse_field(require(j, "y"), "y");
    return lin;
  }
  if (kind == "general") {
    GeneralObstacle gen;
    const json& h = require(j, "h");
    const std::string name = require(h, "name").get<std::string>();
    const json params = h.contains("params") ? h.at("params") : json::object();
    if (name == "affine") {
      ScalarField floor = params.contains("floor")
                              ? parse_field(params.at("floor"), "floor")
                              : ScalarField::zero();
      gen.h = MeanConstraint::affine(number_or(params, "scale", 1.0),
                                     std::move(floor));
    } else if (name == "cubic_plus_linear") {
      gen.h = MeanConstraint::cubic_plus_linear();
    } else if (name == "two_slope") {
      gen.h = MeanConstraint::two_slope(require_number(params, "slope_neg"),
                                        require_number(params, "slope_pos"));
    } else {
      throw config_error("unknown constraint builtin: " + name);
    }
    gen.lip_lower = require_number(j, "c_h");
    gen.lip_upper = require_number(j, "C_h");
    return gen;
  }
  throw config_error("unknown obstacle kind: " + kind);
}

DriftField parse_drift(const json& j, const SpaceTimeGrid& grid) {
  const std::string kind = require(j, "kind").get<std::string>();
  if (kind == "constant") return DriftField::constant(require_number(j, "c"));
  if (kind == "grid") {
    const std::string path = require(j, "path").get<std::string>();
    const auto matrix = read_csv_matrix(path);
    if (matrix.size() != static_cast<std::size_t>(grid.nt))
      throw config_error("drift grid: expected nt rows in " + path);
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(grid.nt) * grid.nx);
    for (const auto& row : matrix) {
      if (row.size() != static_cast<std::size_t>(grid.nx))
        throw config_error("drift grid: expected nx columns in " + path);
      values.insert(values.end(), row.begin(), row.end());
    }
    return DriftField::cells(grid.nt, grid.nx, std::move(values));
  }
  throw config_error("unknown drift kind: " + kind);
}

HeatKernelConfig parse_kernel_config(const json& j) {
  HeatKernelConfig cfg;
  cfg.n_images = int_or(j, "n_images", cfg.n_images);
  cfg.n_modes = int_or(j, "n_modes", cfg.n_modes);
  cfg.t_switch = number_or(j, "t_switch", cfg.t_switch);
  cfg.tol = number_or(j, "tol", cfg.tol);
  cfg.validate();
  return cfg;
}

SimulateConfig parse_simulate(const json& j) {
  SimulateConfig cfg;
  cfg.grid = parse_grid(require(j, "grid"));
  cfg.coeffs = parse_coefficients(require(j, "coefficients"));
  cfg.obstacle = parse_obstacle(require(j, "obstacle"));
  cfg.allow_unstable = j.value("allow_unstable", false);
  if (!cfg.grid.cfl_ok() && !cfg.allow_unstable)
    throw config_error(
        "grid violates the CFL condition dt <= dx^2/2; pass allow_unstable to "
        "acknowledge");
  if (j.contains("drift") && !j.at("drift").is_null())
    cfg.drift = parse_drift(j.at("drift"), cfg.grid);
  cfg.n_particles = int_or(j, "n_particles", 1);
  if (cfg.n_particles < 1) throw config_error("n_particles must be >= 1");
  cfg.seed = seed_or(j, "seed", 0);
  cfg.snapshots = numbers_or(j, "snapshots");
  cfg.workers = int_or(j, "workers", 1);
  cfg.output_dir = j.value("output_dir", std::string("out"));
  cfg.coeffs.validate(cfg.grid.T);
  validate_obstacle(cfg.obstacle, cfg.grid.T);
  cfg.echo = j;
  return cfg;
}

CoupleConfig parse_couple(const json& j) {
  CoupleConfig cfg;
  cfg.grid = parse_grid(require(j, "grid"));
  cfg.coeffs = parse_coefficients(require(j, "coefficients"));
  cfg.obstacle = parse_obstacle(require(j, "obstacle"));
  if (!cfg.grid.cfl_ok())
    throw config_error("grid violates the CFL condition dt <= dx^2/2");
  cfg.drift = parse_drift(require(j, "drift"), cfg.grid);
  cfg.n_pairs = int_or(j, "n_pairs", 100);
  if (cfg.n_pairs < 1) throw config_error("n_pairs must be >= 1");
  cfg.seed = seed_or(j, "seed", 0);
  if (j.contains("marginal")) {
    cfg.marginal_t = number_or(j.at("marginal"), "t", 0.0);
    cfg.marginal_x = number_or(j.at("marginal"), "x", 0.5);
  }
  cfg.snapshots = numbers_or(j, "snapshots");
  cfg.workers = int_or(j, "workers", 1);
  cfg.output_dir = j.value("output_dir", std::string("out"));
  cfg.coeffs.validate(cfg.grid.T);
  validate_obstacle(cfg.obstacle, cfg.grid.T);
  cfg.echo = j;
  return cfg;
}

ConstantsConfig parse_constants(const json& j) {
  ConstantsConfig cfg;
  cfg.env.horizon = number_or(j, "T", 1.0);
  cfg.env.lipschitz = number_or(j, "C_T", 0.0);
  cfg.env.sigma_bound = number_or(j, "M_sigma", 1.0);
  cfg.env.lip_lower = number_or(j, "c_h", 0.0);
  cfg.env.lip_upper = number_or(j, "C_h", 0.0);
  if (j.contains("q_samples")) cfg.q_samples = numbers_or(j, "q_samples");
  cfg.p = number_or(j, "p", 2.0);
  cfg.eps = number_or(j, "eps", 0.01);
  cfg.output_dir = j.value("output_dir", std::string());
  cfg.echo = j;
  return cfg;
}

KernelCheckConfig parse_kernel_check(const json& j) {
  KernelCheckConfig cfg;
  cfg.t_samples = int_or(j, "t_samples", 50);
  cfg.x_samples = int_or(j, "x_samples", 50);
  cfg.y_samples = int_or(j, "y_samples", 50);
  cfg.t_min = number_or(j, "t_min", 1e-4);
  cfg.t_max = number_or(j, "t_max", 0.5);
  cfg.quad_n = int_or(j, "quad_n", 1024);
  if (cfg.t_samples < 2 || cfg.x_samples < 2 || cfg.y_samples < 2)
    throw config_error("kernel-check: sample counts must be >= 2");
  if (!(cfg.t_min > 0.0) || !(cfg.t_max > cfg.t_min))
    throw config_error("kernel-check: need 0 < t_min < t_max");
  cfg.kernel = j.contains("kernel") ? parse_kernel_config(j.at("kernel"))
                                    : HeatKernelConfig{};
  cfg.workers = int_or(j, "workers", 1);
  cfg.output_dir = j.value("output_dir", std::string("out"));
  cfg.echo = j;
  return cfg;
}

ConcentrationConfig parse_concentration(const json& j) {
  ConcentrationConfig cfg;
  cfg.source = j.value("source", std::string("gaussian"));
  cfg.n_samples = int_or(j, "n_samples", 10000);
  cfg.seed = seed_or(j, "seed", 0);
  cfg.eps = numbers_or(j, "eps");
  if (cfg.eps.empty())
    cfg.eps = {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5};
  if (cfg.source == "simulation") {
    cfg.grid = parse_grid(require(j, "grid"));
    cfg.coeffs = parse_coefficients(require(j, "coefficients"));
    cfg.obstacle = parse_obstacle(require(j, "obstacle"));
    if (!cfg.grid.cfl_ok())
      throw config_error("grid violates the CFL condition dt <= dx^2/2");
    cfg.coeffs.validate(cfg.grid.T);
    validate_obstacle(cfg.obstacle, cfg.grid.T);
  } else if (cfg.source != "gaussian") {
    throw config_error("concentration: source must be gaussian or simulation");
  }
  cfg.workers = int_or(j, "workers", 1);
  cfg.output_dir = j.value("output_dir", std::string("out"));
  cfg.echo = j;
  return cfg;
}

}  // namespace mrshe
