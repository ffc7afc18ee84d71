#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mrshe/coefficients.hpp"
#include "mrshe/grid.hpp"
#include "mrshe/kernel.hpp"
#include "mrshe/noise.hpp"
#include "mrshe/obstacle.hpp"
#include "mrshe/reflect.hpp"

namespace mrshe {

/// N particle fields z_i plus the shared deterministic field zbar and the
/// accumulated reflection measure; a particle's solution is u_i = z_i + zbar.
struct Ensemble {
  int n_particles = 0;
  int n_nodes = 0;  // nx + 1
  std::vector<double> z;        // n_particles * n_nodes
  std::vector<double> z_next;   // scratch, same shape
  std::vector<double> zbar;     // n_nodes
  ReflectionMeasure k;
  int t_index = 0;

  std::span<const double> particle(int i) const {
    return {z.data() + static_cast<std::size_t>(i) * n_nodes,
            static_cast<std::size_t>(n_nodes)};
  }
  double solution_at(int particle_index, int node) const {
    return z[static_cast<std::size_t>(particle_index) * n_nodes + node] +
           zbar[static_cast<std::size_t>(node)];
  }
};

Ensemble make_ensemble(const SpaceTimeGrid& grid, const CoefficientSpec& coeffs,
                       int n_particles);

struct StepInputs {
  std::span<const double> noise_rows;   // n_particles * nx cell increments
  std::span<const double> drift_row;    // nx values, or empty
  std::span<const double> fixed_k_row;  // n_interior values, or empty
  int workers = 1;
  bool use_serial_reference = false;
  bool allow_unstable = false;
  double push_tol = 1e-12;
};

/// Advances the ensemble one step: per-particle stochastic heat update, free
/// heat step for zbar, minimal push (or the supplied fixed increments), exact
/// zero boundaries. Returns the applied increment row and appends it to the
/// ensemble's measure.
std::vector<double> fd_step(Ensemble& ens, const SpaceTimeGrid& grid,
                            const CoefficientSpec& coeffs,
                            const ObstacleSpec& obstacle,
                            const StepInputs& inputs);

struct Snapshot {
  int step = 0;
  double t = 0.0;
  std::vector<double> mean_field;  // ensemble mean of u over nodes
};

struct Trajectory {
  SpaceTimeGrid grid;
  std::vector<Snapshot> snapshots;
  ReflectionMeasure k;
  std::vector<double> constraint_after;  // nt * n_interior diagnostic values
  std::vector<double> zbar_history;      // (nt+1) * (nx+1) when recorded
  std::vector<double> particle_sup;      // per-particle sup |u_i| over the run
  double flatness = 0.0;                 // flatness residual of the run
  double min_constraint = 0.0;  // most negative recorded constraint value
  double mean_sup_sq = 0.0;     // ensemble mean of (sup |u_i|)^2
  double total_k_increment = 0.0;
  double total_k_mass = 0.0;
  double k_boundary_fraction = 0.0;
  bool boundary_concentration_flag = false;

  std::span<const double> zbar_at(int step) const {
    const auto nodes = static_cast<std::size_t>(grid.n_nodes());
    return {zbar_history.data() + static_cast<std::size_t>(step) * nodes, nodes};
  }
};

struct SolveOptions {
  int n_particles = 1;
  std::uint64_t seed = 0;
  const DriftField* drift = nullptr;          // adds dt sigma g per particle
  const ReflectionMeasure* fixed_k = nullptr; // skip pushes, replay increments
  std::vector<double> snapshot_times;
  int workers = 1;
  const NoiseProvider* noise = nullptr;  // default: fresh counter-based rows
  bool record_zbar_history = false;
  bool allow_unstable = false;
  bool use_serial_reference = false;
  double push_tol = 1e-12;
};

/// Runs fd_step over the whole grid and assembles diagnostics. Output is a
/// pure function of (grid, coeffs, obstacle, options) independent of worker
/// count.
Trajectory solve_mean_reflected(const SpaceTimeGrid& grid,
                                const CoefficientSpec& coeffs,
                                const ObstacleSpec& obstacle,
                                const SolveOptions& options);

/// Mild-form cross-check at small scale (nx <= 32, nt <= 64): direct kernel
/// quadrature of the variation-of-constants formula with the same discrete
/// noise, no reflection. Returns the field history, one row per time node.
struct MildSolution {
  SpaceTimeGrid grid;
  std::vector<double> history;  // (nt+1) * (nx+1)

  std::span<const double> at(int step) const {
    const auto nodes = static_cast<std::size_t>(grid.n_nodes());
    return {history.data() + static_cast<std::size_t>(step) * nodes, nodes};
  }
};

MildSolution mild_solve_small(const SpaceTimeGrid& grid,
                              const CoefficientSpec& coeffs,
                              const NoiseSheet& sheet,
                              const HeatKernelConfig& kernel_cfg);

/// Deterministic obstacle evolution: heat flow plus minimal push against a
/// known deterministic field v(t, x) standing in for the ensemble. Used for
/// comparison experiments where the expectation is exact.
struct ObstacleEvolution {
  SpaceTimeGrid grid;
  std::vector<double> zbar_history;  // (nt+1) * (nx+1)
  ReflectionMeasure k;

  std::span<const double> at(int step) const {
    const auto nodes = static_cast<std::size_t>(grid.n_nodes());
    return {zbar_history.data() + static_cast<std::size_t>(step) * nodes, nodes};
  }
  double sup_abs() const;
};

ObstacleEvolution solve_obstacle_deterministic(
    const SpaceTimeGrid& grid, const std::function<double(double, double)>& v,
    const ObstacleSpec& obstacle, double push_tol = 1e-12);

}  // namespace mrshe
