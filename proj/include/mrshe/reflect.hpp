#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mrshe/obstacle.hpp"

namespace mrshe {

/// Nonnegative reflection increments over interior space-time nodes. Entry
/// (n, j) is the mass pushed at time step n, interior node j (node index
/// j + 1 on the full grid). Boundary nodes never carry mass.
struct ReflectionMeasure {
  int nt = 0;
  int n_interior = 0;
  std::vector<double> dk;  // nt * n_interior, row = time index

  static ReflectionMeasure zeros(int nt, int n_interior);

  std::span<const double> row(int n) const {
    return {dk.data() + static_cast<std::size_t>(n) * n_interior,
            static_cast<std::size_t>(n_interior)};
  }
  std::span<double> row(int n) {
    return {dk.data() + static_cast<std::size_t>(n) * n_interior,
            static_cast<std::size_t>(n_interior)};
  }

  bool all_nonnegative() const;
  /// Plain sum of increments (field units).
  double total_increment() const;
  /// Measure mass: sum of increments times the cell width dx. Comparable
  /// across spatial resolutions.
  double total_mass(double dx) const;
  /// Share of the mass carried by the two interior nodes next to the
  /// boundary; large values indicate boundary-concentrating reflection.
  double boundary_fraction() const;
};

/// Minimal nonnegative push for the linear constraint: with v the obstacle
/// gap at the new time, dk_j = max(0, -(proposal_j + v_j)), so that
/// proposal + dk + v >= 0 with equality wherever dk_j > 0.
std::vector<double> linear_push(std::span<const double> proposal,
                                std::span<const double> obstacle_gap);

/// Strided view of per-particle interior values: value(i, j) =
/// data[i * stride + offset + j].
struct ParticleMatrixView {
  const double* data = nullptr;
  int n_particles = 0;
  std::ptrdiff_t stride = 0;
  std::ptrdiff_t offset = 0;

  double value(int particle, int node) const {
    return data[static_cast<std::size_t>(particle) * stride + offset + node];
  }
};

/// Minimal nonnegative push for the general constraint: per interior node j,
/// the smallest k >= 0 with mean_i h(t_next, x_j, proposal_j + k + v_ij) >= 0,
/// located by bisection inside the bi-Lipschitz bracket
/// [deficit/lip_upper, deficit/lip_lower] to absolute tolerance tol.
///
/// Throws contract_error if the constraint is still unsatisfied at
/// deficit/lip_lower + tol (impossible for a correctly declared h).
std::vector<double> general_push(std::span<const double> proposal,
                                 const ParticleMatrixView& particle_values,
                                 const MeanConstraint& h, double lip_lower,
                                 double lip_upper, double t_next,
                                 std::span<const double> x_interior,
                                 double tol = 1e-12, int workers = 1);

/// Discrete flatness functional: sum over aligned entries of
/// max(0, constraint_after) * dk. Zero when the measure only grows while the
/// constraint binds.
double flatness_residual(std::span<const double> constraint_after,
                         std::span<const double> dk);

}  // namespace mrshe
