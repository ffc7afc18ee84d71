#pragma once

#include "mrshe/coefficients.hpp"
#include "mrshe/grid.hpp"

namespace mrshe {

/// One explicit Euler step for a block of particles.
///
/// Per particle i and interior node j:
///   z_out[j] = z[j] + dt (z[j-1] - 2 z[j] + z[j+1]) / dx^2
///            - dt f(t, x_j, u[j]) + sigma(t, x_j, u[j]) dW[i][j] / dx
///            + dt sigma(t, x_j, u[j]) g[j]            (drift_row optional)
/// with u = z + zbar evaluated before the step; boundary nodes are forced to
/// exact 0. noise holds one row of nx cell increments per particle; node j
/// reads cell j.
struct ParticleStepArgs {
  const double* z_in = nullptr;   // n_particles * (nx + 1)
  double* z_out = nullptr;        // n_particles * (nx + 1)
  const double* zbar = nullptr;   // nx + 1
  const double* noise = nullptr;  // n_particles * nx
  const double* drift_row = nullptr;  // nx, or nullptr
  int n_particles = 0;
  int nx = 0;
  double t = 0.0;
  double dt = 0.0;
  double dx = 0.0;
  const CoefficientSpec* coeffs = nullptr;
};

/// Plain reference implementation; kept for testing the parallel kernel.
void advance_particles_serial(const ParticleStepArgs& args);

/// OpenMP kernel. Particles write disjoint slots, so the result is required
/// to match the serial reference bit for bit at any worker count.
void advance_particles_omp(const ParticleStepArgs& args, int workers);

}  // namespace mrshe
