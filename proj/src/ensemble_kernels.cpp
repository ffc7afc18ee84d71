#include "mrshe/ensemble_kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mrshe {

// The two implementations below must keep the same expression tree: the
// bit-for-bit contract between them (and across worker counts) is load
// bearing for reproducibility checks.

void advance_particles_serial(const ParticleStepArgs& a) {
  const int n_nodes = a.nx + 1;
  const double inv_dx2 = 1.0 / (a.dx * a.dx);
  for (int i = 0; i < a.n_particles; ++i) {
    const double* z = a.z_in + static_cast<std::size_t>(i) * n_nodes;
    double* out = a.z_out + static_cast<std::size_t>(i) * n_nodes;
    const double* dw = a.noise + static_cast<std::size_t>(i) * a.nx;
    out[0] = 0.0;
    for (int j = 1; j < a.nx; ++j) {
      const double x = static_cast<double>(j) / a.nx;
      const double u = z[j] + a.zbar[j];
      const double lap = (z[j - 1] - 2.0 * z[j] + z[j + 1]) * inv_dx2;
      const double sig = (*a.coeffs).sigma(a.t, x, u);
      double next = z[j] + a.dt * lap - a.dt * (*a.coeffs).f(a.t, x, u) +
                    sig * dw[j] / a.dx;
      if (a.drift_row != nullptr) next += a.dt * sig * a.drift_row[j];
      out[j] = next;
    }
    out[a.nx] = 0.0;
  }
}

void advance_particles_omp(const ParticleStepArgs& a, int workers) {
#ifdef _OPENMP
  const int n_nodes = a.nx + 1;
  const double inv_dx2 = 1.0 / (a.dx * a.dx);
#pragma omp parallel for schedule(static) num_threads(workers > 0 ? workers : 1)
  for (int i = 0; i < a.n_particles; ++i) {
    const double* z = a.z_in + static_cast<std::size_t>(i) * n_nodes;
    double* out = a.z_out + static_cast<std::size_t>(i) * n_nodes;
    const double* dw = a.noise + static_cast<std::size_t>(i) * a.nx;
    out[0] = 0.0;
    for (int j = 1; j < a.nx; ++j) {
      const double x = static_cast<double>(j) / a.nx;
      const double u = z[j] + a.zbar[j];
      const double lap = (z[j - 1] - 2.0 * z[j] + z[j + 1]) * inv_dx2;
      const double sig = (*a.coeffs).sigma(a.t, x, u);
      double next = z[j] + a.dt * lap - a.dt * (*a.coeffs).f(a.t, x, u) +
                    sig * dw[j] / a.dx;
      if (a.drift_row != nullptr) next += a.dt * sig * a.drift_row[j];
      out[j] = next;
    }
    out[a.nx] = 0.0;
  }
#else
  (void)workers;
  advance_particles_serial(a);
#endif
}

}  // namespace mrshe
