// Benchmark comparing the serial reference particle kernel against the
// OpenMP kernel, plus the row sampler that feeds them. Prints throughput per
// configuration and checks that both kernels produce identical bytes.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mrshe/coefficients.hpp"
#include "mrshe/ensemble_kernels.hpp"
#include "mrshe/grid.hpp"
#include "mrshe/noise.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

int main() {
  using namespace mrshe;
  const SpaceTimeGrid grid{0.25, 512, 32};
  const int n_particles = 4000;
  const int steps = 64;

  CoefficientSpec coeffs;
  coeffs.sigma = CoeffFn::constant(1.0);
  coeffs.sigma_bound = 1.0;
  coeffs.u0 = ScalarField::sine(1.0, 1);

  const int nodes = grid.n_nodes();
  std::vector<double> z(static_cast<std::size_t>(n_particles) * nodes, 0.0);
  std::vector<double> z_out(z.size(), 0.0);
  std::vector<double> zbar(static_cast<std::size_t>(nodes), 0.0);
  std::vector<double> noise(static_cast<std::size_t>(n_particles) * grid.nx);

  CounterNoise provider(grid, 42);
  const auto fill_start = std::chrono::steady_clock::now();
  for (int step = 0; step < steps; ++step)
    for (int i = 0; i < n_particles; ++i)
      provider.fill_row(static_cast<std::uint64_t>(i), step,
                        {noise.data() + static_cast<std::size_t>(i) * grid.nx,
                         static_cast<std::size_t>(grid.nx)});
  const double fill_time = seconds_since(fill_start);
  std::printf("noise rows: %.1f M normals/s\n",
              1e-6 * n_particles * grid.nx * steps / fill_time);

  ParticleStepArgs args;
  args.z_in = z.data();
  args.z_out = z_out.data();
  args.zbar = zbar.data();
  args.noise = noise.data();
  args.n_particles = n_particles;
  args.nx = grid.nx;
  args.t = 0.0;
  args.dt = grid.dt();
  args.dx = grid.dx();
  args.coeffs = &coeffs;

  const auto serial_start = std::chrono::steady_clock::now();
  for (int step = 0; step < steps; ++step) advance_particles_serial(args);
  const double serial_time = seconds_since(serial_start);
  std::vector<double> serial_result = z_out;

  int max_workers = 1;
#ifdef _OPENMP
  max_workers = omp_get_max_threads();
#endif
  for (int workers = 1; workers <= max_workers; workers *= 2) {
    std::fill(z_out.begin(), z_out.end(), 0.0);
    const auto start = std::chrono::steady_clock::now();
    for (int step = 0; step < steps; ++step)
      advance_particles_omp(args, workers);
    const double elapsed = seconds_since(start);
    const bool identical =
        std::memcmp(z_out.data(), serial_result.data(),
                    z_out.size() * sizeof(double)) == 0;
    std::printf(
        "particles: serial %.1f M node-updates/s | omp(%d) %.1f M (%.2fx) | "
        "bitwise %s\n",
        1e-6 * n_particles * (grid.nx - 1) * steps / serial_time, workers,
        1e-6 * n_particles * (grid.nx - 1) * steps / elapsed,
        serial_time / elapsed, identical ? "identical" : "DIFFERENT");
    if (!identical) return 1;
  }
  return 0;
}
