#include "mrshe/solver.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mrshe/ensemble_kernels.hpp"
#include "mrshe/errors.hpp"
#include "mrshe/pairwise.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mrshe {

namespace {

// Free heat step for the shared field: proposal = zbar + dt * Laplacian(zbar),
// interior nodes only, boundaries pinned to 0.
std::vector<double> heat_proposal(std::span<const double> zbar,
                                  const SpaceTimeGrid& grid) {
  const double dt = grid.dt();
  const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());
  std::vector<double> proposal(zbar.size(), 0.0);
  for (int j = 1; j < grid.nx; ++j) {
    const auto sj = static_cast<std::size_t>(j);
    proposal[sj] = zbar[sj] +
                   dt * (zbar[sj - 1] - 2.0 * zbar[sj] + zbar[sj + 1]) * inv_dx2;
  }
  return proposal;
}

// Ensemble mean of the new z over one interior node, fixed reduction order.
double interior_mean(const std::vector<double>& z, int n_particles, int n_nodes,
                     int node) {
  return pairwise_sum_strided(z.data() + node,
                              static_cast<std::size_t>(n_particles),
                              static_cast<std::size_t>(n_nodes)) /
         static_cast<double>(n_particles);
}

}  // namespace

Ensemble make_ensemble(const SpaceTimeGrid& grid, const CoefficientSpec& coeffs,
                       int n_particles) {
  if (n_particles < 1) throw config_error("ensemble: need n_particles >= 1");
  Ensemble ens;
  ens.n_particles = n_particles;
  ens.n_nodes = grid.n_nodes();
  const std::vector<double> u0 = coeffs.sample_u0(grid);
  ens.z.resize(static_cast<std::size_t>(n_particles) * ens.n_nodes);
  for (int i = 0; i < n_particles; ++i)
    std::copy(u0.begin(), u0.end(),
              ens.z.begin() + static_cast<std::size_t>(i) * ens.n_nodes);
  ens.z_next.assign(ens.z.size(), 0.0);
  ens.zbar.assign(static_cast<std::size_t>(ens.n_nodes), 0.0);
  ens.k = ReflectionMeasure::zeros(0, grid.n_interior());
  return ens;
}

std::vector<double> fd_step(Ensemble& ens, const SpaceTimeGrid& grid,
                            const CoefficientSpec& coeffs,
                            const ObstacleSpec& obstacle,
                            const StepInputs& inputs) {
  if (!grid.cfl_ok() && !inputs.allow_unstable)
    throw config_error("fd_step: CFL condition dt <= dx^2/2 violated");
  if (inputs.noise_rows.size() !=
      static_cast<std::size_t>(ens.n_particles) * grid.nx)
    throw contract_error("fd_step: noise row block has the wrong shape");
  if (!inputs.drift_row.empty() &&
      inputs.drift_row.size() != static_cast<std::size_t>(grid.nx))
    throw contract_error("fd_step: drift row has the wrong length");
  if (!inputs.fixed_k_row.empty() &&
      inputs.fixed_k_row.size() != static_cast<std::size_t>(grid.n_interior()))
    throw contract_error("fd_step: fixed k row has the wrong length");

  const int n = ens.t_index;
  const double t_now = grid.time_at(n);
  const double t_next = grid.time_at(n + 1);
  const int m = grid.n_interior();

  ParticleStepArgs args;
  args.z_in = ens.z.data();
  args.z_out = ens.z_next.data();
  args.zbar = ens.zbar.data();
  args.noise = inputs.noise_rows.data();
  args.drift_row = inputs.drift_row.empty() ? nullptr : inputs.drift_row.data();
  args.n_particles = ens.n_particles;
  args.nx = grid.nx;
  args.t = t_now;
  args.dt = grid.dt();
  args.dx = grid.dx();
  args.coeffs = &coeffs;
  if (inputs.use_serial_reference)
    advance_particles_serial(args);
  else
    advance_particles_omp(args, inputs.workers);

  const std::vector<double> proposal = heat_proposal(ens.zbar, grid);
  const std::span<const double> proposal_interior{proposal.data() + 1,
                                                  static_cast<std::size_t>(m)};

  std::vector<double> dk;
  if (!inputs.fixed_k_row.empty()) {
    dk.assign(inputs.fixed_k_row.begin(), inputs.fixed_k_row.end());
  } else if (const auto* lin = std::get_if<LinearObstacle>(&obstacle)) {
    std::vector<double> gap(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
      const double mean_z =
          interior_mean(ens.z_next, ens.n_particles, ens.n_nodes, j + 1);
      if (!std::isfinite(mean_z))
        throw blowup_error("fd_step: non-finite ensemble mean", n);
      gap[static_cast<std::size_t>(j)] = mean_z - lin->floor(t_next, grid.x_at(j + 1));
    }
    dk = linear_push(proposal_interior, gap);
  } else {
    const auto& gen = std::get<GeneralObstacle>(obstacle);
    std::vector<double> x_interior(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j)
      x_interior[static_cast<std::size_t>(j)] = grid.x_at(j + 1);
    ParticleMatrixView view{ens.z_next.data(), ens.n_particles, ens.n_nodes, 1};
    dk = general_push(proposal_interior, view, gen.h, gen.lip_lower,
                      gen.lip_upper, t_next, x_interior, inputs.push_tol,
                      inputs.workers);
  }

  for (int j = 1; j < grid.nx; ++j) {
    const double v = proposal[static_cast<std::size_t>(j)] +
                     dk[static_cast<std::size_t>(j - 1)];
    if (!std::isfinite(v))
      throw blowup_error("fd_step: non-finite shared field", n);
    ens.zbar[static_cast<std::size_t>(j)] = v;
  }
  ens.zbar.front() = 0.0;
  ens.zbar.back() = 0.0;

  ens.k.dk.insert(ens.k.dk.end(), dk.begin(), dk.end());
  ens.k.nt += 1;
  std::swap(ens.z, ens.z_next);
  ens.t_index += 1;
  return dk;
}

namespace {

std::vector<int> snapshot_steps(const SpaceTimeGrid& grid,
                                const std::vector<double>& times) {
  std::set<int> steps;
  for (double t : times) {
    const double raw = t / grid.dt();
    const int step = static_cast<int>(std::lround(raw));
    if (step < 0 || step > grid.nt ||
        std::abs(grid.time_at(step) - t) > 1e-9 * std::max(1.0, grid.T))
      throw config_error("snapshot times must be a subset of grid times");
    steps.insert(step);
  }
  return {steps.begin(), steps.end()};
}

Snapshot take_snapshot(const Ensemble& ens, const SpaceTimeGrid& grid,
                       int step) {
  Snapshot snap;
  snap.step = step;
  snap.t = grid.time_at(step);
  snap.mean_field.resize(static_cast<std::size_t>(ens.n_nodes));
  for (int node = 0; node < ens.n_nodes; ++node)
    snap.mean_field[static_cast<std::size_t>(node)] =
        interior_mean(ens.z, ens.n_particles, ens.n_nodes, node) +
        ens.zbar[static_cast<std::size_t>(node)];
  return snap;
}

}  // namespace

Trajectory solve_mean_reflected(const SpaceTimeGrid& grid,
                                const CoefficientSpec& coeffs,
                                const ObstacleSpec& obstacle,
                                const SolveOptions& options) {
  grid.validate();
  if (!grid.cfl_ok() && !options.allow_unstable)
    throw config_error("solver: CFL condition dt <= dx^2/2 violated");
  if (options.fixed_k != nullptr &&
      (options.fixed_k->nt != grid.nt ||
       options.fixed_k->n_interior != grid.n_interior()))
    throw contract_error("solver: fixed reflection measure does not match the grid");
  if (options.drift != nullptr) options.drift->check_compatible(grid);

  const int N = options.n_particles;
  const int m = grid.n_interior();
  Ensemble ens = make_ensemble(grid, coeffs, N);
  ens.k.dk.reserve(static_cast<std::size_t>(grid.nt) * m);

  CounterNoise default_noise(grid, options.seed);
  const NoiseProvider& noise =
      options.noise != nullptr ? *options.noise : default_noise;

  const std::vector<int> snaps = snapshot_steps(grid, options.snapshot_times);
  std::size_t snap_cursor = 0;

  Trajectory traj;
  traj.grid = grid;
  traj.constraint_after.assign(static_cast<std::size_t>(grid.nt) * m, 0.0);
  if (options.record_zbar_history)
    traj.zbar_history.assign(
        static_cast<std::size_t>(grid.nt + 1) * grid.n_nodes(), 0.0);

  // Per-particle running sup of |u_i| starts at the initial field.
  std::vector<double> sup(static_cast<std::size_t>(N), 0.0);
  for (int i = 0; i < N; ++i) {
    double s = 0.0;
    const auto zi = ens.particle(i);
    for (int node = 0; node < ens.n_nodes; ++node)
      s = std::max(s, std::abs(zi[static_cast<std::size_t>(node)]));
    sup[static_cast<std::size_t>(i)] = s;
  }

  if (snap_cursor < snaps.size() && snaps[snap_cursor] == 0) {
    traj.snapshots.push_back(take_snapshot(ens, grid, 0));
    ++snap_cursor;
  }

  std::vector<double> noise_rows(static_cast<std::size_t>(N) * grid.nx);
  std::vector<double> drift_row;
  const bool constant_drift =
      options.drift != nullptr && options.drift->is_constant();
  if (constant_drift)
    drift_row.assign(static_cast<std::size_t>(grid.nx),
                     options.drift->constant_value());

  double min_constraint = 0.0;
  std::vector<unsigned char> bad(static_cast<std::size_t>(N), 0);

  for (int n = 0; n < grid.nt; ++n) {
    const int workers = options.workers > 0 ? options.workers : 1;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers)
#endif
    for (int i = 0; i < N; ++i)
      noise.fill_row(static_cast<std::uint64_t>(i), n,
                     {noise_rows.data() + static_cast<std::size_t>(i) * grid.nx,
                      static_cast<std::size_t>(grid.nx)});

    if (options.drift != nullptr && !constant_drift) {
      drift_row.resize(static_cast<std::size_t>(grid.nx));
      for (int j = 0; j < grid.nx; ++j)
        drift_row[static_cast<std::size_t>(j)] = options.drift->at(n, j);
    }

    StepInputs inputs;
    inputs.noise_rows = noise_rows;
    if (options.drift != nullptr) inputs.drift_row = drift_row;
    if (options.fixed_k != nullptr) inputs.fixed_k_row = options.fixed_k->row(n);
    inputs.workers = workers;
    inputs.use_serial_reference = options.use_serial_reference;
    inputs.push_tol = options.push_tol;
    inputs.allow_unstable = options.allow_unstable;
    fd_step(ens, grid, coeffs, obstacle, inputs);

    // Constraint diagnostic after the push, recorded at every step.
    const double t_next = grid.time_at(n + 1);
    double* row = traj.constraint_after.data() + static_cast<std::size_t>(n) * m;
    if (const auto* lin = std::get_if<LinearObstacle>(&obstacle)) {
      for (int j = 0; j < m; ++j) {
        const double mean_u =
            interior_mean(ens.z, N, ens.n_nodes, j + 1) +
            ens.zbar[static_cast<std::size_t>(j + 1)];
        row[j] = mean_u - lin->floor(t_next, grid.x_at(j + 1));
      }
    } else {
      const auto& gen = std::get<GeneralObstacle>(obstacle);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers)
#endif
      for (int j = 0; j < m; ++j) {
        const double x = grid.x_at(j + 1);
        const double zbar_j = ens.zbar[static_cast<std::size_t>(j + 1)];
        row[j] = pairwise_sum_of(
                     static_cast<std::size_t>(N),
                     [&](std::size_t i) {
                       return gen.h(t_next, x,
                                    ens.z[i * ens.n_nodes + j + 1] + zbar_j);
                     }) /
                 static_cast<double>(N);
      }
    }
    for (int j = 0; j < m; ++j) min_constraint = std::min(min_constraint, row[j]);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers)
#endif
    for (int i = 0; i < N; ++i) {
      double s = sup[static_cast<std::size_t>(i)];
      const double* zi = ens.z.data() + static_cast<std::size_t>(i) * ens.n_nodes;
      for (int node = 0; node < ens.n_nodes; ++node)
        s = std::max(s, std::abs(zi[node] + ens.zbar[static_cast<std::size_t>(node)]));
      sup[static_cast<std::size_t>(i)] = s;
      if (!std::isfinite(s)) bad[static_cast<std::size_t>(i)] = 1;
    }
    for (int i = 0; i < N; ++i)
      if (bad[static_cast<std::size_t>(i)])
        throw blowup_error("solver: particle state became non-finite", n);

    if (options.record_zbar_history)
      std::copy(ens.zbar.begin(), ens.zbar.end(),
                traj.zbar_history.begin() +
                    static_cast<std::size_t>(n + 1) * grid.n_nodes());

    if (snap_cursor < snaps.size() && snaps[snap_cursor] == n + 1) {
      traj.snapshots.push_back(take_snapshot(ens, grid, n + 1));
      ++snap_cursor;
    }
  }

  traj.k = std::move(ens.k);
  traj.particle_sup = std::move(sup);
  traj.flatness = flatness_residual(traj.constraint_after, traj.k.dk);
  traj.min_constraint = min_constraint;
  traj.mean_sup_sq =
      pairwise_sum_of(traj.particle_sup.size(),
                      [&](std::size_t i) {
                        return traj.particle_sup[i] * traj.particle_sup[i];
                      }) /
      static_cast<double>(N);
  traj.total_k_increment = traj.k.total_increment();
  traj.total_k_mass = traj.k.total_mass(grid.dx());
  traj.k_boundary_fraction = traj.k.boundary_fraction();
  traj.boundary_concentration_flag = traj.k_boundary_fraction > 0.25;
  return traj;
}

MildSolution mild_solve_small(const SpaceTimeGrid& grid,
                              const CoefficientSpec& coeffs,
                              const NoiseSheet& sheet,
                              const HeatKernelConfig& kernel_cfg) {
  if (grid.nx > 32 || grid.nt > 64)
    throw config_error("mild_solve_small: cross-check scale is nx <= 32, nt <= 64");
  if (sheet.nt != grid.nt || sheet.nx != grid.nx)
    throw contract_error("mild_solve_small: sheet does not match the grid");
  const int m = grid.n_interior();
  const int nodes = grid.n_nodes();
  const double dx = grid.dx();
  const double dt = grid.dt();

  // Kernel matrices for every time gap, interior nodes only.
  std::vector<double> kernels(static_cast<std::size_t>(grid.nt) * m * m);
  for (int gap = 1; gap <= grid.nt; ++gap) {
    const double t_gap = grid.T * gap / grid.nt;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        kernels[(static_cast<std::size_t>(gap - 1) * m + i) * m + j] =
            eval_kernel(t_gap, grid.x_at(i + 1), grid.x_at(j + 1), kernel_cfg);
  }
  auto kernel_at = [&](int gap, int i, int j) {
    return kernels[(static_cast<std::size_t>(gap - 1) * m + i) * m + j];
  };

  MildSolution mild;
  mild.grid = grid;
  mild.history.assign(static_cast<std::size_t>(grid.nt + 1) * nodes, 0.0);
  const std::vector<double> u0 = coeffs.sample_u0(grid);
  std::copy(u0.begin(), u0.end(), mild.history.begin());

  for (int step = 1; step <= grid.nt; ++step) {
    double* target = mild.history.data() + static_cast<std::size_t>(step) * nodes;
    for (int i = 0; i < m; ++i) {
      // Initial-data term.
      double acc = 0.0;
      for (int j = 0; j < m; ++j)
        acc += dx * kernel_at(step, i, j) * u0[static_cast<std::size_t>(j + 1)];
      // Drift and noise terms, left-endpoint evaluation in time. Cell j of
      // the sheet drives node j, matching the finite-difference convention.
      for (int k = 0; k < step; ++k) {
        const double tk = grid.time_at(k);
        const double* past =
            mild.history.data() + static_cast<std::size_t>(k) * nodes;
        for (int j = 0; j < m; ++j) {
          const double x = grid.x_at(j + 1);
          const double g = kernel_at(step - k, i, j);
          const double u_past = past[j + 1];
          acc -= dt * dx * g * coeffs.f(tk, x, u_past);
          acc += g * coeffs.sigma(tk, x, u_past) * sheet.at(k, j + 1);
        }
      }
      target[i + 1] = acc;
    }
    target[0] = 0.0;
    target[nodes - 1] = 0.0;
  }
  return mild;
}

double ObstacleEvolution::sup_abs() const {
  double s = 0.0;
  for (double v : zbar_history) s = std::max(s, std::abs(v));
  return s;
}

ObstacleEvolution solve_obstacle_deterministic(
    const SpaceTimeGrid& grid, const std::function<double(double, double)>& v,
    const ObstacleSpec& obstacle, double push_tol) {
  grid.validate();
  if (!grid.cfl_ok())
    throw config_error("obstacle evolution: CFL condition violated");
  const int m = grid.n_interior();
  const int nodes = grid.n_nodes();
  ObstacleEvolution evo;
  evo.grid = grid;
  evo.zbar_history.assign(static_cast<std::size_t>(grid.nt + 1) * nodes, 0.0);
  evo.k = ReflectionMeasure::zeros(grid.nt, m);

  std::vector<double> zbar(static_cast<std::size_t>(nodes), 0.0);
  std::vector<double> v_row(static_cast<std::size_t>(m));
  for (int n = 0; n < grid.nt; ++n) {
    const double t_next = grid.time_at(n + 1);
    std::vector<double> proposal = heat_proposal(zbar, grid);
    const std::span<const double> proposal_interior{
        proposal.data() + 1, static_cast<std::size_t>(m)};
    for (int j = 0; j < m; ++j)
      v_row[static_cast<std::size_t>(j)] = v(t_next, grid.x_at(j + 1));

    std::vector<double> dk;
    if (const auto* lin = std::get_if<LinearObstacle>(&obstacle)) {
      std::vector<double> gap(static_cast<std::size_t>(m));
      for (int j = 0; j < m; ++j)
        gap[static_cast<std::size_t>(j)] =
            v_row[static_cast<std::size_t>(j)] -
            lin->floor(t_next, grid.x_at(j + 1));
      dk = linear_push(proposal_interior, gap);
    } else {
      const auto& gen = std::get<GeneralObstacle>(obstacle);
      std::vector<double> x_interior(static_cast<std::size_t>(m));
      for (int j = 0; j < m; ++j)
        x_interior[static_cast<std::size_t>(j)] = grid.x_at(j + 1);
      ParticleMatrixView view{v_row.data(), 1,
                              static_cast<std::ptrdiff_t>(m), 0};
      dk = general_push(proposal_interior, view, gen.h, gen.lip_lower,
                        gen.lip_upper, t_next, x_interior, push_tol, 1);
    }

    for (int j = 1; j < grid.nx; ++j)
      zbar[static_cast<std::size_t>(j)] =
          proposal[static_cast<std::size_t>(j)] + dk[static_cast<std::size_t>(j - 1)];
    zbar.front() = 0.0;
    zbar.back() = 0.0;
    std::copy(dk.begin(), dk.end(), evo.k.row(n).begin());
    std::copy(zbar.begin(), zbar.end(),
              evo.zbar_history.begin() + static_cast<std::size_t>(n + 1) * nodes);
  }
  return evo;
}

}  // namespace mrshe
