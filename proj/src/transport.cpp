#include "mrshe/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mrshe/ensemble_kernels.hpp"
#include "mrshe/errors.hpp"
#include "mrshe/pairwise.hpp"
#include "mrshe/philox.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mrshe {

namespace {

// Stream id blocks keep stage-1 particles, stage-2 pair sheets and bootstrap
// draws on disjoint counter ranges of the same seed.
constexpr std::uint64_t kPairStreamBase = 1ULL << 40;
constexpr std::uint64_t kBootstrapStreamBase = 1ULL << 41;

constexpr int kBootstrapResamples = 200;

double sample_sd(std::span<const double> values, double mean) {
  if (values.size() < 2) return 0.0;
  const double ss = pairwise_sum_of(values.size(), [&](std::size_t i) {
    const double d = values[i] - mean;
    return d * d;
  });
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace

double w2_quantile_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || a.size() != b.size())
    throw contract_error("w2_quantile_1d: need equal nonempty sample counts");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double mean_sq = pairwise_sum_of(sa.size(), [&](std::size_t i) {
                           const double d = sa[i] - sb[i];
                           return d * d;
                         }) /
                         static_cast<double>(sa.size());
  return std::sqrt(mean_sq);
}

double bootstrap_se_mean(std::span<const double> samples, std::uint64_t seed) {
  if (samples.size() < 2) return 0.0;
  const std::size_t n = samples.size();
  std::vector<double> means(kBootstrapResamples);
  for (int r = 0; r < kBootstrapResamples; ++r) {
    const std::uint64_t stream = kBootstrapStreamBase + static_cast<std::uint64_t>(r);
    means[static_cast<std::size_t>(r)] = pairwise_sum_of(n, [&](std::size_t i) {
                                           return samples[uniform_index_at(
                                               seed, stream, i, n)];
                                         }) /
                                         static_cast<double>(n);
  }
  const double mean = pairwise_mean(means);
  double ss = 0.0;
  for (double v : means) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (means.size() - 1));
}

namespace {

struct PairResult {
  double sup_diff = 0.0;
  double marginal_drifted = 0.0;
  double marginal_free = 0.0;
};

// Steps the drifted and drift-free legs in lockstep on one shared sheet,
// replaying the stage-1 measure through the precomputed zbar history. The
// shared field cancels in the difference, so only the z parts are tracked.
PairResult run_pair(const SpaceTimeGrid& grid, const CoefficientSpec& coeffs,
                    const Trajectory& stage1, const DriftField& g,
                    const NoiseProvider& noise, std::uint64_t stream,
                    int marginal_node, const std::vector<int>& snapshot_steps,
                    double* snapshot_out) {
  const int nodes = grid.n_nodes();
  std::vector<double> z_drift(coeffs.sample_u0(grid));
  std::vector<double> z_free(z_drift);
  std::vector<double> z_drift_next(static_cast<std::size_t>(nodes), 0.0);
  std::vector<double> z_free_next(static_cast<std::size_t>(nodes), 0.0);
  std::vector<double> noise_row(static_cast<std::size_t>(grid.nx));
  std::vector<double> drift_row(static_cast<std::size_t>(grid.nx));

  double sup = 0.0;
  std::size_t snap_cursor = 0;
  for (int n = 0; n < grid.nt; ++n) {
    noise.fill_row(stream, n, noise_row);
    for (int j = 0; j < grid.nx; ++j)
      drift_row[static_cast<std::size_t>(j)] = g.at(n, j);

    ParticleStepArgs args;
    args.zbar = stage1.zbar_at(n).data();
    args.noise = noise_row.data();
    args.n_particles = 1;
    args.nx = grid.nx;
    args.t = grid.time_at(n);
    args.dt = grid.dt();
    args.dx = grid.dx();
    args.coeffs = &coeffs;

    args.z_in = z_drift.data();
    args.z_out = z_drift_next.data();
    args.drift_row = drift_row.data();
    advance_particles_serial(args);

    args.z_in = z_free.data();
    args.z_out = z_free_next.data();
    args.drift_row = nullptr;
    advance_particles_serial(args);

    std::swap(z_drift, z_drift_next);
    std::swap(z_free, z_free_next);

    for (int node = 1; node < grid.nx; ++node) {
      const double d = std::abs(z_drift[static_cast<std::size_t>(node)] -
                                z_free[static_cast<std::size_t>(node)]);
      sup = std::max(sup, d);
    }
    if (!std::isfinite(sup))
      throw blowup_error("run_coupling: pair leg became non-finite", n);

    if (snap_cursor < snapshot_steps.size() &&
        snapshot_steps[snap_cursor] == n + 1) {
      const auto zbar = stage1.zbar_at(n + 1);
      for (int node = 0; node < nodes; ++node)
        snapshot_out[snap_cursor * static_cast<std::size_t>(nodes) + node] =
            z_drift[static_cast<std::size_t>(node)] +
            zbar[static_cast<std::size_t>(node)];
      ++snap_cursor;
    }
  }

  const auto zbar_end = stage1.zbar_at(grid.nt);
  PairResult out;
  out.sup_diff = sup;
  out.marginal_drifted = z_drift[static_cast<std::size_t>(marginal_node)] +
                         zbar_end[static_cast<std::size_t>(marginal_node)];
  out.marginal_free = z_free[static_cast<std::size_t>(marginal_node)] +
                      zbar_end[static_cast<std::size_t>(marginal_node)];
  return out;
}

std::vector<int> resolve_snapshot_steps(const SpaceTimeGrid& grid,
                                        const std::vector<double>& times) {
  std::vector<int> steps;
  for (double t : times) {
    const int step = static_cast<int>(std::lround(t / grid.dt()));
    if (step < 1 || step > grid.nt ||
        std::abs(grid.time_at(step) - t) > 1e-9 * std::max(1.0, grid.T))
      throw config_error("coupling snapshot times must be positive grid times");
    steps.push_back(step);
  }
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  return steps;
}

}  // namespace

CouplingReport run_coupling(const SpaceTimeGrid& grid,
                            const CoefficientSpec& coeffs,
                            const ObstacleSpec& obstacle, const DriftField& g,
                            const CouplingOptions& options) {
  grid.validate();
  g.check_compatible(grid);
  if (options.n_pairs < 1) throw config_error("coupling: need n_pairs >= 1");

  CouplingReport report;
  report.n_pairs = options.n_pairs;
  report.seed = options.seed;
  report.grid = grid;

  // Stage 1: the drift-free ensemble fixes the deterministic measure. Its
  // law is the law of the original equation, so the measure it produces is
  // the one both legs must replay. The drift never enters this stage.
  SolveOptions stage1_opts;
  stage1_opts.n_particles = options.n_pairs;
  stage1_opts.seed = options.seed;
  stage1_opts.workers = options.workers;
  stage1_opts.record_zbar_history = true;
  stage1_opts.push_tol = options.push_tol;
  const Trajectory stage1 =
      solve_mean_reflected(grid, coeffs, obstacle, stage1_opts);
  report.stage1_flatness = stage1.flatness;
  report.stage1_min_constraint = stage1.min_constraint;
  report.stage1_total_k_mass = stage1.total_k_mass;

  // Marginal selector snapped to a grid node.
  const double marginal_t =
      options.marginal_t > 0.0 ? options.marginal_t : grid.T;
  const int marginal_step = static_cast<int>(std::lround(marginal_t / grid.dt()));
  if (marginal_step != grid.nt)
    throw config_error("coupling: the marginal time must be the horizon");
  const int marginal_node =
      static_cast<int>(std::lround(options.marginal_x * grid.nx));
  if (marginal_node < 1 || marginal_node > grid.nx - 1)
    throw config_error("coupling: marginal position must be an interior node");
  report.marginal_t = marginal_t;
  report.marginal_x = grid.x_at(marginal_node);
  report.marginal_step = marginal_step;
  report.marginal_node = marginal_node;

  const std::vector<int> snaps =
      resolve_snapshot_steps(grid, options.snapshot_times);
  const int nodes = grid.n_nodes();

  // Stage 2: independent pairs on fresh shared sheets.
  const int P = options.n_pairs;
  std::vector<double> sup_sq(static_cast<std::size_t>(P));
  report.marginal_u.resize(static_cast<std::size_t>(P));
  report.marginal_u_twin.resize(static_cast<std::size_t>(P));
  std::vector<double> snapshot_u(
      static_cast<std::size_t>(P) * snaps.size() * nodes, 0.0);
  CounterNoise pair_noise(grid, options.seed, kPairStreamBase);

  const int workers = options.workers > 0 ? options.workers : 1;
  std::exception_ptr failure = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers)
#endif
  for (int i = 0; i < P; ++i) {
    try {
      const PairResult r =
          run_pair(grid, coeffs, stage1, g, pair_noise,
                   static_cast<std::uint64_t>(i), marginal_node, snaps,
                   snapshot_u.data() +
                       static_cast<std::size_t>(i) * snaps.size() * nodes);
      sup_sq[static_cast<std::size_t>(i)] = r.sup_diff * r.sup_diff;
      report.marginal_u[static_cast<std::size_t>(i)] = r.marginal_drifted;
      report.marginal_u_twin[static_cast<std::size_t>(i)] = r.marginal_free;
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(mrshe_pair_failure)
#endif
      if (failure == nullptr) failure = std::current_exception();
    }
  }
  if (failure != nullptr) std::rethrow_exception(failure);

  report.dist_sq_samples = sup_sq;
  report.dist_sq = pairwise_mean(sup_sq);
  report.dist_sq_se =
      sample_sd(sup_sq, report.dist_sq) / std::sqrt(static_cast<double>(P));
  report.dist_sq_boot_se = bootstrap_se_mean(sup_sq, options.seed);
  report.entropy_h = entropy_of_drift(g, grid);
  report.w2_marginal = w2_quantile_1d(report.marginal_u, report.marginal_u_twin);

  // Drifted-leg constraint diagnostic at the snapshot times.
  double drifted_min = std::numeric_limits<double>::infinity();
  if (!snaps.empty()) {
    for (std::size_t s = 0; s < snaps.size(); ++s) {
      const double t = grid.time_at(snaps[s]);
      for (int node = 1; node < grid.nx; ++node) {
        const double mean_u =
            pairwise_sum_of(static_cast<std::size_t>(P),
                            [&](std::size_t i) {
                              return snapshot_u[(i * snaps.size() + s) * nodes +
                                                node];
                            }) /
            static_cast<double>(P);
        double value;
        if (const auto* lin = std::get_if<LinearObstacle>(&obstacle))
          value = mean_u - lin->floor(t, grid.x_at(node));
        else
          value = std::get<GeneralObstacle>(obstacle).h(t, grid.x_at(node), mean_u);
        drifted_min = std::min(drifted_min, value);
      }
    }
  } else {
    drifted_min = 0.0;
  }
  report.drifted_constraint_min = drifted_min;

  // Constants and log-domain margins.
  ConstantEnv env;
  env.horizon = grid.T;
  env.lipschitz = coeffs.lipschitz_u;
  env.sigma_bound = coeffs.sigma_bound;
  report.log_c1 = log_c1(env);
  if (const auto* gen = std::get_if<GeneralObstacle>(&obstacle)) {
    env.lip_lower = gen->lip_lower;
    env.lip_upper = gen->lip_upper;
    report.log_c2 = log_c2(env);
  }
  const double log_2c1h =
      report.log_c1 + std::log(2.0) + std::log(report.entropy_h);
  report.log_margin_dist = log_2c1h - std::log(report.dist_sq);
  const double log_w2_sq = 2.0 * std::log(report.w2_marginal);
  report.log_margin_marginal = log_2c1h - log_w2_sq;
  report.log_margin_projection = std::log(report.dist_sq) - log_w2_sq;

  // Bootstrap SE of log(w2^2) by resampling pairs jointly.
  if (report.w2_marginal > 0.0) {
    std::vector<double> boot_logs;
    boot_logs.reserve(kBootstrapResamples);
    const std::size_t n = static_cast<std::size_t>(P);
    std::vector<double> ru(n), rt(n);
    for (int r = 0; r < kBootstrapResamples; ++r) {
      const std::uint64_t stream =
          kBootstrapStreamBase + 7919ULL + static_cast<std::uint64_t>(r);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t pick = uniform_index_at(options.seed, stream, i, n);
        ru[i] = report.marginal_u[pick];
        rt[i] = report.marginal_u_twin[pick];
      }
      const double w = w2_quantile_1d(ru, rt);
      if (w > 0.0) boot_logs.push_back(2.0 * std::log(w));
    }
    if (boot_logs.size() > 1) {
      const double mean = pairwise_mean(boot_logs);
      report.w2_sq_log_boot_se = sample_sd(boot_logs, mean);
    }
  }
  return report;
}

MarginalCheck t2_marginal_check(std::span<const double> u_samples,
                                std::span<const double> twin_samples,
                                double log_c1_value, double entropy_h,
                                std::uint64_t boot_seed) {
  MarginalCheck check;
  check.w2 = w2_quantile_1d(u_samples, twin_samples);
  check.log_rhs = log_c1_value + std::log(2.0) + std::log(entropy_h);
  if (check.w2 == 0.0) {
    check.pass = true;
    check.log_lhs = -std::numeric_limits<double>::infinity();
    check.log_margin = std::numeric_limits<double>::infinity();
    return check;
  }
  check.log_lhs = 2.0 * std::log(check.w2);

  const std::size_t n = u_samples.size();
  std::vector<double> boot_logs;
  boot_logs.reserve(kBootstrapResamples);
  std::vector<double> ru(n), rt(n);
  for (int r = 0; r < kBootstrapResamples; ++r) {
    const std::uint64_t stream =
        kBootstrapStreamBase + 104729ULL + static_cast<std::uint64_t>(r);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t pick = uniform_index_at(boot_seed, stream, i, n);
      ru[i] = u_samples[pick];
      rt[i] = twin_samples[pick];
    }
    const double w = w2_quantile_1d(ru, rt);
    if (w > 0.0) boot_logs.push_back(2.0 * std::log(w));
  }
  if (boot_logs.size() > 1) {
    const double mean = pairwise_mean(boot_logs);
    check.boot_se_log = sample_sd(boot_logs, mean);
  }
  check.log_margin = check.log_rhs - check.log_lhs;
  check.pass = check.log_lhs <= check.log_rhs + 3.0 * check.boot_se_log;
  return check;
}

ConcentrationProfileResult concentration_profile(
    std::span<const double> samples, std::span<const double> eps_list) {
  if (samples.size() < 1000)
    throw config_error("concentration_profile: need at least 1000 samples");
  for (double e : eps_list)
    if (!(e > 0.0))
      throw config_error("concentration_profile: eps values must be positive");

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = (n % 2 == 1)
                            ? sorted[n / 2]
                            : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

  ConcentrationProfileResult out;
  out.median = median;
  out.n_samples = static_cast<int>(n);
  for (double eps : eps_list) {
    const double threshold = median + eps;
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), threshold);
    const double count = static_cast<double>(sorted.end() - it);
    const double p = count / static_cast<double>(n);
    TailRow row;
    row.eps = eps;
    row.tail = p;
    row.se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    out.rows.push_back(row);
  }

  // Least-squares fit of log tail against eps^2 over the nonempty tails.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int k = 0;
  for (const TailRow& row : out.rows) {
    if (row.tail <= 0.0) continue;
    const double x = row.eps * row.eps;
    const double y = std::log(row.tail);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++k;
  }
  out.n_fit_points = k;
  if (k >= 2) {
    const double denom = k * sxx - sx * sx;
    out.fitted_slope = denom != 0.0 ? (k * sxy - sx * sy) / denom : 0.0;
  }
  return out;
}

}  // namespace mrshe
