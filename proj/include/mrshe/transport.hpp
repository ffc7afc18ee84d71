#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mrshe/coefficients.hpp"
#include "mrshe/constants.hpp"
#include "mrshe/grid.hpp"
#include "mrshe/noise.hpp"
#include "mrshe/obstacle.hpp"
#include "mrshe/solver.hpp"

namespace mrshe {

/// Empirical quadratic Wasserstein distance between two equal-size sample
/// sets: the sorted (quantile) coupling is optimal in one dimension.
double w2_quantile_1d(std::span<const double> a, std::span<const double> b);

/// Outcome of the coupled two-leg experiment.
struct CouplingReport {
  double entropy_h = 0.0;   // relative entropy of the drifted law
  double dist_sq = 0.0;     // mean over pairs of (sup |u - u_twin|)^2
  double dist_sq_se = 0.0;  // plain standard error of that mean
  double dist_sq_boot_se = 0.0;  // bootstrap standard error (200 resamples)
  double w2_marginal = 0.0;      // quantile W2 of the chosen marginal
  double w2_sq_log_boot_se = 0.0;  // bootstrap SE of log(w2^2)

  double log_c1 = 0.0;
  std::optional<double> log_c2;

  // Log-domain slack of each link of the chain; positive margins mean the
  // bound holds.
  double log_margin_dist = 0.0;      // log(2 C1 H) - log(dist_sq)
  double log_margin_marginal = 0.0;  // log(2 C1 H) - log(w2^2)
  double log_margin_projection = 0.0;  // log(dist_sq) - log(w2^2)

  int n_pairs = 0;
  std::uint64_t seed = 0;
  SpaceTimeGrid grid;
  double marginal_t = 0.0, marginal_x = 0.0;
  int marginal_step = 0, marginal_node = 0;

  // Stage-1 diagnostics (the drift-free ensemble that fixes the measure).
  double stage1_flatness = 0.0;
  double stage1_min_constraint = 0.0;
  double stage1_total_k_mass = 0.0;

  // Drifted-leg constraint diagnostic over snapshot times; reported without
  // asserting a sign (the drifted law need not satisfy the constraint).
  double drifted_constraint_min = 0.0;

  std::vector<double> marginal_u;       // per-pair marginal of the drifted leg
  std::vector<double> marginal_u_twin;  // per-pair marginal of the drift-free leg
  std::vector<double> dist_sq_samples;  // per-pair squared sup distances
};

struct CouplingOptions {
  int n_pairs = 100;
  std::uint64_t seed = 0;
  double marginal_t = 0.0;  // defaults to the horizon when 0
  double marginal_x = 0.5;
  int workers = 1;
  std::vector<double> snapshot_times;  // for the drifted-leg diagnostic
  double push_tol = 1e-12;
};

/// Builds the coupling: stage 1 runs the drift-free ensemble to fix the
/// deterministic reflection measure; stage 2 runs, for every pair, one
/// drift-free and one drifted leg on a shared fresh sheet with that measure
/// replayed, and records the squared sup-norm distance plus marginal samples.
CouplingReport run_coupling(const SpaceTimeGrid& grid,
                            const CoefficientSpec& coeffs,
                            const ObstacleSpec& obstacle, const DriftField& g,
                            const CouplingOptions& options);

struct MarginalCheck {
  bool pass = false;
  double w2 = 0.0;
  double log_lhs = 0.0;      // log(w2^2)
  double log_rhs = 0.0;      // log(2 C1 H)
  double boot_se_log = 0.0;  // bootstrap SE of log(w2^2)
  double log_margin = 0.0;   // rhs - lhs
};

/// Checks log(w2^2) <= log(2 C1 H) + 3 bootstrap standard errors for the
/// marginal samples of a coupling run. A zero distance passes outright.
MarginalCheck t2_marginal_check(std::span<const double> u_samples,
                                std::span<const double> twin_samples,
                                double log_c1_value, double entropy_h,
                                std::uint64_t boot_seed);

struct TailRow {
  double eps = 0.0;
  double tail = 0.0;  // empirical P(F > median + eps)
  double se = 0.0;    // binomial standard error
};

struct ConcentrationProfileResult {
  std::vector<TailRow> rows;
  double median = 0.0;
  double fitted_slope = 0.0;  // least-squares slope of log tail vs eps^2
  int n_fit_points = 0;       // rows with a strictly positive tail
  int n_samples = 0;
};

/// Empirical complementary tails of sample values around their median, with a
/// diagnostic log-tail slope fit. A report, not an assertion: no numerical
/// concentration constants are pinned for these functionals.
ConcentrationProfileResult concentration_profile(
    std::span<const double> samples, std::span<const double> eps_list);

/// Bootstrap standard error of the mean under 200 deterministic resamples.
double bootstrap_se_mean(std::span<const double> samples, std::uint64_t seed);

}  // namespace mrshe
