#include "mrshe/reflect.hpp"

#include <cmath>

#include "mrshe/errors.hpp"
#include "mrshe/pairwise.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mrshe {

ReflectionMeasure ReflectionMeasure::zeros(int nt, int n_interior) {
  ReflectionMeasure k;
  k.nt = nt;
  k.n_interior = n_interior;
  k.dk.assign(static_cast<std::size_t>(nt) * n_interior, 0.0);
  return k;
}

bool ReflectionMeasure::all_nonnegative() const {
  for (double v : dk)
    if (v < 0.0) return false;
  return true;
}

double ReflectionMeasure::total_increment() const {
  return pairwise_sum(dk);
}

double ReflectionMeasure::total_mass(double dx) const {
  return total_increment() * dx;
}

double ReflectionMeasure::boundary_fraction() const {
  if (n_interior == 0) return 0.0;
  const double total = total_increment();
  if (total <= 0.0) return 0.0;
  double edge = 0.0;
  for (int n = 0; n < nt; ++n) {
    const auto r = row(n);
    edge += r.front();
    if (n_interior > 1) edge += r.back();
  }
  return edge / total;
}

std::vector<double> linear_push(std::span<const double> proposal,
                                std::span<const double> obstacle_gap) {
  if (proposal.size() != obstacle_gap.size())
    throw contract_error("linear_push: length mismatch");
  std::vector<double> dk(proposal.size());
  for (std::size_t j = 0; j < proposal.size(); ++j) {
    const double slack = proposal[j] + obstacle_gap[j];
    if (std::isnan(slack)) throw data_error("linear_push: NaN input");
    dk[j] = slack < 0.0 ? -slack : 0.0;
  }
  return dk;
}

namespace {

// Ensemble mean of h(t, x, base + k + v_i), fixed summation order.
double mean_constraint_at(const ParticleMatrixView& values,
                          const MeanConstraint& h, double t, double x,
                          double base, int node, double k) {
  const auto n = static_cast<std::size_t>(values.n_particles);
  return pairwise_sum_of(n,
                         [&](std::size_t i) {
                           return h(t, x,
                                    base + k + values.value(static_cast<int>(i), node));
                         }) /
         static_cast<double>(n);
}

double solve_node_push(const ParticleMatrixView& values,
                       const MeanConstraint& h, double t, double x,
                       double base, int node, double lip_lower,
                       double lip_upper, double tol) {
  const double at_zero = mean_constraint_at(values, h, t, x, base, node, 0.0);
  if (std::isnan(at_zero)) throw data_error("general_push: NaN constraint value");
  const double deficit = -at_zero;
  if (deficit <= 0.0) return 0.0;

  double lo = deficit / lip_upper;
  double hi = deficit / lip_lower;
  if (mean_constraint_at(values, h, t, x, base, node, lo) >= 0.0) return lo;
  if (mean_constraint_at(values, h, t, x, base, node, hi) < 0.0) {
    // The bi-Lipschitz lower bound guarantees the root sits inside the
    // bracket; allow one tolerance of numerical slack before giving up.
    hi += tol;
    if (mean_constraint_at(values, h, t, x, base, node, hi) < 0.0)
      throw contract_error(
          "general_push: constraint unsatisfiable at deficit/lip_lower + tol; "
          "declared lip_lower is wrong for this h");
    if (hi - lo <= tol) return hi;
  }
  for (int it = 0; it < 200; ++it) {
    if (hi - lo <= tol) return hi;
    const double mid = 0.5 * (lo + hi);
    if (mean_constraint_at(values, h, t, x, base, node, mid) >= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  throw contract_error("general_push: bisection failed to converge");
}

}  // namespace

std::vector<double> general_push(std::span<const double> proposal,
                                 const ParticleMatrixView& particle_values,
                                 const MeanConstraint& h, double lip_lower,
                                 double lip_upper, double t_next,
                                 std::span<const double> x_interior,
                                 double tol, int workers) {
  if (particle_values.n_particles < 1)
    throw contract_error("general_push: need at least one particle");
  if (proposal.size() != x_interior.size())
    throw contract_error("general_push: length mismatch");
  if (!(lip_lower > 0.0) || lip_upper < lip_lower)
    throw contract_error("general_push: need 0 < lip_lower <= lip_upper");
  const int m = static_cast<int>(proposal.size());
  std::vector<double> dk(static_cast<std::size_t>(m));
  std::exception_ptr failure = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers > 0 ? workers : 1)
#endif
  for (int j = 0; j < m; ++j) {
    try {
      dk[static_cast<std::size_t>(j)] =
          solve_node_push(particle_values, h, t_next,
                          x_interior[static_cast<std::size_t>(j)],
                          proposal[static_cast<std::size_t>(j)], j, lip_lower,
                          lip_upper, tol);
    } catch (...) {
      // Exceptions cannot leave an OpenMP region; rethrown below.
#ifdef _OPENMP
#pragma omp critical(mrshe_general_push_failure)
#endif
      if (failure == nullptr) failure = std::current_exception();
    }
  }
  if (failure != nullptr) std::rethrow_exception(failure);
  return dk;
}

double flatness_residual(std::span<const double> constraint_after,
                         std::span<const double> dk) {
  if (constraint_after.size() != dk.size())
    throw contract_error("flatness_residual: length mismatch");
  return pairwise_sum_of(dk.size(), [&](std::size_t i) {
    const double positive = constraint_after[i] > 0.0 ? constraint_after[i] : 0.0;
    return positive * dk[i];
  });
}

}  // namespace mrshe
