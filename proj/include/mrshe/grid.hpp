#pragma once

#include "mrshe/errors.hpp"

namespace mrshe {

/// Uniform discretization of [0,T] x [0,1].
///
/// Step sizes are always derived from (T, nt, nx), never stored, so the
/// representation cannot drift out of sync. Spatial nodes are j/nx for
/// j = 0..nx; interior nodes are 1..nx-1. Noise cells are indexed by
/// (time step n, spatial cell j) with cell j spanning [x_j, x_{j+1}].
struct SpaceTimeGrid {
  double T = 1.0;  // horizon
  int nt = 1;      // time steps
  int nx = 2;      // spatial cells

  double dt() const { return T / nt; }
  double dx() const { return 1.0 / nx; }
  double time_at(int n) const { return T * n / nt; }
  double x_at(int j) const { return static_cast<double>(j) / nx; }
  int n_nodes() const { return nx + 1; }
  int n_interior() const { return nx - 1; }
  int n_cells() const { return nt * nx; }

  // Explicit-scheme stability for the 1-D heat operator.
  bool cfl_ok() const { return dt() <= 0.5 * dx() * dx(); }

  void validate() const {
    if (!(T > 0.0)) throw config_error("grid: T must be > 0");
    if (nt < 1) throw config_error("grid: nt must be >= 1");
    if (nx < 2) throw config_error("grid: nx must be >= 2");
  }

  bool operator==(const SpaceTimeGrid&) const = default;
};

}  // namespace mrshe
