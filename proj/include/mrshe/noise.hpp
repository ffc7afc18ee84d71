#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "mrshe/grid.hpp"

namespace mrshe {

/// Discrete Brownian-sheet increments: entry (n, j) carries the white-noise
/// mass of the cell [t_n, t_{n+1}] x [x_j, x_{j+1}], i.i.d. N(0, dt dx) under
/// fresh sampling. Seed provenance is kept for reproducibility.
struct NoiseSheet {
  int nt = 0;
  int nx = 0;
  std::vector<double> increments;  // nt * nx, row = time index
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  double at(int n, int j) const {
    return increments[static_cast<std::size_t>(n) * nx + j];
  }
  double& at(int n, int j) {
    return increments[static_cast<std::size_t>(n) * nx + j];
  }
  std::span<const double> row(int n) const {
    return {increments.data() + static_cast<std::size_t>(n) * nx,
            static_cast<std::size_t>(nx)};
  }
};

/// Deterministic function of (grid, seed, particle_id): identical inputs give
/// bit-identical sheets regardless of worker count or call order.
NoiseSheet sample_sheet(const SpaceTimeGrid& grid, std::uint64_t seed,
                        std::uint64_t particle_id);

/// Cell-averaged drift field g, stored either as a closed form (constant) or
/// as an explicit nt x nx matrix. Cell (n, j) is read at the midpoint
/// ((n + 1/2) dt, (j + 1/2) dx) when built from a function.
class DriftField {
 public:
  static DriftField constant(double c);
  static DriftField cells(int nt, int nx, std::vector<double> values);
  static DriftField from_function(
      const SpaceTimeGrid& grid,
      const std::function<double(double, double)>& g);

  double at(int n, int j) const;
  bool is_constant() const { return kind_ == Kind::Constant; }
  double constant_value() const { return c_; }
  int nt() const { return nt_; }
  int nx() const { return nx_; }

  /// Checks dimensions against the grid; throws contract_error on mismatch,
  /// data_error on non-finite entries.
  void check_compatible(const SpaceTimeGrid& grid) const;

  /// Sum of g^2 dt dx over all cells (fixed-order pairwise for the matrix
  /// form, closed form for a constant).
  double sum_g_squared(const SpaceTimeGrid& grid) const;

 private:
  enum class Kind { Constant, Cells };
  Kind kind_ = Kind::Constant;
  double c_ = 0.0;
  int nt_ = 0, nx_ = 0;
  std::vector<double> values_;
};

/// Relative entropy of the Girsanov-shifted law for deterministic g:
/// (1/2) sum g^2 dt dx.
double entropy_of_drift(const DriftField& g, const SpaceTimeGrid& grid);

/// Adds g dt dx to every increment: converts a sheet that is Brownian under
/// the shifted measure into the corresponding unshifted sheet.
NoiseSheet shift_sheet(const NoiseSheet& sheet, const DriftField& g,
                       const SpaceTimeGrid& grid);

/// Running log of the exponential-martingale density along the time axis.
struct GirsanovDensity {
  std::vector<double> log_m;  // length nt + 1, log_m[0] = 0
  double terminal() const { return log_m.back(); }
};

/// log M at each time node for a sheet whose increments are Brownian under
/// the base measure: log M_n = sum_{m<n,j} g dW - (1/2) sum_{m<n,j} g^2 dt dx.
GirsanovDensity log_density(const NoiseSheet& sheet_under_p,
                            const DriftField& g, const SpaceTimeGrid& grid);

/// Row-level access to driving noise. Implementations must be pure functions
/// of (stream, step), so results do not depend on worker count.
class NoiseProvider {
 public:
  virtual ~NoiseProvider() = default;
  /// Writes the nx cell increments of (stream, step) into out.
  virtual void fill_row(std::uint64_t stream, int step,
                        std::span<double> out) const = 0;
};

/// Fresh counter-based sampling on the grid's native cells.
class CounterNoise final : public NoiseProvider {
 public:
  CounterNoise(const SpaceTimeGrid& grid, std::uint64_t seed,
               std::uint64_t stream_offset = 0)
      : grid_(grid), seed_(seed), stream_offset_(stream_offset) {}
  void fill_row(std::uint64_t stream, int step,
                std::span<double> out) const override;

 private:
  SpaceTimeGrid grid_;
  std::uint64_t seed_;
  std::uint64_t stream_offset_;
};

/// Coarse increments obtained by summing the cells of a finer lattice, so
/// runs at different resolutions are driven by the same Brownian sheet.
class AggregatedNoise final : public NoiseProvider {
 public:
  AggregatedNoise(const SpaceTimeGrid& coarse, const SpaceTimeGrid& fine,
                  std::uint64_t seed, std::uint64_t stream_offset = 0);
  void fill_row(std::uint64_t stream, int step,
                std::span<double> out) const override;

 private:
  SpaceTimeGrid coarse_;
  SpaceTimeGrid fine_;
  std::uint64_t seed_;
  std::uint64_t stream_offset_;
  int time_factor_;
  int space_factor_;
};

/// Replays one explicit sheet (the stream argument is ignored).
class SheetNoise final : public NoiseProvider {
 public:
  explicit SheetNoise(const NoiseSheet* sheet) : sheet_(sheet) {}
  void fill_row(std::uint64_t stream, int step,
                std::span<double> out) const override;

 private:
  const NoiseSheet* sheet_;
};

}  // namespace mrshe
