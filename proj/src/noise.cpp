#include "mrshe/noise.hpp"

#include <cmath>

#include "mrshe/errors.hpp"
#include "mrshe/pairwise.hpp"
#include "mrshe/philox.hpp"

namespace mrshe {

NoiseSheet sample_sheet(const SpaceTimeGrid& grid, std::uint64_t seed,
                        std::uint64_t particle_id) {
  grid.validate();
  NoiseSheet sheet;
  sheet.nt = grid.nt;
  sheet.nx = grid.nx;
  sheet.seed = seed;
  sheet.stream = particle_id;
  sheet.increments.resize(static_cast<std::size_t>(grid.nt) * grid.nx);
  const double scale = std::sqrt(grid.dt() * grid.dx());
  for (std::size_t cell = 0; cell < sheet.increments.size(); ++cell)
    sheet.increments[cell] = scale * normal_at(seed, particle_id, cell);
  return sheet;
}

DriftField DriftField::constant(double c) {
  if (!std::isfinite(c)) throw data_error("drift: constant must be finite");
  DriftField g;
  g.kind_ = Kind::Constant;
  g.c_ = c;
  return g;
}

DriftField DriftField::cells(int nt, int nx, std::vector<double> values) {
  if (nt < 1 || nx < 1 || values.size() != static_cast<std::size_t>(nt) * nx)
    throw contract_error("drift: values must be an nt x nx matrix");
  for (double v : values)
    if (!std::isfinite(v)) throw data_error("drift: non-finite entry");
  DriftField g;
  g.kind_ = Kind::Cells;
  g.nt_ = nt;
  g.nx_ = nx;
  g.values_ = std::move(values);
  return g;
}

DriftField DriftField::from_function(
    const SpaceTimeGrid& grid, const std::function<double(double, double)>& g) {
  std::vector<double> values(static_cast<std::size_t>(grid.nt) * grid.nx);
  for (int n = 0; n < grid.nt; ++n) {
    const double t_mid = grid.T * (n + 0.5) / grid.nt;
    for (int j = 0; j < grid.nx; ++j) {
      const double x_mid = (j + 0.5) / grid.nx;
      values[static_cast<std::size_t>(n) * grid.nx + j] = g(t_mid, x_mid);
    }
  }
  return cells(grid.nt, grid.nx, std::move(values));
}

double DriftField::at(int n, int j) const {
  if (kind_ == Kind::Constant) return c_;
  return values_[static_cast<std::size_t>(n) * nx_ + j];
}

void DriftField::check_compatible(const SpaceTimeGrid& grid) const {
  if (kind_ == Kind::Cells && (nt_ != grid.nt || nx_ != grid.nx))
    throw contract_error("drift: matrix dimensions do not match the grid");
}

double DriftField::sum_g_squared(const SpaceTimeGrid& grid) const {
  check_compatible(grid);
  const double cell_area = grid.dt() * grid.dx();
  if (kind_ == Kind::Constant)
    return c_ * c_ * cell_area * static_cast<double>(grid.n_cells());
  const double sq =
      pairwise_sum_of(values_.size(),
                      [&](std::size_t i) { return values_[i] * values_[i]; });
  return sq * cell_area;
}

double entropy_of_drift(const DriftField& g, const SpaceTimeGrid& grid) {
  return 0.5 * g.sum_g_squared(grid);
}

NoiseSheet shift_sheet(const NoiseSheet& sheet, const DriftField& g,
                       const SpaceTimeGrid& grid) {
  if (sheet.nt != grid.nt || sheet.nx != grid.nx)
    throw contract_error("shift_sheet: sheet dimensions do not match the grid");
  g.check_compatible(grid);
  const double cell_area = grid.dt() * grid.dx();
  NoiseSheet out = sheet;
  for (int n = 0; n < grid.nt; ++n)
    for (int j = 0; j < grid.nx; ++j) out.at(n, j) += g.at(n, j) * cell_area;
  return out;
}

GirsanovDensity log_density(const NoiseSheet& sheet_under_p,
                            const DriftField& g, const SpaceTimeGrid& grid) {
  if (sheet_under_p.nt != grid.nt || sheet_under_p.nx != grid.nx)
    throw contract_error("log_density: sheet dimensions do not match the grid");
  g.check_compatible(grid);
  const double cell_area = grid.dt() * grid.dx();
  GirsanovDensity density;
  density.log_m.assign(static_cast<std::size_t>(grid.nt) + 1, 0.0);
  double acc = 0.0;
  for (int n = 0; n < grid.nt; ++n) {
    const double stoch = pairwise_sum_of(
        static_cast<std::size_t>(grid.nx),
        [&](std::size_t j) {
          return g.at(n, static_cast<int>(j)) *
                 sheet_under_p.at(n, static_cast<int>(j));
        });
    const double quad = pairwise_sum_of(
        static_cast<std::size_t>(grid.nx), [&](std::size_t j) {
          const double v = g.at(n, static_cast<int>(j));
          return v * v;
        });
    acc += stoch - 0.5 * quad * cell_area;
    density.log_m[static_cast<std::size_t>(n) + 1] = acc;
  }
  return density;
}

void CounterNoise::fill_row(std::uint64_t stream, int step,
                            std::span<double> out) const {
  const double scale = std::sqrt(grid_.dt() * grid_.dx());
  const std::uint64_t base = static_cast<std::uint64_t>(step) * grid_.nx;
  for (int j = 0; j < grid_.nx; ++j)
    out[static_cast<std::size_t>(j)] =
        scale * normal_at(seed_, stream_offset_ + stream, base + j);
}

AggregatedNoise::AggregatedNoise(const SpaceTimeGrid& coarse,
                                 const SpaceTimeGrid& fine, std::uint64_t seed,
                                 std::uint64_t stream_offset)
    : coarse_(coarse), fine_(fine), seed_(seed), stream_offset_(stream_offset) {
  if (fine.T != coarse.T || fine.nt % coarse.nt != 0 || fine.nx % coarse.nx != 0)
    throw contract_error("aggregated noise: fine grid must refine the coarse grid");
  time_factor_ = fine.nt / coarse.nt;
  space_factor_ = fine.nx / coarse.nx;
}

void AggregatedNoise::fill_row(std::uint64_t stream, int step,
                               std::span<double> out) const {
  const double scale = std::sqrt(fine_.dt() * fine_.dx());
  for (int j = 0; j < coarse_.nx; ++j) {
    double acc = 0.0;
    for (int a = 0; a < time_factor_; ++a) {
      const std::uint64_t fine_step =
          static_cast<std::uint64_t>(step) * time_factor_ + a;
      const std::uint64_t base = fine_step * fine_.nx +
                                 static_cast<std::uint64_t>(j) * space_factor_;
      for (int b = 0; b < space_factor_; ++b)
        acc += normal_at(seed_, stream_offset_ + stream, base + b);
    }
    out[static_cast<std::size_t>(j)] = scale * acc;
  }
}

void SheetNoise::fill_row(std::uint64_t /*stream*/, int step,
                          std::span<double> out) const {
  const auto row = sheet_->row(step);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = row[j];
}

}  // namespace mrshe
