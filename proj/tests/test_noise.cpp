#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mrshe/noise.hpp"
#include "mrshe/pairwise.hpp"
#include "oracles.hpp"

using namespace mrshe;

TEST_CASE("sampling is a pure function of (grid, seed, particle)") {
  const SpaceTimeGrid grid{0.25, 64, 32};
  const NoiseSheet a = sample_sheet(grid, 42, 7);
  const NoiseSheet b = sample_sheet(grid, 42, 7);
  CHECK(a.increments == b.increments);
  const NoiseSheet c = sample_sheet(grid, 42, 8);
  CHECK(a.increments != c.increments);
  const NoiseSheet d = sample_sheet(grid, 43, 7);
  CHECK(a.increments != d.increments);
}

TEST_CASE("pooled entries have the cell variance") {
  const SpaceTimeGrid grid{1.0, 100, 100};
  const double cell = grid.dt() * grid.dx();
  double sum = 0.0, sum_sq = 0.0;
  std::size_t n = 0;
  for (std::uint64_t p = 0; p < 100; ++p) {
    const NoiseSheet sheet = sample_sheet(grid, 9001, p);
    for (double v : sheet.increments) {
      sum += v;
      sum_sq += v * v;
      ++n;
    }
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sum_sq / static_cast<double>(n) - mean * mean;
  // Five standard errors of the variance estimator (well inside 1% relative).
  const double se = cell * std::sqrt(2.0 / static_cast<double>(n));
  CHECK(std::abs(var - cell) <= 5.0 * se);
  CHECK(std::abs(var - cell) <= 0.01 * cell);
  CHECK(std::abs(mean) <= 5.0 * std::sqrt(cell / static_cast<double>(n)));
}

TEST_CASE("different particles give uncorrelated sheets") {
  const SpaceTimeGrid grid{1.0, 256, 256};
  const NoiseSheet a = sample_sheet(grid, 5, 0);
  const NoiseSheet b = sample_sheet(grid, 5, 1);
  const auto n = static_cast<double>(a.increments.size());
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.increments.size(); ++i) {
    dot += a.increments[i] * b.increments[i];
    na += a.increments[i] * a.increments[i];
    nb += b.increments[i] * b.increments[i];
  }
  const double corr = dot / std::sqrt(na * nb);
  CHECK(std::abs(corr) <= 5.0 / std::sqrt(n));
}

TEST_CASE("entropy of the zero drift is zero, and only of the zero drift") {
  const SpaceTimeGrid grid{0.25, 32, 32};
  CHECK(entropy_of_drift(DriftField::constant(0.0), grid) == 0.0);
  CHECK(entropy_of_drift(DriftField::constant(0.01), grid) > 0.0);
  std::vector<double> one_cell(static_cast<std::size_t>(32) * 32, 0.0);
  one_cell[100] = 1e-8;
  CHECK(entropy_of_drift(DriftField::cells(32, 32, one_cell), grid) > 0.0);
}

TEST_CASE("constant drift entropy is the closed form, exact for dyadic data") {
  const SpaceTimeGrid grid{0.25, 512, 32};
  CHECK(entropy_of_drift(DriftField::constant(0.5), grid) == 0.03125);
  const SpaceTimeGrid coarse{0.25, 32, 32};
  CHECK(entropy_of_drift(DriftField::constant(0.5), coarse) == 0.03125);
}

TEST_CASE("product drift entropy matches a refined-grid oracle") {
  auto g = [](double s, double y) { return s * y; };
  const SpaceTimeGrid grid{1.0, 64, 64};
  const double got = entropy_of_drift(DriftField::from_function(grid, g), grid);
  const SpaceTimeGrid fine{1.0, 512, 512};
  const double ref = entropy_of_drift(DriftField::from_function(fine, g), fine);
  CHECK(std::abs(got - ref) <= 1e-3 * ref);
  // Exact value of (1/2) int s^2 y^2 = 1/18 for scale.
  CHECK(ref == doctest::Approx(1.0 / 18.0).epsilon(1e-4));
}

TEST_CASE("entropy rejects NaN drift entries") {
  CHECK_THROWS_AS(
      DriftField::cells(2, 2, {0.0, 1.0, std::nan(""), 2.0}),
      data_error);
}

TEST_CASE("entropy is quadratically homogeneous") {
  const SpaceTimeGrid grid{0.5, 16, 16};
  std::vector<double> values(static_cast<std::size_t>(16) * 16);
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = std::sin(0.1 * static_cast<double>(i)) + 0.3;
  const DriftField g = DriftField::cells(16, 16, values);
  const double base = entropy_of_drift(g, grid);

  // Power-of-two scalings commute with rounding, so equality is exact.
  for (double lambda : {2.0, 0.5, 4.0}) {
    std::vector<double> scaled(values);
    for (double& v : scaled) v *= lambda;
    CHECK(entropy_of_drift(DriftField::cells(16, 16, scaled), grid) ==
          lambda * lambda * base);
  }
  // Generic scalings agree to a few ulps.
  for (double lambda : {3.0, 0.7, 1.9}) {
    std::vector<double> scaled(values);
    for (double& v : scaled) v *= lambda;
    const double got = entropy_of_drift(DriftField::cells(16, 16, scaled), grid);
    CHECK(std::abs(got - lambda * lambda * base) <= 8e-15 * got);
  }
}

TEST_CASE("shift_sheet adds the drift mass per cell") {
  const SpaceTimeGrid grid{0.25, 64, 64};  // dt dx = 1/16384
  const NoiseSheet sheet = sample_sheet(grid, 11, 0);

  const NoiseSheet same = shift_sheet(sheet, DriftField::constant(0.0), grid);
  CHECK(same.increments == sheet.increments);

  const NoiseSheet up = shift_sheet(sheet, DriftField::constant(1.0), grid);
  for (int n = 0; n < grid.nt; ++n)
    for (int j = 0; j < grid.nx; ++j)
      CHECK(up.at(n, j) == sheet.at(n, j) + grid.dt() * grid.dx());

  const NoiseSheet back = shift_sheet(up, DriftField::constant(-1.0), grid);
  for (std::size_t i = 0; i < sheet.increments.size(); ++i)
    CHECK(std::abs(back.increments[i] - sheet.increments[i]) <= 1e-15);
}

TEST_CASE("shift_sheet rejects dimension mismatches") {
  const SpaceTimeGrid grid{0.25, 8, 8};
  const SpaceTimeGrid other{0.25, 8, 4};
  const NoiseSheet sheet = sample_sheet(grid, 1, 0);
  CHECK_THROWS_AS(shift_sheet(sheet, DriftField::constant(1.0), other),
                  contract_error);
  CHECK_THROWS_AS(
      shift_sheet(sheet, DriftField::cells(4, 4, std::vector<double>(16, 0.0)),
                  grid),
      contract_error);
}

TEST_CASE("log density of the zero drift is identically zero") {
  const SpaceTimeGrid grid{0.25, 16, 16};
  const NoiseSheet sheet = sample_sheet(grid, 3, 0);
  const GirsanovDensity density =
      log_density(sheet, DriftField::constant(0.0), grid);
  CHECK(density.log_m.size() == 17);
  for (double v : density.log_m) CHECK(v == 0.0);
}

TEST_CASE("exponential martingale has unit mean and the Gaussian log mean") {
  // g constant 0.5, T = 0.25, 32 x 32 cells; 1e4 fresh sheets under the base
  // measure. E[M_T] = 1; E[log M_T] = -(1/2) (0.5)^2 (0.25).
  const SpaceTimeGrid grid{0.25, 32, 32};
  const DriftField g = DriftField::constant(0.5);
  const int n = 10000;
  std::vector<double> m_t(static_cast<std::size_t>(n));
  std::vector<double> log_m_t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const NoiseSheet sheet = sample_sheet(grid, 777, static_cast<std::uint64_t>(i));
    const double lm = log_density(sheet, g, grid).terminal();
    log_m_t[static_cast<std::size_t>(i)] = lm;
    m_t[static_cast<std::size_t>(i)] = std::exp(lm);
  }
  const double mean_m = pairwise_mean(m_t);
  double var_m = 0.0;
  for (double v : m_t) var_m += (v - mean_m) * (v - mean_m);
  const double se_m = std::sqrt(var_m / (n - 1.0) / n);
  CHECK(std::abs(mean_m - 1.0) <= 3.0 * se_m);

  const double mean_log = pairwise_mean(log_m_t);
  double var_log = 0.0;
  for (double v : log_m_t) var_log += (v - mean_log) * (v - mean_log);
  const double se_log = std::sqrt(var_log / (n - 1.0) / n);
  CHECK(std::abs(mean_log - (-0.03125)) <= 3.0 * se_log);
  // The analytic variance of log M_T is int g^2 = 0.0625.
  CHECK(var_log / (n - 1.0) == doctest::Approx(0.0625).epsilon(0.05));
}

TEST_CASE("change-of-measure identity for the mean-of-entries statistic") {
  // E_P[ M_T F(shifted sheet) ] should match E[ F(fresh sheet) ] with
  // F = mean of entries: the drift shift is exactly compensated.
  const SpaceTimeGrid grid{0.25, 16, 16};
  const DriftField g = DriftField::constant(0.75);
  const int n = 10000;
  auto mean_entries = [&](const NoiseSheet& sheet) {
    return pairwise_mean(sheet.increments);
  };
  std::vector<double> weighted(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const NoiseSheet w = sample_sheet(grid, 555, static_cast<std::uint64_t>(i));
    const double m = std::exp(log_density(w, g, grid).terminal());
    // Under Q the sheet shifted by -g dt dx is Brownian; F evaluated there.
    const NoiseSheet shifted = shift_sheet(w, DriftField::constant(-0.75), grid);
    weighted[static_cast<std::size_t>(i)] = m * mean_entries(shifted);
  }
  const double got = pairwise_mean(weighted);
  double var = 0.0;
  for (double v : weighted) var += (v - got) * (v - got);
  const double se = std::sqrt(var / (n - 1.0) / n);
  CHECK(std::abs(got - 0.0) <= 3.0 * se);  // fresh-sheet mean of entries is 0
}

TEST_CASE("log density rejects dimension mismatches") {
  const SpaceTimeGrid grid{0.25, 8, 8};
  const SpaceTimeGrid other{0.25, 4, 8};
  const NoiseSheet sheet = sample_sheet(grid, 1, 0);
  CHECK_THROWS_AS(log_density(sheet, DriftField::constant(1.0), other),
                  contract_error);
}

TEST_CASE("row providers agree with whole-sheet sampling") {
  const SpaceTimeGrid grid{0.25, 16, 8};
  const NoiseSheet sheet = sample_sheet(grid, 99, 3);
  const CounterNoise provider(grid, 99);
  std::vector<double> row(8);
  for (int n = 0; n < grid.nt; ++n) {
    provider.fill_row(3, n, row);
    for (int j = 0; j < grid.nx; ++j) CHECK(row[j] == sheet.at(n, j));
  }
  const SheetNoise replay(&sheet);
  replay.fill_row(12345, 5, row);
  for (int j = 0; j < grid.nx; ++j) CHECK(row[j] == sheet.at(5, j));
}

TEST_CASE("aggregated rows sum the fine lattice exactly") {
  const SpaceTimeGrid fine{0.25, 64, 32};
  const SpaceTimeGrid coarse{0.25, 16, 16};
  const AggregatedNoise agg(coarse, fine, 7);
  const CounterNoise fine_noise(fine, 7);

  std::vector<double> coarse_row(16);
  std::vector<double> fine_row(32);
  agg.fill_row(0, 3, coarse_row);
  // Coarse step 3 covers fine steps 12..15; coarse cell j covers fine cells
  // 2j and 2j+1.
  std::vector<double> expect(16, 0.0);
  for (int fs = 12; fs < 16; ++fs) {
    fine_noise.fill_row(0, fs, fine_row);
    for (int j = 0; j < 16; ++j)
      expect[static_cast<std::size_t>(j)] += fine_row[2 * j] + fine_row[2 * j + 1];
  }
  for (int j = 0; j < 16; ++j)
    CHECK(coarse_row[j] == doctest::Approx(expect[j]).epsilon(1e-15));

  // The identity refinement reproduces the native sampler bitwise.
  const AggregatedNoise identity(fine, fine, 7);
  std::vector<double> a(32), b(32);
  identity.fill_row(2, 5, a);
  fine_noise.fill_row(2, 5, b);
  CHECK(a == b);

  CHECK_THROWS_AS(AggregatedNoise(SpaceTimeGrid{0.25, 10, 16}, fine, 7),
                  contract_error);
}

TEST_CASE("aggregated cells keep the coarse cell variance") {
  const SpaceTimeGrid fine{0.25, 128, 64};
  const SpaceTimeGrid coarse{0.25, 32, 32};
  const AggregatedNoise agg(coarse, fine, 31);
  std::vector<double> row(32);
  double sum_sq = 0.0;
  std::size_t n = 0;
  for (std::uint64_t p = 0; p < 40; ++p)
    for (int step = 0; step < coarse.nt; ++step) {
      agg.fill_row(p, step, row);
      for (double v : row) {
        sum_sq += v * v;
        ++n;
      }
    }
  const double cell = coarse.dt() * coarse.dx();
  const double var = sum_sq / static_cast<double>(n);
  CHECK(std::abs(var - cell) <= 5.0 * cell * std::sqrt(2.0 / static_cast<double>(n)));
}
