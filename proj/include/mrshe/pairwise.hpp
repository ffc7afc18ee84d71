#pragma once

#include <cstddef>
#include <span>

namespace mrshe {

// Index-ascending pairwise summation. The reduction tree depends only on the
// element count, so totals are identical for any worker count or dispatch
// order. Used for every ensemble reduction in the project.
inline double pairwise_sum_strided(const double* data, std::size_t count,
                                   std::size_t stride) {
  if (count <= 8) {
    double acc = 0.0;
    for (std::size_t i = 0; i < count; ++i) acc += data[i * stride];
    return acc;
  }
  const std::size_t half = count / 2;
  return pairwise_sum_strided(data, half, stride) +
         pairwise_sum_strided(data + half * stride, count - half, stride);
}

inline double pairwise_sum(std::span<const double> values) {
  return pairwise_sum_strided(values.data(), values.size(), 1);
}

inline double pairwise_mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return pairwise_sum(values) / static_cast<double>(values.size());
}

// Pairwise sum of f(i) for i in [offset, offset+count).
template <class F>
double pairwise_sum_of(std::size_t count, F&& f, std::size_t offset = 0) {
  if (count == 0) return 0.0;
  if (count <= 8) {
    double acc = 0.0;
    for (std::size_t i = 0; i < count; ++i) acc += f(offset + i);
    return acc;
  }
  const std::size_t half = count / 2;
  return pairwise_sum_of(half, f, offset) +
         pairwise_sum_of(count - half, f, offset + half);
}

}  // namespace mrshe
