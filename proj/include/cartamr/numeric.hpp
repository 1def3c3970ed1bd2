#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace cartamr {

/// Pairwise (cascade) summation with a fixed split order, so results only
/// depend on the input values, never on scheduling.
inline double pairwise_sum(std::span<const double> v) {
  constexpr std::size_t kBlock = 32;
  if (v.size() <= kBlock) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

namespace detail {
template <class F>
double pairwise_reduce(std::size_t lo, std::size_t hi, const F& term) {
  constexpr std::size_t kBlock = 32;
  if (hi - lo <= kBlock) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_reduce(lo, mid, term) + pairwise_reduce(mid, hi, term);
}
}  // namespace detail

inline double dot(std::span<const double> a, std::span<const double> b) {
  return detail::pairwise_reduce(0, a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

inline double norm_l1(std::span<const double> a) {
  return detail::pairwise_reduce(0, a.size(), [&](std::size_t i) { return std::abs(a[i]); });
}

inline double norm_linf(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::fmax(m, std::abs(x));
  return m;
}

}  // namespace cartamr
