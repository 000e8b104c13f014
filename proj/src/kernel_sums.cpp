#include "kernel_sums.hpp"

#include <cmath>

namespace rsc::detail {

namespace {

// first index k in [lo, n) with y[k] > bound
std::size_t
first_above(const double* y, std::size_t lo, std::size_t n, double bound)
{
  std::size_t hi = n;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (y[mid] > bound)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

} // namespace

void
gauss_sums_direct(const double* y, std::size_t n, double h, double* s0)
{
  const double inv_h = 1.0 / h;
  const double reach = kKernelCut * h;
  for (std::size_t i = 0; i < n; ++i)
    s0[i] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double yi = y[i];
    const std::size_t end = first_above(y, i + 1, n, yi + reach);
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t k = i + 1; k < end; ++k) {
      const double t = (yi - y[k]) * inv_h;
      const double e = std::exp(-0.5 * t * t);
      acc += e;
      s0[k] += e;
    }
    s0[i] += acc;
  }
}

void
gauss_moments_direct(const double* y,
                     std::size_t n,
                     double h,
                     double* s0,
                     double* s2,
                     double* s4,
                     double* s6)
{
  const double inv_h = 1.0 / h;
  const double reach = kKernelCut * h;
  for (std::size_t i = 0; i < n; ++i) {
    s0[i] = 1.0;
    s2[i] = s4[i] = s6[i] = 0.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double yi = y[i];
    const std::size_t end = first_above(y, i + 1, n, yi + reach);
    double a0 = 0.0, a2 = 0.0, a4 = 0.0, a6 = 0.0;
#pragma omp simd reduction(+ : a0, a2, a4, a6)
    for (std::size_t k = i + 1; k < end; ++k) {
      const double t = (yi - y[k]) * inv_h;
      const double t2 = t * t;
      const double e0 = std::exp(-0.5 * t2);
      const double e2 = e0 * t2;
      const double e4 = e2 * t2;
      const double e6 = e4 * t2;
      a0 += e0;
      a2 += e2;
      a4 += e4;
      a6 += e6;
      s0[k] += e0;
      s2[k] += e2;
      s4[k] += e4;
      s6[k] += e6;
    }
    s0[i] += a0;
    s2[i] += a2;
    s4[i] += a4;
    s6[i] += a6;
  }
}

void
gauss_row(const double* y, std::size_t n, double h, double center, double* out)
{
  const double inv_h = 1.0 / h;
#pragma omp simd
  for (std::size_t k = 0; k < n; ++k) {
    const double t = (y[k] - center) * inv_h;
    out[k] = std::exp(-0.5 * t * t);
  }
}

} // namespace rsc::detail
