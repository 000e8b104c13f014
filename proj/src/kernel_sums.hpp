#pragma once

#include <cstddef>

// Hot loops, compiled with vectorized libm (see src/CMakeLists.txt). Inputs
// are sorted; nothing here may rely on IEEE special values.
namespace rsc::detail {

//! Pairs with |t| above this contribute below 3e-18 and are skipped.
inline constexpr double kKernelCut = 9.0;

void
gauss_sums_direct(const double* y, std::size_t n, double h, double* s0);

void
gauss_moments_direct(const double* y,
                     std::size_t n,
                     double h,
                     double* s0,
                     double* s2,
                     double* s4,
                     double* s6);

//! out[i] = exp(-((y_i - center)/h)^2 / 2)
void
gauss_row(const double* y, std::size_t n, double h, double center, double* out);

} // namespace rsc::detail
