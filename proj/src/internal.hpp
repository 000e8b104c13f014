#pragma once

#include "rsc/error.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

namespace rsc::detail {

//! Neumaier-compensated accumulator.
class CompensatedSum
{
public:
  void add(double x) noexcept
  {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double
mean_of(std::span<const double> x) noexcept
{
  CompensatedSum s;
  for (double v : x)
    s.add(v);
  return s.value() / static_cast<double>(x.size());
}

//! Sum of squared deviations from m.
inline double
sum_sq_dev(std::span<const double> x, double m) noexcept
{
  CompensatedSum s;
  for (double v : x) {
    const double d = v - m;
    s.add(d * d);
  }
  return s.value();
}

//! Hyndman-Fan type 7 quantile of sorted data (linear interpolation
//! between order statistics, as in R's default).
template<class At>
double
quantile_type7(At&& at, std::size_t n, double p)
{
  const double h = (static_cast<double>(n) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  const double a = at(lo);
  if (lo + 1 >= n || frac == 0.0)
    return a;
  return a + frac * (at(lo + 1) - a);
}

inline double
quantile_type7(std::span<const double> sorted, double p)
{
  return quantile_type7([&](std::size_t k) { return sorted[k]; }, sorted.size(), p);
}

[[noreturn]] inline void
fail(ErrorCode code, const std::string& what)
{
  throw Error(code, what);
}

} // namespace rsc::detail
