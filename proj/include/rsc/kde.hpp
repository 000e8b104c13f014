#pragma once

#include "rsc/sample.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace rsc {

//! Kernel density settings shared by the quantile influence function and
//! the DER index.
struct KdeConfig
{
  enum class Kernel
  {
    Gaussian
  };
  enum class Rule
  {
    Silverman, //!< 0.9 min(sd, IQR/1.34) n^(-1/5)
    Fixed      //!< h in outcome units (after mean normalization, if any)
  };
  //! What happens to the bandwidth when an observation is left out:
  //! Recompute applies the rule to the reduced sample, Freeze keeps the
  //! full-sample bandwidth (in raw outcome units).
  enum class LooBandwidth
  {
    Recompute,
    Freeze
  };

  Kernel kernel = Kernel::Gaussian;
  Rule rule = Rule::Silverman;
  double h = 0.0;
  LooBandwidth loo = LooBandwidth::Recompute;

  static KdeConfig silverman() { return {}; }
  static KdeConfig fixed(double h);
};

//! Silverman's rule of thumb from its ingredients. sd uses divisor n-1,
//! iqr the type-7 quartiles. Falls back to sd when the IQR vanishes;
//! throws DegenerateBandwidth when both do.
double
silverman_bandwidth(double sd, double iqr, std::size_t n);

//! Bandwidth for sorted data under the configured rule.
double
bandwidth(std::span<const double> sorted, const KdeConfig& config);

//! Gaussian KDE f(p) = 1/(n h) sum_i phi((p - y_i)/h) at each point.
//! Needs n >= 3.
std::vector<double>
kde_at(const Sample& data, std::span<const double> points, const KdeConfig& config);

//! How to evaluate kernel sums at the sample points.
enum class SumMethod
{
  Auto,     //!< Direct up to kExpansionThreshold points, Expansion above
  Direct,   //!< pairwise, pruned where exp(-t^2/2) < 3e-18
  Expansion //!< box-wise Taylor expansion of the Gauss transform
};

inline constexpr std::size_t kExpansionThreshold = 10000;

//! Unnormalized Gaussian sums at every sample point (self term included):
//! s0[i] = sum_k exp(-t_ik^2 / 2), t_ik = (y_i - y_k) / h; sorted input.
std::vector<double>
gauss_sums(std::span<const double> sorted, double h, SumMethod method = SumMethod::Auto);

//! The same sums weighted by t^2, t^4 and t^6; these give the first three
//! derivatives of s0 with respect to h.
struct GaussMoments
{
  std::vector<double> s0, s2, s4, s6;
};

GaussMoments
gauss_moments(std::span<const double> sorted, double h, SumMethod method = SumMethod::Auto);

} // namespace rsc
