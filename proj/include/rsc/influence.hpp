#pragma once

#include "rsc/functionals.hpp"
#include "rsc/sample.hpp"

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace rsc {

enum class InfluenceMethod
{
  AnalyticRif, //!< v_n + IF(y) from the closed-form catalog
  LooRsc,      //!< v_n + SC(y) from leave-one-out recomputation
  SplineRsc    //!< restricted cubic spline fitted to RSC on a subsample
};

//! "RIF", "RSC" or "RSC(sp)".
std::string_view
to_string(InfluenceMethod method) noexcept;

//! How the n leave-one-out values are obtained.
//!   Exact        re-evaluates the functional on every reduced sample.
//!   Incremental  downdates full-sample quantities: O(1) per observation for
//!                Mean, Variance, Gini and Quantile, O(n) for DER (kernel
//!                row j removed, bandwidth change applied through a
//!                third-order expansion in h; exact when the bandwidth is
//!                frozen or fixed).
//!   Auto         Incremental, except DER, which stays Exact unless the
//!                expansion is requested explicitly.
enum class LooStrategy
{
  Auto,
  Exact,
  Incremental
};

LooStrategy
resolve_strategy(const Functional& f, std::size_t n, LooStrategy requested) noexcept;

//! Per-observation recentered influence values in original order.
struct InfluenceVector
{
  std::vector<double> values;
  double v_n = 0.0;
  InfluenceMethod method = InfluenceMethod::LooRsc;
  Functional functional;
};

//! IF(y_i) for the catalog functionals, original order. The Gini form is
//! the plug-in IF = (a(y) - G (y + mu)) / mu with a(y) the mean absolute
//! distance to y, which averages to exactly zero on F_n.
//! Throws NoAnalyticForm for DER.
std::vector<double>
analytic_if(const Functional& f, const Sample& data);

InfluenceVector
analytic_rif(const Functional& f, const Sample& data);

//! SC(y_j) = n [v(F_n) - v(F_n^(j))] by direct recomputation. Needs n >= 3.
double
sc_at(const Functional& f, const Sample& data, std::size_t j);

//! RSC values v_n + SC(y_j) for the listed observations.
struct RscValues
{
  std::vector<double> values; //!< aligned with the requested indices
  double v_n = 0.0;
};

RscValues
rsc_subset(const Functional& f,
           const Sample& data,
           std::span<const std::size_t> indices,
           LooStrategy strategy = LooStrategy::Auto);

InfluenceVector
rsc_full(const Functional& f, const Sample& data, LooStrategy strategy = LooStrategy::Auto);

//! max_j |SC(y_j) - IF(y_j)|; a finite-sample check that SC approaches IF.
double
sc_if_gap(const Functional& f, const Sample& data);

} // namespace rsc
