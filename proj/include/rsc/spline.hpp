#pragma once

#include "rsc/functionals.hpp"
#include "rsc/influence.hpp"
#include "rsc/random.hpp"
#include "rsc/sample.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rsc {

//! Strictly increasing knots k_1 < ... < k_K, K >= 3.
struct KnotSet
{
  std::vector<double> knots;

  std::size_t size() const noexcept { return knots.size(); }
};

//! Knots at Harrell's quantile positions on the full sample (K = 3..7;
//! equally spaced between the .025 and .975 quantiles for K > 7). Tied
//! knots are merged; fewer than 3 survivors is TooFewDistinctValues.
KnotSet
select_knots(const Sample& data, std::size_t K);

//! Harrell's default quantile probabilities for K knots.
std::vector<double>
knot_probabilities(std::size_t K);

//! Restricted cubic spline terms h_1..h_{K-2} at y (unnormalized):
//!   h_j(y) = (y-k_j)+^3 - (y-k_{K-1})+^3 (k_K-k_j)/(k_K-k_{K-1})
//!                       + (y-k_K)+^3 (k_{K-1}-k_j)/(k_K-k_{K-1})
//! Each term is linear beyond k_K and zero below k_1.
std::vector<double>
rcs_basis(double y, const KnotSet& knots);

void
rcs_basis(double y, const KnotSet& knots, std::span<double> out);

//! A fitted spline b0 + b1 y + sum_j gamma_j h_j(y).
struct SplineFit
{
  KnotSet knots;
  double beta0 = 0.0;
  double beta1 = 0.0;
  std::vector<double> gamma; //!< K-2 entries, zero for dropped columns
  double fit_r2 = 0.0;
  //! Basis columns removed (highest index first) because the design was
  //! singular on the fitting points.
  std::size_t dropped_columns = 0;

  double predict(double y) const;
};

//! OLS of target on (1, y, h_1..h_{K-2}) through a pivoted QR on centred
//! and scaled columns. Throws SingularDesign if even one spline term
//! cannot be kept.
SplineFit
fit_rcs(const KnotSet& knots, std::span<const double> y, std::span<const double> target);

struct SplineModel : SplineFit
{
  std::vector<std::size_t> subsample_indices; //!< sorted, original positions
  double v_n = 0.0;
  Functional functional;
};

//! n_star distinct indices in [0, n), sorted; partial Fisher-Yates on the
//! given stream.
std::vector<std::size_t>
draw_subsample(std::size_t n, std::size_t n_star, std::uint64_t seed, std::uint64_t stream);

//! Where the subsample's sensitivity curve is computed.
//!   FullSample  leave-one-out from the full sample at the subsampled points
//!   Subsample   leave-one-out inside the subsample: SC = n* [v(F_n*) - v(F_n*^(j))].
//!               Cheaper by another factor n / n*, noisier by O(1 / sqrt(n*)).
enum class ScReference
{
  FullSample,
  Subsample
};

//! Knots on the full sample, the sensitivity curve on a random subsample
//! of size n_star recentered at the full-sample v_n, then the spline fit
//! of that RSC on y.
SplineModel
fit_spline_rsc(const Functional& f,
               const Sample& data,
               std::size_t n_star,
               std::size_t K,
               std::uint64_t seed,
               std::uint64_t stream = stream_id(StreamPurpose::Subsample, 0),
               LooStrategy strategy = LooStrategy::Exact,
               ScReference reference = ScReference::FullSample);

InfluenceVector
interpolate(const SplineModel& model, const Sample& data);

//! 10% of n, clamped to [200, 1000] and never above n.
std::size_t
default_n_star(std::size_t n) noexcept;

inline constexpr std::size_t kDefaultKnots = 5;

} // namespace rsc
