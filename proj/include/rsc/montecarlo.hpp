#pragma once

#include "rsc/functionals.hpp"
#include "rsc/influence.hpp"
#include "rsc/regression.hpp"
#include "rsc/sample.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace rsc {

//! (v(F_eps) - v(F_0)) / eps with F_eps the design shifted by eps, both
//! drawn with the same random numbers (population stream of `seed`).
double
population_effect(DgpModel::Kind model,
                   const Functional& f,
                   std::size_t pop_n,
                   double epsilon,
                   std::uint64_t seed);

struct McConfig
{
  DgpModel::Kind model = DgpModel::Kind::LocationScale;
  Functional functional = Functional::variance();
  std::size_t n = 500;
  std::size_t reps = 200;
  std::vector<InfluenceMethod> methods{ InfluenceMethod::AnalyticRif, InfluenceMethod::LooRsc };
  ModelSpec spec;
  std::size_t n_star = 0; //!< 0 picks default_n_star(n)
  std::size_t knots = kDefaultKnots;
  std::uint64_t base_seed = 1;
  double epsilon = 1e-4;
  std::size_t pop_n = 1'000'000;
  //! Skips the population run when set (e.g. a known analytic value).
  std::optional<double> population;
  LooStrategy strategy = LooStrategy::Auto;
  ScReference reference = ScReference::FullSample;

  //! Throws InvalidArgument.
  void validate() const;
};

struct McMethodResult
{
  InfluenceMethod method = InfluenceMethod::LooRsc;
  std::vector<double> apes; //!< one per replication, in replication order
  double mean = 0.0;
  double bias = 0.0;
  double variance = 0.0; //!< divisor R
  double mse = 0.0;      //!< mean squared error against the population value
  double mc_se = 0.0;    //!< standard error of the mean, sd / sqrt(R)
  double seconds = 0.0;  //!< summed over replications
};

struct McReport
{
  double population = 0.0;
  double population_seconds = 0.0;
  std::vector<McMethodResult> methods;
  double seconds = 0.0; //!< wall clock for the whole run
};

//! Replication r draws its data from stream (Data, r) and its spline
//! subsample from (Subsample, r) of base_seed; the APE of the first
//! covariate is collected. A failing replication aborts the run and the
//! error names it.
McReport
run_mc(const McConfig& config);

//! Aggregates per-replication APEs into the report statistics.
McMethodResult
summarize(InfluenceMethod method, std::vector<double> apes, double population);

struct TimingRow
{
  std::size_t n = 0;
  std::size_t n_star = 0;
  double rsc_seconds = 0.0; //!< mean over replications
  double spline_seconds = 0.0;
  double ratio = 0.0; //!< spline / rsc
};

//! Wall clock of a full leave-one-out RSC and of the spline route with
//! n* = round(frac n) on LocationScale draws; both evaluate every
//! leave-one-out value by recomputation. One untimed warm-up per size.
std::vector<TimingRow>
bench_timing(const Functional& f,
             const std::vector<std::size_t>& sizes,
             double frac,
             std::size_t reps,
             std::uint64_t seed,
             ScReference reference = ScReference::FullSample);

} // namespace rsc
