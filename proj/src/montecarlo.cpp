#include "rsc/montecarlo.hpp"

#include "internal.hpp"

#include <chrono>
#include <cmath>
#include <exception>

namespace rsc {

namespace {

using Clock = std::chrono::steady_clock;

double
seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

} // namespace

double
population_effect(DgpModel::Kind model,
                  const Functional& f,
                  std::size_t pop_n,
                  double epsilon,
                  std::uint64_t seed)
{
  if (!(epsilon > 0.0))
    detail::fail(ErrorCode::InvalidArgument, "epsilon must be positive");
  const auto stream = stream_id(StreamPurpose::Population, 0);
  const double base = eval(f, Sample(dgp_outcomes({ model, 0.0 }, pop_n, seed, stream)));
  const double shifted = eval(f, Sample(dgp_outcomes({ model, epsilon }, pop_n, seed, stream)));
  return (shifted - base) / epsilon;
}

void
McConfig::validate() const
{
  if (reps < 2)
    detail::fail(ErrorCode::InvalidArgument, "at least 2 replications are needed for a variance");
  if (!(epsilon > 0.0))
    detail::fail(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (!population && pop_n < 10 * n)
    detail::fail(ErrorCode::InvalidArgument, "population size must be at least 10 n");
  if (methods.empty())
    detail::fail(ErrorCode::InvalidArgument, "no estimation method requested");
  if (n < 4)
    detail::fail(ErrorCode::InvalidArgument, "sample size too small");
}

McMethodResult
summarize(InfluenceMethod method, std::vector<double> apes, double population)
{
  McMethodResult r;
  r.method = method;
  const double reps = static_cast<double>(apes.size());
  r.mean = detail::mean_of(apes);
  r.bias = r.mean - population;
  detail::CompensatedSum sq, err;
  for (double a : apes) {
    sq.add((a - r.mean) * (a - r.mean));
    err.add((a - population) * (a - population));
  }
  r.variance = sq.value() / reps;
  r.mse = err.value() / reps;
  r.mc_se = std::sqrt(sq.value() / (reps - 1.0) / reps);
  r.apes = std::move(apes);
  return r;
}

McReport
run_mc(const McConfig& config)
{
  config.validate();
  const auto start = Clock::now();
  McReport report;
  if (config.population) {
    report.population = *config.population;
  } else {
    const auto t0 = Clock::now();
    report.population =
      population_effect(config.model, config.functional, config.pop_n, config.epsilon, config.base_seed);
    report.population_seconds = seconds_since(t0);
  }

  const std::size_t R = config.reps;
  const std::size_t M = config.methods.size();
  std::vector<double> apes(R * M);
  std::vector<double> secs(R * M);
  std::exception_ptr failure;
  std::size_t failed_rep = R;

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t rr = 0; rr < static_cast<std::ptrdiff_t>(R); ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    try {
      const auto data = dgp_draw({ config.model, 0.0 }, config.n, config.base_seed,
                                 stream_id(StreamPurpose::Data, r));
      SplineOptions spline;
      spline.n_star = config.n_star;
      spline.knots = config.knots;
      spline.seed = config.base_seed;
      spline.stream = stream_id(StreamPurpose::Subsample, r);
      spline.reference = config.reference;
      for (std::size_t m = 0; m < M; ++m) {
        const auto t0 = Clock::now();
        const auto fit = rif_regress(data, config.functional, config.methods[m], config.spec, spline,
                                     config.strategy);
        secs[r * M + m] = seconds_since(t0);
        apes[r * M + m] = fit.ape.at(0);
      }
    } catch (...) {
#pragma omp critical(rsc_mc_failure)
      if (r < failed_rep) {
        failed_rep = r;
        failure = std::current_exception();
      }
    }
  }
  if (failure) {
    const std::string where = "replication " + std::to_string(failed_rep) + " (seed " +
                              std::to_string(config.base_seed) + ", data stream " +
                              std::to_string(stream_id(StreamPurpose::Data, failed_rep)) + ")";
    try {
      std::rethrow_exception(failure);
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
  }

  for (std::size_t m = 0; m < M; ++m) {
    std::vector<double> column(R);
    double total = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      column[r] = apes[r * M + m];
      total += secs[r * M + m];
    }
    auto result = summarize(config.methods[m], std::move(column), report.population);
    result.seconds = total;
    report.methods.push_back(std::move(result));
  }
  report.seconds = seconds_since(start);
  return report;
}

std::vector<TimingRow>
bench_timing(const Functional& f,
             const std::vector<std::size_t>& sizes,
             double frac,
             std::size_t reps,
             std::uint64_t seed,
             ScReference reference)
{
  if (reps == 0)
    detail::fail(ErrorCode::InvalidArgument, "at least one timing replication is needed");
  if (!(frac > 0.0 && frac <= 1.0))
    detail::fail(ErrorCode::InvalidArgument, "subsample fraction must lie in (0, 1]");
  std::vector<TimingRow> rows;
  for (std::size_t n : sizes) {
    TimingRow row;
    row.n = n;
    row.n_star = std::max<std::size_t>(kDefaultKnots, static_cast<std::size_t>(std::lround(frac * static_cast<double>(n))));
    if (row.n_star > n)
      detail::fail(ErrorCode::InvalidArgument, "subsample larger than the sample");
    auto full = [&](const Sample& y) { return rsc_full(f, y, LooStrategy::Exact); };
    auto spline = [&](const Sample& y, std::uint64_t stream) {
      const auto model = fit_spline_rsc(f, y, row.n_star, kDefaultKnots, seed, stream, LooStrategy::Exact, reference);
      return interpolate(model, y);
    };
    const auto bench = [&](std::size_t r) { return stream_id(StreamPurpose::Bench, r); };
    {
      const Sample warm(dgp_outcomes({}, n, seed, bench(reps)));
      full(warm);
      spline(warm, stream_id(StreamPurpose::Subsample, reps));
    }
    for (std::size_t r = 0; r < reps; ++r) {
      const Sample y(dgp_outcomes({}, n, seed, bench(r)));
      auto t0 = Clock::now();
      full(y);
      row.rsc_seconds += seconds_since(t0);
      t0 = Clock::now();
      spline(y, stream_id(StreamPurpose::Subsample, r));
      row.spline_seconds += seconds_since(t0);
    }
    row.rsc_seconds /= static_cast<double>(reps);
    row.spline_seconds /= static_cast<double>(reps);
    row.ratio = row.spline_seconds / row.rsc_seconds;
    rows.push_back(row);
  }
  return rows;
}

} // namespace rsc
