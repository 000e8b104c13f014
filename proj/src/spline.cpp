#include "rsc/spline.hpp"

#include "internal.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>

namespace rsc {

std::vector<double>
knot_probabilities(std::size_t K)
{
  switch (K) {
    case 3: return { 0.10, 0.5, 0.90 };
    case 4: return { 0.05, 0.35, 0.65, 0.95 };
    case 5: return { 0.05, 0.275, 0.5, 0.725, 0.95 };
    case 6: return { 0.05, 0.23, 0.41, 0.59, 0.77, 0.95 };
    case 7: return { 0.025, 0.1833, 0.3417, 0.5, 0.6583, 0.8167, 0.975 };
    default: break;
  }
  if (K < 3)
    detail::fail(ErrorCode::InvalidArgument, "a restricted cubic spline needs at least 3 knots");
  std::vector<double> p(K);
  for (std::size_t j = 0; j < K; ++j)
    p[j] = 0.025 + 0.95 * static_cast<double>(j) / static_cast<double>(K - 1);
  return p;
}

KnotSet
select_knots(const Sample& data, std::size_t K)
{
  const auto probs = knot_probabilities(K);
  if (data.size() < K)
    detail::fail(ErrorCode::TooFewObservations, "fewer observations than knots");
  KnotSet out;
  for (double p : probs) {
    const double k = detail::quantile_type7(data.sorted(), p);
    if (out.knots.empty() || k > out.knots.back())
      out.knots.push_back(k);
  }
  if (out.size() < 3)
    detail::fail(ErrorCode::TooFewDistinctValues,
                 "only " + std::to_string(out.size()) + " distinct knot locations");
  return out;
}

void
rcs_basis(double y, const KnotSet& knots, std::span<double> out)
{
  const auto& k = knots.knots;
  const std::size_t K = k.size();
  auto cube = [](double v) { return v > 0.0 ? v * v * v : 0.0; };
  const double last = cube(y - k[K - 1]);
  const double penult = cube(y - k[K - 2]);
  const double span = k[K - 1] - k[K - 2];
  for (std::size_t j = 0; j + 2 < K; ++j)
    out[j] = cube(y - k[j]) - penult * (k[K - 1] - k[j]) / span + last * (k[K - 2] - k[j]) / span;
}

std::vector<double>
rcs_basis(double y, const KnotSet& knots)
{
  std::vector<double> out(knots.size() - 2);
  rcs_basis(y, knots, out);
  return out;
}

double
SplineFit::predict(double y) const
{
  thread_local std::vector<double> h;
  h.resize(gamma.size());
  rcs_basis(y, knots, h);
  double v = beta0 + beta1 * y;
  for (std::size_t j = 0; j < gamma.size(); ++j)
    v += gamma[j] * h[j];
  return v;
}

SplineFit
fit_rcs(const KnotSet& knots, std::span<const double> y, std::span<const double> target)
{
  const std::size_t K = knots.size();
  const std::size_t m = y.size();
  if (K < 3)
    detail::fail(ErrorCode::InvalidArgument, "a restricted cubic spline needs at least 3 knots");
  if (target.size() != m)
    detail::fail(ErrorCode::InvalidArgument, "spline target and points differ in length");

  // Columns y, h_1..h_{K-2}; the intercept is handled by centring.
  const auto cols = static_cast<Eigen::Index>(K - 1);
  Eigen::MatrixXd raw(static_cast<Eigen::Index>(m), cols);
  std::vector<double> h(K - 2);
  for (std::size_t i = 0; i < m; ++i) {
    rcs_basis(y[i], knots, h);
    raw(static_cast<Eigen::Index>(i), 0) = y[i];
    for (std::size_t j = 0; j + 2 < K; ++j)
      raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = h[j];
  }
  const Eigen::Map<const Eigen::VectorXd> t(target.data(), static_cast<Eigen::Index>(m));
  const double t_mean = t.mean();
  const Eigen::VectorXd tc = t.array() - t_mean;
  const Eigen::RowVectorXd centre = raw.colwise().mean();
  Eigen::MatrixXd scaled = raw.rowwise() - centre;
  Eigen::RowVectorXd scale(cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    scale(c) = scaled.col(c).norm();
    if (scale(c) > 0.0)
      scaled.col(c) /= scale(c);
  }

  SplineFit fit;
  fit.knots = knots;
  fit.gamma.assign(K - 2, 0.0);
  for (Eigen::Index keep = cols; keep >= 2; --keep) {
    const auto X = scaled.leftCols(keep);
    bool usable = (scale.head(keep).array() > 0.0).all();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    if (usable) {
      qr.setThreshold(1e-10);
      qr.compute(X);
      usable = qr.rank() == keep;
    }
    if (!usable)
      continue;
    const Eigen::VectorXd b = qr.solve(tc);
    fit.dropped_columns = static_cast<std::size_t>(cols - keep);
    fit.beta1 = b(0) / scale(0);
    double intercept = t_mean - fit.beta1 * centre(0);
    for (Eigen::Index c = 1; c < keep; ++c) {
      const double g = b(c) / scale(c);
      fit.gamma[static_cast<std::size_t>(c - 1)] = g;
      intercept -= g * centre(c);
    }
    fit.beta0 = intercept;
    const double ss_tot = tc.squaredNorm();
    const double ss_res = (tc - X * b).squaredNorm();
    fit.fit_r2 = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
    return fit;
  }
  detail::fail(ErrorCode::SingularDesign, "spline design is singular on the fitting points");
}

std::vector<std::size_t>
draw_subsample(std::size_t n, std::size_t n_star, std::uint64_t seed, std::uint64_t stream)
{
  if (n_star > n)
    detail::fail(ErrorCode::InvalidArgument, "subsample larger than the sample");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{ 0 });
  RandomStream rng(seed, stream);
  for (std::size_t k = 0; k < n_star; ++k)
    std::swap(idx[k], idx[k + rng.below(n - k)]);
  idx.resize(n_star);
  std::sort(idx.begin(), idx.end());
  return idx;
}

SplineModel
fit_spline_rsc(const Functional& f,
               const Sample& data,
               std::size_t n_star,
               std::size_t K,
               std::uint64_t seed,
               std::uint64_t stream,
               LooStrategy strategy,
               ScReference reference)
{
  if (n_star < K || n_star > data.size())
    detail::fail(ErrorCode::InvalidArgument,
                 "subsample size must lie between the knot count and n");
  SplineModel model;
  const auto knots = select_knots(data, K);
  model.subsample_indices = draw_subsample(data.size(), n_star, seed, stream);
  std::vector<double> y(n_star);
  for (std::size_t k = 0; k < n_star; ++k)
    y[k] = data.values()[model.subsample_indices[k]];
  std::vector<double> target;
  if (reference == ScReference::FullSample) {
    auto rsc = rsc_subset(f, data, model.subsample_indices, strategy);
    target = std::move(rsc.values);
    model.v_n = rsc.v_n;
  } else {
    const auto inner = rsc_full(f, Sample(y), strategy);
    model.v_n = eval(f, data);
    target = inner.values;
    for (double& t : target)
      t += model.v_n - inner.v_n;
  }
  static_cast<SplineFit&>(model) = fit_rcs(knots, y, target);
  model.functional = f;
  return model;
}

InfluenceVector
interpolate(const SplineModel& model, const Sample& data)
{
  InfluenceVector out{ std::vector<double>(data.size()), model.v_n, InfluenceMethod::SplineRsc,
                       model.functional };
  const auto y = data.values();
  for (std::size_t i = 0; i < y.size(); ++i)
    out.values[i] = model.predict(y[i]);
  return out;
}

std::size_t
default_n_star(std::size_t n) noexcept
{
  const std::size_t tenth = n / 10;
  return std::min(std::clamp<std::size_t>(tenth, 200, 1000), n);
}

} // namespace rsc
