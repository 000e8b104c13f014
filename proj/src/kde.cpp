#include "rsc/kde.hpp"

#include "internal.hpp"
#include "kernel_sums.hpp"

#include <array>
#include <cmath>

namespace rsc {

KdeConfig
KdeConfig::fixed(double h)
{
  if (!(h > 0.0) || !std::isfinite(h))
    detail::fail(ErrorCode::InvalidArgument, "fixed bandwidth must be positive");
  KdeConfig c;
  c.rule = Rule::Fixed;
  c.h = h;
  return c;
}

double
silverman_bandwidth(double sd, double iqr, std::size_t n)
{
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0))
    spread = sd;
  if (!(spread > 0.0))
    detail::fail(ErrorCode::DegenerateBandwidth, "Silverman bandwidth is zero: no spread in the data");
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

double
bandwidth(std::span<const double> sorted, const KdeConfig& config)
{
  if (config.rule == KdeConfig::Rule::Fixed) {
    if (!(config.h > 0.0))
      detail::fail(ErrorCode::DegenerateBandwidth, "fixed bandwidth must be positive");
    return config.h;
  }
  const std::size_t n = sorted.size();
  if (n < 3)
    detail::fail(ErrorCode::TooFewObservations, "kernel density needs at least 3 observations");
  const double m = detail::mean_of(sorted);
  const double sd = std::sqrt(detail::sum_sq_dev(sorted, m) / static_cast<double>(n - 1));
  const double iqr = detail::quantile_type7(sorted, 0.75) - detail::quantile_type7(sorted, 0.25);
  return silverman_bandwidth(sd, iqr, n);
}

std::vector<double>
kde_at(const Sample& data, std::span<const double> points, const KdeConfig& config)
{
  const auto sorted = data.sorted();
  const double h = bandwidth(sorted, config);
  const double norm = 1.0 / (static_cast<double>(sorted.size()) * h * std::sqrt(2.0 * M_PI));
  std::vector<double> out(points.size());
  //! compensated, so the value does not depend on the summation order
  for (std::size_t i = 0; i < points.size(); ++i) {
    detail::CompensatedSum acc;
    for (double v : sorted) {
      const double t = (points[i] - v) / h;
      acc.add(std::exp(-0.5 * t * t));
    }
    out[i] = norm * acc.value();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Box-wise expansion. In units x = y / (sqrt(2) h) the kernel is
// exp(-(x_i - x_k)^2). Sources are grouped in boxes of width 0.5 with
// centre c; for a = x_i - c and b = x_k - c,
//   exp(-(a - b)^2) = exp(-a^2) exp(-b^2) sum_m (2a)^m / m! b^m,
// so every box is summarized by moments A_m = sum_k exp(-b_k^2) b_k^m.
// With |b| <= 1/4 and boxes farther than 7.6 skipped, 24 terms put the
// truncation error below 1e-17 of the self term.

namespace {

constexpr double kBoxWidth = 0.5;
constexpr double kReach = 7.6;
constexpr int kTerms = 24;

template<int Extra>
void
expansion_sums(std::span<const double> y,
               double h,
               double* s0,
               double* s2,
               double* s4,
               double* s6)
{
  constexpr int kMoments = kTerms + Extra;
  const std::size_t n = y.size();
  const double scale = 1.0 / (std::sqrt(2.0) * h);
  const double x0 = y.front() * scale;
  const auto box_of = [&](double x) {
    return static_cast<std::size_t>(std::floor((x - x0) / kBoxWidth));
  };
  const std::size_t boxes = box_of(y.back() * scale) + 1;
  const auto centre = [&](std::size_t b) {
    return x0 + (static_cast<double>(b) + 0.5) * kBoxWidth;
  };

  std::vector<std::array<double, kMoments>> moments(boxes);
  for (auto& m : moments)
    m.fill(0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = y[k] * scale;
    const std::size_t b = std::min(box_of(x), boxes - 1);
    const double beta = x - centre(b);
    double p = std::exp(-beta * beta);
    auto& m = moments[b];
    for (int j = 0; j < kMoments; ++j) {
      m[j] += p;
      p *= beta;
    }
  }

  std::array<double, kTerms> coef{};
  std::array<double, Extra + 1> tq{};
  for (std::size_t i = 0; i < n; ++i) {
    const double x = y[i] * scale;
    const double lo = std::max(0.0, std::floor((x - kReach - x0) / kBoxWidth));
    const std::size_t b_lo = static_cast<std::size_t>(lo);
    const std::size_t b_hi = std::min(boxes - 1, box_of(x + kReach));
    double acc0 = 0.0, acc2 = 0.0, acc4 = 0.0, acc6 = 0.0;
    for (std::size_t b = b_lo; b <= b_hi; ++b) {
      const double a = x - centre(b);
      if (std::abs(a) > kReach)
        continue;
      const double ea = std::exp(-a * a);
      double c = 1.0;
      for (int m = 0; m < kTerms; ++m) {
        coef[m] = c;
        c *= 2.0 * a / static_cast<double>(m + 1);
      }
      const auto& mom = moments[b];
      for (int q = 0; q <= Extra; ++q) {
        double s = 0.0;
        for (int m = kTerms - 1; m >= 0; --m)
          s += coef[m] * mom[m + q];
        tq[q] = ea * s;
      }
      acc0 += tq[0];
      if constexpr (Extra >= 6) {
        // sum exp(-(a-b)^2) (a-b)^r from the binomial expansion; t^2 = 2 (a-b)^2
        const double a2 = a * a, a3 = a2 * a, a4 = a3 * a, a5 = a4 * a, a6 = a5 * a;
        const double d2 = a2 * tq[0] - 2.0 * a * tq[1] + tq[2];
        const double d4 = a4 * tq[0] - 4.0 * a3 * tq[1] + 6.0 * a2 * tq[2] - 4.0 * a * tq[3] + tq[4];
        const double d6 = a6 * tq[0] - 6.0 * a5 * tq[1] + 15.0 * a4 * tq[2] - 20.0 * a3 * tq[3] +
                          15.0 * a2 * tq[4] - 6.0 * a * tq[5] + tq[6];
        acc2 += 2.0 * d2;
        acc4 += 4.0 * d4;
        acc6 += 8.0 * d6;
      }
    }
    s0[i] = acc0;
    if constexpr (Extra >= 6) {
      s2[i] = acc2;
      s4[i] = acc4;
      s6[i] = acc6;
    }
  }
}

bool
use_expansion(std::size_t n, SumMethod method)
{
  return method == SumMethod::Expansion ||
         (method == SumMethod::Auto && n > kExpansionThreshold);
}

void
check_sums_input(std::span<const double> sorted, double h)
{
  if (sorted.empty())
    detail::fail(ErrorCode::TooFewObservations, "kernel sums need data");
  if (!(h > 0.0) || !std::isfinite(h))
    detail::fail(ErrorCode::DegenerateBandwidth, "bandwidth must be positive");
}

} // namespace

std::vector<double>
gauss_sums(std::span<const double> sorted, double h, SumMethod method)
{
  check_sums_input(sorted, h);
  std::vector<double> s0(sorted.size());
  if (use_expansion(sorted.size(), method))
    expansion_sums<0>(sorted, h, s0.data(), nullptr, nullptr, nullptr);
  else
    detail::gauss_sums_direct(sorted.data(), sorted.size(), h, s0.data());
  return s0;
}

GaussMoments
gauss_moments(std::span<const double> sorted, double h, SumMethod method)
{
  check_sums_input(sorted, h);
  const std::size_t n = sorted.size();
  GaussMoments g{ std::vector<double>(n), std::vector<double>(n), std::vector<double>(n),
                  std::vector<double>(n) };
  if (use_expansion(n, method))
    expansion_sums<6>(sorted, h, g.s0.data(), g.s2.data(), g.s4.data(), g.s6.data());
  else
    detail::gauss_moments_direct(sorted.data(), n, h, g.s0.data(), g.s2.data(), g.s4.data(),
                                 g.s6.data());
  return g;
}

} // namespace rsc
