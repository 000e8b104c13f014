#include "rsc/functionals.hpp"

#include "internal.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace rsc {

Functional
Functional::mean()
{
  return {};
}

Functional
Functional::quantile(double tau, KdeConfig kde)
{
  if (!(tau > 0.0 && tau < 1.0))
    detail::fail(ErrorCode::InvalidArgument, "quantile tau must lie strictly inside (0, 1)");
  Functional f;
  f.kind = Kind::Quantile;
  f.tau = tau;
  f.kde = kde;
  return f;
}

Functional
Functional::variance()
{
  Functional f;
  f.kind = Kind::Variance;
  return f;
}

Functional
Functional::gini()
{
  Functional f;
  f.kind = Kind::Gini;
  return f;
}

Functional
Functional::der(double alpha, KdeConfig kde, bool normalize_mean)
{
  if (!(alpha >= 0.0 && alpha <= 1.0))
    detail::fail(ErrorCode::InvalidArgument, "DER alpha must lie in [0, 1]");
  Functional f;
  f.kind = Kind::Der;
  f.alpha = alpha;
  f.kde = kde;
  f.normalize_mean = normalize_mean;
  return f;
}

Functional
Functional::parse(std::string_view text)
{
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  double param = 0.0;
  const bool has_param = colon != std::string_view::npos;
  if (has_param) {
    const auto arg = text.substr(colon + 1);
    const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), param);
    if (ec != std::errc{} || ptr != arg.data() + arg.size())
      detail::fail(ErrorCode::InvalidArgument, "bad functional parameter in '" + std::string(text) + "'");
  }
  auto no_param = [&](Functional f) {
    if (has_param)
      detail::fail(ErrorCode::InvalidArgument, std::string(head) + " takes no parameter");
    return f;
  };
  if (head == "mean")
    return no_param(mean());
  if (head == "variance" || head == "var")
    return no_param(variance());
  if (head == "gini")
    return no_param(gini());
  if (head == "quantile" || head == "q")
    return quantile(has_param ? param : 0.5);
  if (head == "der")
    return der(has_param ? param : 0.5);
  detail::fail(ErrorCode::InvalidArgument, "unknown functional '" + std::string(text) + "'");
}

std::string
Functional::name() const
{
  std::ostringstream s;
  switch (kind) {
    case Kind::Mean: return "mean";
    case Kind::Variance: return "variance";
    case Kind::Gini: return "gini";
    case Kind::Quantile: s << "quantile:" << tau; break;
    case Kind::Der: s << "der:" << alpha; break;
  }
  return s.str();
}

// ---------------------------------------------------------------------------

std::size_t
quantile_type1_index(std::size_t n, double tau)
{
  // ceil(n tau) with a guard against n tau landing just above an integer
  const double t = static_cast<double>(n) * tau;
  double k = std::ceil(t);
  if (k - t > 1.0 - 1e-9)
    k -= 1.0;
  return std::clamp(static_cast<std::size_t>(k), std::size_t{ 1 }, n);
}

double
quantile_type1(std::span<const double> sorted, double tau)
{
  return sorted[quantile_type1_index(sorted.size(), tau) - 1];
}

namespace {

double
gini_sorted(std::span<const double> y)
{
  // sum_ij |y_i - y_j| = 2 sum_i (2i - n - 1) y_(i)
  const std::size_t n = y.size();
  const double nd = static_cast<double>(n);
  detail::CompensatedSum num;
  for (std::size_t i = 0; i < n; ++i)
    num.add((2.0 * static_cast<double>(i + 1) - nd - 1.0) * y[i]);
  const double mu = detail::mean_of(y);
  if (num.value() == 0.0)
    return 0.0;
  if (mu == 0.0)
    detail::fail(ErrorCode::DegenerateSample, "Gini index undefined for zero mean");
  return num.value() / (nd * nd * mu);
}

} // namespace

double
eval_sorted(const Functional& f, std::span<const double> sorted)
{
  const std::size_t n = sorted.size();
  if (n < 2)
    detail::fail(ErrorCode::TooFewObservations, "functional needs at least 2 observations");
  switch (f.kind) {
    case Functional::Kind::Mean: return detail::mean_of(sorted);
    case Functional::Kind::Quantile: return quantile_type1(sorted, f.tau);
    case Functional::Kind::Variance: {
      const double m = detail::mean_of(sorted);
      return detail::sum_sq_dev(sorted, m) / static_cast<double>(n);
    }
    case Functional::Kind::Gini: return gini_sorted(sorted);
    case Functional::Kind::Der: {
      if (n < 3)
        detail::fail(ErrorCode::TooFewObservations, "DER index needs at least 3 observations");
      const double m = detail::mean_of(sorted);
      const double h = der_raw_bandwidth(f, sorted, m);
      const double p = der_index_sorted(sorted, f.alpha, h);
      return f.normalize_mean ? p * std::pow(m, f.alpha - 1.0) : p;
    }
  }
  return 0.0;
}

double
eval(const Functional& f, const Sample& data)
{
  return eval_sorted(f, data.sorted());
}

double
eval(const Functional& f, const LeaveOneOutView& data)
{
  thread_local std::vector<double> buffer;
  data.copy_sorted(buffer);
  return eval_sorted(f, buffer);
}

double
der_raw_bandwidth(const Functional& f, std::span<const double> sorted, double mean)
{
  if (f.normalize_mean && !(mean > 0.0))
    detail::fail(ErrorCode::DegenerateSample, "mean normalization needs a positive mean");
  if (f.kde.rule == KdeConfig::Rule::Fixed)
    return f.normalize_mean ? bandwidth(sorted, f.kde) * mean : bandwidth(sorted, f.kde);
  // Silverman's rule is scale equivariant, so normalizing does not change it
  return bandwidth(sorted, f.kde);
}

// ---------------------------------------------------------------------------

double
AlienationVector::mean() const
{
  return detail::mean_of(a_hat);
}

AlienationVector
der_alienation(std::span<const double> y)
{
  const std::size_t n = y.size();
  if (n < 2)
    detail::fail(ErrorCode::TooFewObservations, "alienation needs at least 2 observations");
  const double nd = static_cast<double>(n);
  const double mu = detail::mean_of(y);
  AlienationVector out{ std::vector<double>(n) };
  double below = 0.0; // sum_{j < i} y_j
  for (std::size_t i = 0; i < n; ++i) {
    const double rank = static_cast<double>(i + 1);
    out.a_hat[i] = mu + y[i] * ((2.0 * rank - 1.0) / nd - 1.0) - (2.0 * below + y[i]) / nd;
    below += y[i];
  }
  return out;
}

AlienationVector
der_alienation(const Sample& data)
{
  return der_alienation(data.sorted());
}

AlienationVector
der_alienation(const LeaveOneOutView& data)
{
  std::vector<double> buffer;
  data.copy_sorted(buffer);
  return der_alienation(buffer);
}

double
der_index_sorted(std::span<const double> sorted, double alpha, double h)
{
  const std::size_t n = sorted.size();
  const auto a = der_alienation(sorted);
  const double nd = static_cast<double>(n);
  detail::CompensatedSum acc;
  if (alpha == 0.0) {
    for (double v : a.a_hat)
      acc.add(v);
    return acc.value() / nd;
  }
  const auto s = gauss_sums(sorted, h);
  const double norm = 1.0 / (nd * h * std::sqrt(2.0 * M_PI));
  for (std::size_t i = 0; i < n; ++i)
    acc.add(power_alpha(norm * s[i], alpha) * a.a_hat[i]);
  return acc.value() / nd;
}

double
der_index(const Sample& data, double alpha, const KdeConfig& config)
{
  if (data.size() < 3)
    detail::fail(ErrorCode::TooFewObservations, "DER index needs at least 3 observations");
  return der_index_sorted(data.sorted(), alpha, bandwidth(data.sorted(), config));
}

double
der_index(const LeaveOneOutView& data, double alpha, const KdeConfig& config)
{
  std::vector<double> buffer;
  data.copy_sorted(buffer);
  if (buffer.size() < 3)
    detail::fail(ErrorCode::TooFewObservations, "DER index needs at least 3 observations");
  return der_index_sorted(buffer, alpha, bandwidth(buffer, config));
}

} // namespace rsc
