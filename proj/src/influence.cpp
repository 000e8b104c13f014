#include "rsc/influence.hpp"

#include "internal.hpp"
#include "kernel_sums.hpp"

#include <cmath>
#include <exception>
#include <numeric>

namespace rsc {

std::string_view
to_string(InfluenceMethod method) noexcept
{
  switch (method) {
    case InfluenceMethod::AnalyticRif: return "RIF";
    case InfluenceMethod::LooRsc: return "RSC";
    case InfluenceMethod::SplineRsc: return "RSC(sp)";
  }
  return "?";
}

LooStrategy
resolve_strategy(const Functional& f, std::size_t, LooStrategy requested) noexcept
{
  if (requested != LooStrategy::Auto)
    return requested;
  if (f.kind == Functional::Kind::Der)
    return LooStrategy::Exact;
  return LooStrategy::Incremental;
}

std::vector<double>
analytic_if(const Functional& f, const Sample& data)
{
  const auto y = data.values();
  const std::size_t n = y.size();
  const double mu = data.mean();
  std::vector<double> out(n);
  switch (f.kind) {
    case Functional::Kind::Mean:
      for (std::size_t i = 0; i < n; ++i)
        out[i] = y[i] - mu;
      break;
    case Functional::Kind::Variance: {
      const double var = eval(f, data);
      for (std::size_t i = 0; i < n; ++i)
        out[i] = (y[i] - mu) * (y[i] - mu) - var;
      break;
    }
    case Functional::Kind::Quantile: {
      const double q = eval(f, data);
      const double point[1] = { q };
      const double dens = kde_at(data, point, f.kde)[0];
      if (!(dens > 0.0))
        detail::fail(ErrorCode::DegenerateBandwidth, "density at the quantile is zero");
      for (std::size_t i = 0; i < n; ++i)
        out[i] = (f.tau - (y[i] <= q ? 1.0 : 0.0)) / dens;
      break;
    }
    case Functional::Kind::Gini: {
      const double g = eval(f, data);
      if (mu == 0.0)
        detail::fail(ErrorCode::DegenerateSample, "Gini influence undefined for zero mean");
      const auto a = der_alienation(data.sorted());
      for (std::size_t i = 0; i < n; ++i)
        out[i] = (a.a_hat[data.rank_of(i)] - g * (y[i] + mu)) / mu;
      break;
    }
    case Functional::Kind::Der:
      detail::fail(ErrorCode::NoAnalyticForm, "no analytic influence function for " + f.name());
  }
  return out;
}

InfluenceVector
analytic_rif(const Functional& f, const Sample& data)
{
  InfluenceVector out{ analytic_if(f, data), eval(f, data), InfluenceMethod::AnalyticRif, f };
  //! mu + (y - mu) need not round back to y
  if (f.kind == Functional::Kind::Mean) {
    out.values.assign(data.values().begin(), data.values().end());
    return out;
  }
  for (double& v : out.values)
    v += out.v_n;
  return out;
}

namespace {

void
check_loo_size(const Functional& f, std::size_t n)
{
  const std::size_t need = f.kind == Functional::Kind::Der ? 4 : 3;
  if (n < need)
    detail::fail(ErrorCode::TooFewObservations,
                 "leave-one-out " + f.name() + " needs at least " + std::to_string(need) + " observations");
}

bool
frozen(const Functional& f)
{
  return f.kind == Functional::Kind::Der && f.kde.loo == KdeConfig::LooBandwidth::Freeze;
}

//! v(F_n^(j)) by recomputation. frozen_h is the full-sample raw bandwidth,
//! used only under the Freeze policy.
double
loo_value_exact(const Functional& f, const Sample& data, std::size_t j, double frozen_h)
{
  const auto view = data.leave_one_out(j);
  if (!frozen(f))
    return eval(f, view);
  thread_local std::vector<double> buffer;
  view.copy_sorted(buffer);
  const double p = der_index_sorted(buffer, f.alpha, frozen_h);
  return f.normalize_mean ? p * std::pow(detail::mean_of(buffer), f.alpha - 1.0) : p;
}

//! Runs body(k) for k < count in parallel and rethrows the first failure.
template<class Body>
void
parallel_for(std::size_t count, Body&& body)
{
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(count); ++k) {
    try {
      body(static_cast<std::size_t>(k));
    } catch (...) {
#pragma omp critical(rsc_loo_failure)
      if (!failure)
        failure = std::current_exception();
    }
  }
  if (failure)
    std::rethrow_exception(failure);
}

// Incremental downdates. Each returns v(F_n^(j)) for original index j.

class Downdate
{
public:
  Downdate(const Functional& f, const Sample& data, double v_n)
    : f_(f)
    , data_(data)
    , y_(data.sorted())
    , n_(static_cast<double>(data.size()))
    , v_n_(v_n)
    , mu_(detail::mean_of(y_))
  {
    switch (f.kind) {
      case Functional::Kind::Variance: m2_ = detail::sum_sq_dev(y_, mu_); break;
      case Functional::Kind::Gini: {
        detail::CompensatedSum num;
        for (std::size_t i = 0; i < y_.size(); ++i)
          num.add((2.0 * static_cast<double>(i + 1) - n_ - 1.0) * y_[i]);
        pair_sum_ = 2.0 * num.value();
        alien_ = der_alienation(y_).a_hat;
        break;
      }
      case Functional::Kind::Quantile:
        loo_index_ = quantile_type1_index(data.size() - 1, f.tau) - 1;
        break;
      default: break;
    }
  }

  //! SC(y_j)
  double sc(std::size_t j) const
  {
    const std::size_t r = data_.rank_of(j);
    const double yj = y_[r];
    switch (f_.kind) {
      case Functional::Kind::Mean: return n_ * (yj - mu_) / (n_ - 1.0);
      case Functional::Kind::Variance: {
        const double d = yj - mu_;
        const double m2 = std::max(m2_ - d * d * n_ / (n_ - 1.0), 0.0);
        return n_ * (v_n_ - m2 / (n_ - 1.0));
      }
      case Functional::Kind::Gini: {
        const double pairs = pair_sum_ - 2.0 * n_ * alien_[r];
        const double mu_j = (n_ * mu_ - yj) / (n_ - 1.0);
        double g = 0.0;
        if (pairs > 0.0) {
          if (mu_j == 0.0)
            detail::fail(ErrorCode::DegenerateSample, "Gini index undefined for zero mean");
          g = pairs / (2.0 * (n_ - 1.0) * (n_ - 1.0) * mu_j);
        }
        return n_ * (v_n_ - g);
      }
      case Functional::Kind::Quantile: {
        const std::size_t k = loo_index_ < r ? loo_index_ : loo_index_ + 1;
        return n_ * (v_n_ - y_[k]);
      }
      case Functional::Kind::Der: break;
    }
    return 0.0;
  }

private:
  const Functional& f_;
  const Sample& data_;
  std::span<const double> y_;
  double n_;
  double v_n_;
  double mu_;
  double m2_ = 0.0;
  double pair_sum_ = 0.0;
  std::vector<double> alien_;
  std::size_t loo_index_ = 0;
};

// DER without refitting: the full-sample kernel sums at h and their
// h-derivatives give the reduced-sample sums at h_j by a third-order
// expansion, after which row j is removed exactly.
class DerDowndate
{
public:
  DerDowndate(const Functional& f, const Sample& data)
    : f_(f)
    , data_(data)
    , y_(data.sorted())
    , n_(data.size())
    , mu_(detail::mean_of(y_))
    , m2_(detail::sum_sq_dev(y_, mu_))
    , h_(der_raw_bandwidth(f, y_, mu_))
    , alien_(der_alienation(y_).a_hat)
  {
    if (f.alpha == 0.0)
      return;
    if (constant_h()) {
      moments_.s0 = gauss_sums(y_, h_);
    } else {
      moments_ = gauss_moments(y_, h_);
    }
  }

  double value(std::size_t j) const
  {
    const std::size_t r = data_.rank_of(j);
    const double yj = y_[r];
    const double nd = static_cast<double>(n_);
    const double m = nd - 1.0;
    const double mu_j = (nd * mu_ - yj) / m;
    if (f_.normalize_mean && !(mu_j > 0.0))
      detail::fail(ErrorCode::DegenerateSample, "mean normalization needs a positive mean");

    detail::CompensatedSum acc;
    if (f_.alpha == 0.0) {
      for (std::size_t i = 0; i < n_; ++i)
        if (i != r)
          acc.add((nd * alien_[i] - std::abs(y_[i] - yj)) / m);
    } else {
      const double hj = loo_bandwidth(r, mu_j);
      thread_local std::vector<double> row;
      row.resize(n_);
      detail::gauss_row(y_.data(), n_, hj, yj, row.data());
      const double d = (hj - h_) / h_;
      const double c1 = d, c2 = d * d / 2.0, c3 = d * d * d / 6.0;
      const double norm = 1.0 / (m * hj * std::sqrt(2.0 * M_PI));
      const bool shifted = d != 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (i == r)
          continue;
        double s = moments_.s0[i];
        if (shifted) {
          const double s2 = moments_.s2[i], s4 = moments_.s4[i], s6 = moments_.s6[i];
          s += c1 * s2 + c2 * (s4 - 3.0 * s2) + c3 * (s6 - 9.0 * s4 + 12.0 * s2);
        }
        s -= row[i];
        const double a = (nd * alien_[i] - std::abs(y_[i] - yj)) / m;
        acc.add(power_alpha(norm * std::max(s, 0.0), f_.alpha) * a);
      }
    }
    const double p = acc.value() / m;
    return f_.normalize_mean ? p * std::pow(mu_j, f_.alpha - 1.0) : p;
  }

private:
  bool constant_h() const
  {
    return frozen(f_) || (f_.kde.rule == KdeConfig::Rule::Fixed && !f_.normalize_mean);
  }

  double loo_bandwidth(std::size_t r, double mu_j) const
  {
    if (constant_h())
      return h_;
    if (f_.kde.rule == KdeConfig::Rule::Fixed)
      return f_.kde.h * mu_j;
    const double nd = static_cast<double>(n_);
    const double d = y_[r] - mu_;
    const double m2 = std::max(m2_ - d * d * nd / (nd - 1.0), 0.0);
    const double sd = std::sqrt(m2 / (nd - 2.0));
    auto at = [&](std::size_t k) { return y_[k < r ? k : k + 1]; };
    const double iqr = detail::quantile_type7(at, n_ - 1, 0.75) - detail::quantile_type7(at, n_ - 1, 0.25);
    return silverman_bandwidth(sd, iqr, n_ - 1);
  }

  const Functional& f_;
  const Sample& data_;
  std::span<const double> y_;
  std::size_t n_;
  double mu_;
  double m2_;
  double h_;
  std::vector<double> alien_;
  GaussMoments moments_;
};

} // namespace

double
sc_at(const Functional& f, const Sample& data, std::size_t j)
{
  check_loo_size(f, data.size());
  if (j >= data.size())
    detail::fail(ErrorCode::IndexOutOfRange, "observation index out of range");
  const double v_n = eval(f, data);
  const double h = frozen(f) ? der_raw_bandwidth(f, data.sorted(), data.mean()) : 0.0;
  return static_cast<double>(data.size()) * (v_n - loo_value_exact(f, data, j, h));
}

RscValues
rsc_subset(const Functional& f,
           const Sample& data,
           std::span<const std::size_t> indices,
           LooStrategy strategy)
{
  const std::size_t n = data.size();
  check_loo_size(f, n);
  for (std::size_t j : indices)
    if (j >= n)
      detail::fail(ErrorCode::IndexOutOfRange, "observation index out of range");

  RscValues out{ std::vector<double>(indices.size()), eval(f, data) };
  const double v_n = out.v_n;
  const double nd = static_cast<double>(n);
  strategy = resolve_strategy(f, n, strategy);

  if (strategy == LooStrategy::Exact) {
    const double h = frozen(f) ? der_raw_bandwidth(f, data.sorted(), data.mean()) : 0.0;
    parallel_for(indices.size(), [&](std::size_t k) {
      out.values[k] = v_n + nd * (v_n - loo_value_exact(f, data, indices[k], h));
    });
  } else if (f.kind == Functional::Kind::Der) {
    const DerDowndate dd(f, data);
    parallel_for(indices.size(), [&](std::size_t k) {
      out.values[k] = v_n + nd * (v_n - dd.value(indices[k]));
    });
  } else {
    const Downdate dd(f, data, v_n);
    for (std::size_t k = 0; k < indices.size(); ++k)
      out.values[k] = v_n + dd.sc(indices[k]);
  }
  return out;
}

InfluenceVector
rsc_full(const Functional& f, const Sample& data, LooStrategy strategy)
{
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{ 0 });
  auto r = rsc_subset(f, data, all, strategy);
  return { std::move(r.values), r.v_n, InfluenceMethod::LooRsc, f };
}

double
sc_if_gap(const Functional& f, const Sample& data)
{
  const auto influence = analytic_if(f, data);
  const auto rsc = rsc_full(f, data);
  double gap = 0.0;
  for (std::size_t i = 0; i < influence.size(); ++i)
    gap = std::max(gap, std::abs(rsc.values[i] - rsc.v_n - influence[i]));
  return gap;
}

} // namespace rsc
