#pragma once

#include "rsc/kde.hpp"
#include "rsc/sample.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rsc {

//! A distributional statistic v(F) evaluated as a plug-in on F_n.
struct Functional
{
  enum class Kind
  {
    Mean,
    Quantile,
    Variance,
    Gini,
    Der
  };

  Kind kind = Kind::Mean;
  double tau = 0.5;   //!< Quantile probability, strictly inside (0, 1)
  double alpha = 0.5; //!< DER identification exponent; [0.25, 1] is the axiomatic range
  //! DER only: divide the data by its mean before evaluating, which makes
  //! the index scale invariant (and P_0 = 2 Gini).
  bool normalize_mean = false;
  KdeConfig kde;      //!< DER density, and the quantile influence function

  static Functional mean();
  static Functional quantile(double tau, KdeConfig kde = {});
  static Functional variance();
  static Functional gini();
  static Functional der(double alpha, KdeConfig kde = {}, bool normalize_mean = false);

  //! Parses "mean", "variance", "gini", "quantile:TAU", "der:ALPHA".
  //! Throws InvalidArgument.
  static Functional parse(std::string_view text);

  std::string name() const;

  //! Mean, Quantile, Variance and Gini have closed-form influence functions.
  bool has_analytic_if() const noexcept { return kind != Kind::Der; }
};

double
eval(const Functional& f, const Sample& data);

double
eval(const Functional& f, const LeaveOneOutView& data);

//! Evaluation on an explicit sorted sequence (n >= 2).
double
eval_sorted(const Functional& f, std::span<const double> sorted);

//! Type-1 empirical quantile: y_(ceil(n tau)).
double
quantile_type1(std::span<const double> sorted, double tau);

//! 1-based order statistic index used by quantile_type1.
std::size_t
quantile_type1_index(std::size_t n, double tau);

//! Alienation a(y_i) = (1/n) sum_k |y_i - y_k| in sorted order, computed
//! with one prefix-sum pass:
//!   a_i = mu + y_i ((2i - 1)/n - 1) - (2 sum_{j<i} y_j + y_i)/n.
struct AlienationVector
{
  std::vector<double> a_hat;

  double mean() const;
};

AlienationVector
der_alienation(std::span<const double> sorted);

AlienationVector
der_alienation(const Sample& data);

AlienationVector
der_alienation(const LeaveOneOutView& data);

//! P_alpha = (1/n) sum_i f(y_i)^alpha a(y_i) on the raw data, f the
//! Gaussian KDE at the sample points.
double
der_index(const Sample& data, double alpha, const KdeConfig& config);

double
der_index(const LeaveOneOutView& data, double alpha, const KdeConfig& config);

//! The index for a given raw-unit bandwidth; the building block of the
//! other DER entry points.
double
der_index_sorted(std::span<const double> sorted, double alpha, double h);

//! Raw-unit bandwidth used by a DER functional on this data: the rule is
//! applied in normalized units when normalize_mean is set.
double
der_raw_bandwidth(const Functional& f, std::span<const double> sorted, double mean);

//! f^alpha with exact shortcuts for alpha in {0, 1/2, 1}.
inline double
power_alpha(double f, double alpha)
{
  if (alpha == 0.0)
    return 1.0;
  if (alpha == 0.5)
    return std::sqrt(f);
  if (alpha == 1.0)
    return f;
  return std::pow(f, alpha);
}

} // namespace rsc
