#pragma once

#include "rsc/functionals.hpp"
#include "rsc/influence.hpp"
#include "rsc/random.hpp"
#include "rsc/sample.hpp"
#include "rsc/spline.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rsc {

//! Polynomial specification of the outer regression.
//!   Linear     1, x_1..x_p
//!   Quadratic  adds x_k^2 for every non-binary covariate and all pairwise
//!              interactions x_k x_l
//!   Cubic      additionally x_k^3 for every non-binary covariate
//!   Custom     the builder maps one covariate row to a design row
//!              (intercept included).
struct ModelSpec
{
  enum class Form
  {
    Linear,
    Quadratic,
    Cubic,
    Custom
  };

  using RowBuilder = std::function<void(std::span<const double> x, std::span<double> row)>;

  Form form = Form::Linear;
  RowBuilder builder;
  std::vector<std::string> custom_terms;

  static ModelSpec linear() { return {}; }
  static ModelSpec quadratic() { return { Form::Quadratic, {}, {} }; }
  static ModelSpec cubic() { return { Form::Cubic, {}, {} }; }
  static ModelSpec custom(RowBuilder builder, std::vector<std::string> terms);

  //! "linear", "quad"/"quadratic", "cubic"; throws InvalidArgument.
  static ModelSpec parse(std::string_view text);

  std::string name() const;
};

//! Column layout of a design built from a spec.
struct Design
{
  std::vector<std::string> terms;
  ModelSpec::RowBuilder row; //!< covariate row -> design row
};

Design
make_design(const ModelSpec& spec,
            const Eigen::MatrixXd& covariates,
            const std::vector<std::string>& names);

Eigen::MatrixXd
design_matrix(const Design& design, const Eigen::MatrixXd& covariates);

struct EffectReport
{
  std::vector<std::string> terms;
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance; //!< HC1
  std::vector<std::string> covariate_names;
  std::vector<double> ape;    //!< average partial effect per covariate
  std::vector<double> se_ape; //!< delta method on the HC1 covariance
  std::size_t n_used = 0;
  double r2 = 0.0;
  ModelSpec spec;
  InfluenceMethod method = InfluenceMethod::AnalyticRif;
  double v_n = 0.0; //!< full-sample functional value (0 for plain OLS)

  std::vector<double> se() const;
};

//! OLS of y on the spec's design with HC1 covariance; fills the APEs.
//! Throws RankDeficientDesign.
EffectReport
ols(std::span<const double> y,
    const ModelSpec& spec,
    const Eigen::MatrixXd& covariates,
    const std::vector<std::string>& names);

struct PartialEffects
{
  std::vector<double> ape;
  std::vector<double> se;
};

//! Single covariate polynomials use the closed forms b, b + 2c mean(X),
//! b + 2c mean(X) + 3d mean(X^2). Everything else uses the average central
//! difference of the fitted mean with step 1e-5 sd(X_k). Throws SpecMismatch
//! if the covariates do not reproduce the report's design.
PartialEffects
average_partial_effect(const EffectReport& report, const Eigen::MatrixXd& covariates);

struct SplineOptions
{
  std::size_t n_star = 0; //!< 0 picks default_n_star(n)
  std::size_t knots = kDefaultKnots;
  std::uint64_t seed = 1;
  std::uint64_t stream = stream_id(StreamPurpose::Subsample, 0);
  ScReference reference = ScReference::FullSample;
};

InfluenceVector
influence(const Dataset& data,
          const Functional& f,
          InfluenceMethod method,
          const SplineOptions& spline = {},
          LooStrategy strategy = LooStrategy::Auto);

//! Influence values for the chosen method regressed on the covariates.
EffectReport
rif_regress(const Dataset& data,
            const Functional& f,
            InfluenceMethod method,
            const ModelSpec& spec,
            const SplineOptions& spline = {},
            LooStrategy strategy = LooStrategy::Auto);

} // namespace rsc
