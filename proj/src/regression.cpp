#include "rsc/regression.hpp"

#include "internal.hpp"

#include <algorithm>
#include <cmath>

namespace rsc {

ModelSpec
ModelSpec::custom(RowBuilder builder, std::vector<std::string> terms)
{
  if (!builder || terms.empty())
    detail::fail(ErrorCode::InvalidArgument, "custom design needs a builder and term names");
  return { Form::Custom, std::move(builder), std::move(terms) };
}

ModelSpec
ModelSpec::parse(std::string_view text)
{
  if (text == "linear")
    return linear();
  if (text == "quad" || text == "quadratic")
    return quadratic();
  if (text == "cubic")
    return cubic();
  detail::fail(ErrorCode::InvalidArgument, "unknown model spec '" + std::string(text) + "'");
}

std::string
ModelSpec::name() const
{
  switch (form) {
    case Form::Linear: return "linear";
    case Form::Quadratic: return "quadratic";
    case Form::Cubic: return "cubic";
    case Form::Custom: return "custom";
  }
  return "?";
}

namespace {

bool
is_binary(const Eigen::MatrixXd& x, Eigen::Index col)
{
  return (x.col(col).array() == 0.0 || x.col(col).array() == 1.0).all();
}

using Index = Eigen::Index;

} // namespace

Design
make_design(const ModelSpec& spec, const Eigen::MatrixXd& covariates, const std::vector<std::string>& names)
{
  const auto p = static_cast<std::size_t>(covariates.cols());
  if (names.size() != p)
    detail::fail(ErrorCode::SpecMismatch, "covariate names do not match the covariate columns");
  if (spec.form == ModelSpec::Form::Custom) {
    if (!spec.builder)
      detail::fail(ErrorCode::SpecMismatch, "custom spec without a design builder");
    return { spec.custom_terms, spec.builder };
  }

  std::vector<std::string> terms{ "(Intercept)" };
  terms.insert(terms.end(), names.begin(), names.end());
  std::vector<std::size_t> curved; // non-binary covariates
  for (std::size_t k = 0; k < p; ++k)
    if (!is_binary(covariates, static_cast<Index>(k)))
      curved.push_back(k);
  const bool quad = spec.form != ModelSpec::Form::Linear;
  const bool cubic = spec.form == ModelSpec::Form::Cubic;
  if (quad) {
    for (std::size_t k : curved)
      terms.push_back(names[k] + "^2");
    for (std::size_t k = 0; k < p; ++k)
      for (std::size_t l = k + 1; l < p; ++l)
        terms.push_back(names[k] + ":" + names[l]);
  }
  if (cubic)
    for (std::size_t k : curved)
      terms.push_back(names[k] + "^3");

  auto row = [p, curved, quad, cubic](std::span<const double> x, std::span<double> out) {
    std::size_t c = 0;
    out[c++] = 1.0;
    for (std::size_t k = 0; k < p; ++k)
      out[c++] = x[k];
    if (quad) {
      for (std::size_t k : curved)
        out[c++] = x[k] * x[k];
      for (std::size_t k = 0; k < p; ++k)
        for (std::size_t l = k + 1; l < p; ++l)
          out[c++] = x[k] * x[l];
    }
    if (cubic)
      for (std::size_t k : curved)
        out[c++] = x[k] * x[k] * x[k];
  };
  return { std::move(terms), row };
}

Eigen::MatrixXd
design_matrix(const Design& design, const Eigen::MatrixXd& covariates)
{
  const Index n = covariates.rows();
  const auto k = static_cast<Index>(design.terms.size());
  Eigen::MatrixXd X(n, k);
  std::vector<double> x(static_cast<std::size_t>(covariates.cols()));
  std::vector<double> row(static_cast<std::size_t>(k));
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < covariates.cols(); ++c)
      x[static_cast<std::size_t>(c)] = covariates(i, c);
    design.row(x, row);
    for (Index c = 0; c < k; ++c)
      X(i, c) = row[static_cast<std::size_t>(c)];
  }
  return X;
}

std::vector<double>
EffectReport::se() const
{
  std::vector<double> out(static_cast<std::size_t>(covariance.rows()));
  for (Index c = 0; c < covariance.rows(); ++c)
    out[static_cast<std::size_t>(c)] = std::sqrt(std::max(covariance(c, c), 0.0));
  return out;
}

EffectReport
ols(std::span<const double> y,
    const ModelSpec& spec,
    const Eigen::MatrixXd& covariates,
    const std::vector<std::string>& names)
{
  if (static_cast<Index>(y.size()) != covariates.rows())
    detail::fail(ErrorCode::SpecMismatch, "outcome and covariates differ in rows");
  const auto design = make_design(spec, covariates, names);
  const Eigen::MatrixXd X = design_matrix(design, covariates);
  const Index n = X.rows(), k = X.cols();
  if (n < k + 1)
    detail::fail(ErrorCode::TooFewObservations, "more regressors than residual degrees of freedom");

  // Unit-norm columns for the rank decision; coefficients are mapped back.
  Eigen::VectorXd scale = X.colwise().norm().transpose();
  for (Index c = 0; c < k; ++c)
    if (!(scale(c) > 0.0))
      detail::fail(ErrorCode::RankDeficientDesign, "design column '" + design.terms[static_cast<std::size_t>(c)] + "' is zero");
  const Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
  qr.setThreshold(1e-10);
  qr.compute(Xs);
  if (qr.rank() < k)
    detail::fail(ErrorCode::RankDeficientDesign, "design matrix has rank " + std::to_string(qr.rank()) + " < " + std::to_string(k));

  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  EffectReport r;
  r.terms = design.terms;
  r.covariate_names = names;
  r.spec = spec;
  r.n_used = static_cast<std::size_t>(n);
  r.coefficients = qr.solve(yv).cwiseQuotient(scale);
  const Eigen::VectorXd e = yv - X * r.coefficients;

  // (X'X)^-1 = D^-1 P R^-1 R^-T P' D^-1
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::MatrixXd inner = qr.colsPermutation() * (Rinv * Rinv.transpose()) * qr.colsPermutation().transpose();
  const Eigen::MatrixXd bread = scale.cwiseInverse().asDiagonal() * inner * scale.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd Xe = X.array().colwise() * e.array();
  const Eigen::MatrixXd meat = Xe.transpose() * Xe;
  r.covariance = static_cast<double>(n) / static_cast<double>(n - k) * (bread * meat * bread);
  r.covariance = 0.5 * (r.covariance + r.covariance.transpose()).eval();

  const double ybar = yv.mean();
  const double ss_tot = (yv.array() - ybar).square().sum();
  r.r2 = ss_tot > 0.0 ? 1.0 - e.squaredNorm() / ss_tot : 1.0;

  auto pe = average_partial_effect(r, covariates);
  r.ape = std::move(pe.ape);
  r.se_ape = std::move(pe.se);
  return r;
}

PartialEffects
average_partial_effect(const EffectReport& report, const Eigen::MatrixXd& covariates)
{
  const auto design = make_design(report.spec, covariates, report.covariate_names);
  if (design.terms != report.terms || report.coefficients.size() != static_cast<Index>(report.terms.size()))
    detail::fail(ErrorCode::SpecMismatch, "covariates do not reproduce the fitted design");
  const Index n = covariates.rows(), p = covariates.cols();
  const auto k = static_cast<Index>(report.terms.size());
  if (n == 0)
    detail::fail(ErrorCode::SpecMismatch, "no covariate rows");

  PartialEffects out;
  const bool polynomial = report.spec.form != ModelSpec::Form::Custom;
  for (Index c = 0; c < p; ++c) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(k);
    if (polynomial && p == 1) {
      // d/dx of (1, x, x^2, x^3), averaged
      g(1) = 1.0;
      if (k > 2)
        g(2) = 2.0 * covariates.col(0).mean();
      if (k > 3)
        g(3) = 3.0 * covariates.col(0).array().square().mean();
    } else {
      const double mean = covariates.col(c).mean();
      const double sd = n > 1 ? std::sqrt((covariates.col(c).array() - mean).square().sum() / static_cast<double>(n - 1)) : 0.0;
      const double step = 1e-5 * (sd > 0.0 ? sd : 1.0);
      std::vector<double> x(static_cast<std::size_t>(p));
      std::vector<double> up(static_cast<std::size_t>(k)), down(static_cast<std::size_t>(k));
      for (Index i = 0; i < n; ++i) {
        for (Index l = 0; l < p; ++l)
          x[static_cast<std::size_t>(l)] = covariates(i, l);
        const double base = x[static_cast<std::size_t>(c)];
        x[static_cast<std::size_t>(c)] = base + step;
        design.row(x, up);
        x[static_cast<std::size_t>(c)] = base - step;
        design.row(x, down);
        for (Index t = 0; t < k; ++t)
          g(t) += (up[static_cast<std::size_t>(t)] - down[static_cast<std::size_t>(t)]) / (2.0 * step);
      }
      g /= static_cast<double>(n);
    }
    out.ape.push_back(g.dot(report.coefficients));
    out.se.push_back(std::sqrt(std::max(g.dot(report.covariance * g), 0.0)));
  }
  return out;
}

InfluenceVector
influence(const Dataset& data,
          const Functional& f,
          InfluenceMethod method,
          const SplineOptions& spline,
          LooStrategy strategy)
{
  const Sample& y = data.outcome;
  switch (method) {
    case InfluenceMethod::AnalyticRif: return analytic_rif(f, y);
    case InfluenceMethod::LooRsc: return rsc_full(f, y, strategy);
    case InfluenceMethod::SplineRsc: {
      const std::size_t n_star = spline.n_star ? spline.n_star : default_n_star(y.size());
      const auto model = fit_spline_rsc(f, y, n_star, spline.knots, spline.seed, spline.stream, strategy, spline.reference);
      return interpolate(model, y);
    }
  }
  return {};
}

EffectReport
rif_regress(const Dataset& data,
            const Functional& f,
            InfluenceMethod method,
            const ModelSpec& spec,
            const SplineOptions& spline,
            LooStrategy strategy)
{
  const auto iv = influence(data, f, method, spline, strategy);
  auto report = ols(iv.values, spec, data.covariates, data.covariate_names);
  report.method = method;
  report.v_n = iv.v_n;
  return report;
}

} // namespace rsc
