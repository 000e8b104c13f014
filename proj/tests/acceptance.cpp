//! Acceptance run: every criterion prints one PASS/FAIL line with the
//! measured numbers. Arguments restrict the run to the listed criteria.

#include "oracles.hpp"

#include "rsc/functionals.hpp"
#include "rsc/influence.hpp"
#include "rsc/montecarlo.hpp"
#include "rsc/random.hpp"
#include "rsc/spline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

using namespace rsc;

namespace {

struct Outcome
{
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double
since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string
fmt(const char* f, auto... args)
{
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double
median(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  const auto m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

const McMethodResult&
pick(const McReport& r, InfluenceMethod m)
{
  for (const auto& x : r.methods)
    if (x.method == m)
      return x;
  throw std::logic_error("method missing from report");
}

bool
within_se(const McMethodResult& r, double target, double k = 3.0)
{
  return std::abs(r.mean - target) <= k * r.mc_se;
}

constexpr double kVarPopulation = 3.003;

Outcome
population_variance()
{
  const auto t0 = Clock::now();
  const double v = population_effect(DgpModel::Kind::LocationScale, Functional::variance(), 1'000'000, 1e-4, 1);
  const double secs = since(t0);
  return { std::abs(v - 3.0) <= 0.05 && secs < 60, fmt("effect %.4f (target 3.00 +- 0.05), %.1f s", v, secs) };
}

McConfig
variance_mc(DgpModel::Kind model, std::size_t n, std::size_t reps, std::vector<InfluenceMethod> methods)
{
  McConfig c;
  c.model = model;
  c.functional = Functional::variance();
  c.n = n;
  c.reps = reps;
  c.methods = std::move(methods);
  c.base_seed = 20240601;
  return c;
}

// shared by criteria 2 and 5
const McReport&
large_variance_run()
{
  static const McReport r = [] {
    auto c = variance_mc(DgpModel::Kind::LocationScale,
                         5000,
                         100,
                         { InfluenceMethod::AnalyticRif, InfluenceMethod::LooRsc, InfluenceMethod::SplineRsc });
    c.n_star = 1000;
    c.population = kVarPopulation;
    return run_mc(c);
  }();
  return r;
}

Outcome
locscale_variance_mc()
{
  const auto t0 = Clock::now();
  auto c = variance_mc(
    DgpModel::Kind::LocationScale, 500, 200, { InfluenceMethod::AnalyticRif, InfluenceMethod::LooRsc });
  c.population = kVarPopulation;
  const auto small = run_mc(c);
  const auto& big = large_variance_run();
  const auto& rif = pick(small, InfluenceMethod::AnalyticRif);
  const auto& rsc = pick(small, InfluenceMethod::LooRsc);
  const auto& rsc_big = pick(big, InfluenceMethod::LooRsc);
  const double secs = since(t0);
  // bias ordering judged allowing two MC standard errors of the larger-n bias
  const bool shrinks = std::abs(rsc_big.bias) <= std::abs(rsc.bias) + 2 * rsc_big.mc_se;
  const bool pass = within_se(rif, kVarPopulation) && within_se(rsc, kVarPopulation) && shrinks && secs < 900;
  return { pass,
           fmt("n=500: RIF %.4f (se %.4f), RSC %.4f (se %.4f); |bias RSC| %.4f -> %.4f at n=5000; %.0f s",
               rif.mean, rif.mc_se, rsc.mean, rsc.mc_se, std::abs(rsc.bias), std::abs(rsc_big.bias), secs) };
}

Outcome
bimodal_variance_mc()
{
  auto c = variance_mc(DgpModel::Kind::LocationBimodal, 500, 200, { InfluenceMethod::LooRsc });
  c.population = -0.120;
  const auto r = run_mc(c);
  const auto& rsc = pick(r, InfluenceMethod::LooRsc);
  return { within_se(rsc, -0.120), fmt("RSC mean %.4f (se %.4f), target -0.120", rsc.mean, rsc.mc_se) };
}

Outcome
rif_rsc_equivalence()
{
  const auto data = dgp_draw({}, 5000, 99, stream_id(StreamPurpose::Data, 0));
  std::ostringstream s;
  bool pass = true;
  for (const auto& f : { Functional::gini(), Functional::variance() }) {
    const auto a = rif_regress(data, f, InfluenceMethod::AnalyticRif, ModelSpec::linear());
    const auto b = rif_regress(data, f, InfluenceMethod::LooRsc, ModelSpec::linear());
    const double d = std::abs(a.coefficients(1) - b.coefficients(1));
    pass = pass && d < 0.01;
    s << f.name() << " slopes " << a.coefficients(1) << " vs " << b.coefficients(1) << " (|diff| " << d << ")  ";
  }
  return { pass, s.str() };
}

Outcome
spline_fidelity()
{
  const auto& r = large_variance_run();
  const auto& sp = pick(r, InfluenceMethod::SplineRsc);
  const auto& rsc = pick(r, InfluenceMethod::LooRsc);
  const bool pass = within_se(sp, kVarPopulation) && sp.mse <= 1.5 * rsc.mse;
  return { pass,
           fmt("RSC(sp) mean %.4f (se %.4f); MSE RSC(sp) %.4f vs RSC %.4f (ratio %.3f)",
               sp.mean, sp.mc_se, sp.mse, rsc.mse, sp.mse / rsc.mse) };
}

Outcome
der_population()
{
  // Published DER population values for the two designs.
  const double published[2] = { 2.153, 0.291 };
  const DgpModel::Kind kinds[2] = { DgpModel::Kind::LocationScale, DgpModel::Kind::LocationBimodal };
  const char* names[2] = { "locscale", "bimodal" };
  std::ostringstream s;
  bool stable = true;
  double value[2][2]; // [normalized][model]
  for (int norm = 0; norm < 2; ++norm) {
    const auto f = Functional::der(0.5, {}, norm == 1);
    for (int m = 0; m < 2; ++m) {
      const double a = population_effect(kinds[m], f, 1'000'000, 1e-4, 1);
      const double b = population_effect(kinds[m], f, 1'000'000, 1e-4, 2);
      const double rel = std::abs(a - b) / std::abs(a);
      stable = stable && rel <= 0.02;
      value[norm][m] = a;
      s << (norm ? "normalized " : "raw ") << names[m] << " " << a << " (seed spread " << 100 * rel << "%)  ";
    }
  }
  // Scaling hypotheses: raw or mean-normalized index, reported x1 or x100.
  // A hypothesis fits when published/ours is the same for both designs.
  const char* label[2] = { "raw", "normalized" };
  int best_norm = -1;
  double best_scale = 0, best_gap = 1e9;
  for (int norm = 0; norm < 2; ++norm)
    for (double scale : { 1.0, 100.0 }) {
      const double r0 = published[0] / (scale * value[norm][0]);
      const double r1 = published[1] / (scale * value[norm][1]);
      const double gap = std::abs(r0 / r1 - 1);
      s << "| " << label[norm] << " x" << scale << ": ratios " << r0 << ", " << r1 << " ";
      // equal consistency across scales; prefer ratios nearest one
      const double score = gap + 1e-3 * std::abs(std::log(r0));
      if (score < best_gap) {
        best_gap = score;
        best_norm = norm;
        best_scale = scale;
      }
    }
  const double r0 = published[0] / (best_scale * value[best_norm][0]);
  const double r1 = published[1] / (best_scale * value[best_norm][1]);
  const bool consistent = std::abs(r0 / r1 - 1) <= 0.10;
  s << "| chosen: " << label[best_norm] << " x" << best_scale;
  return { stable && consistent, s.str() };
}

Outcome
algebraic_identities()
{
  double worst_p0 = 0, worst_sc = 0, worst_mse = 0;
  bool rif_exact = true;
  std::mt19937_64 g(17);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto y = oracle::lognormal_sample(seed + 1, 50 + seed * 3);
    const Sample s(y);
    const double p0 = eval(Functional::der(0.0), s);
    worst_p0 = std::max(worst_p0, std::abs(p0 - 2 * s.mean() * eval(Functional::gini(), s)) / p0);

    const auto rif = analytic_rif(Functional::mean(), s);
    for (std::size_t i = 0; i < y.size(); ++i)
      rif_exact = rif_exact && rif.values[i] == y[i];

    const double n = static_cast<double>(y.size());
    for (std::size_t j = 0; j < y.size(); j += 7) {
      const double closed = n / (n - 1) * (y[j] - s.mean());
      worst_sc = std::max(worst_sc, std::abs(sc_at(Functional::mean(), s, j) - closed) / (1 + std::abs(closed)));
    }

    std::normal_distribution<double> z(3.0, 0.4);
    std::vector<double> apes(20);
    for (auto& a : apes)
      a = z(g);
    const auto r = summarize(InfluenceMethod::LooRsc, apes, 2.9);
    worst_mse = std::max(worst_mse, std::abs(r.mse - (r.bias * r.bias + r.variance)));
  }
  const bool pass = worst_p0 <= 1e-10 && rif_exact && worst_sc <= 1e-12 && worst_mse <= 1e-10;
  return { pass,
           fmt("P0 rel err %.2e, RIF(mean)=y %s, SC(mean) err %.2e, mse identity err %.2e",
               worst_p0, rif_exact ? "exact" : "NOT exact", worst_sc, worst_mse) };
}

Outcome
sc_if_convergence()
{
  std::ostringstream s;
  bool pass = true;
  for (const auto& f : { Functional::variance(), Functional::gini() }) {
    std::vector<double> small, large;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      small.push_back(sc_if_gap(f, Sample(dgp_outcomes({}, 1000, seed))));
      large.push_back(sc_if_gap(f, Sample(dgp_outcomes({}, 4000, seed))));
    }
    const double ratio = median(small) / median(large);
    pass = pass && ratio >= 2 && ratio <= 8;
    s << f.name() << " median gap " << median(small) << " -> " << median(large) << " (factor " << ratio << ")  ";
  }
  return { pass, s.str() };
}

Outcome
spline_structure()
{
  std::mt19937_64 g(4242);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::normal_distribution<double> z;
  double worst_linear = 0, worst_c2 = 0, worst_recovery = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t K = 3 + static_cast<std::size_t>(rep % 6);
    std::vector<double> k(K);
    for (auto& v : k)
      v = u(g);
    std::sort(k.begin(), k.end());
    for (std::size_t j = 1; j < K; ++j)
      k[j] = std::max(k[j], k[j - 1] + 0.05);
    SplineFit s;
    s.knots = { k };
    s.beta0 = z(g);
    s.beta1 = z(g);
    for (std::size_t j = 0; j + 2 < K; ++j)
      s.gamma.push_back(z(g));
    const double lo = k.front(), hi = k.back(), range = hi - lo;
    double scale = 0, curvature = 0;
    for (int i = 0; i <= 200; ++i)
      scale = std::max(scale, std::abs(s.predict(lo - range + 3 * range * i / 200.0)));
    for (int i = 1; i < 200; ++i) {
      const double x = lo + range * i / 200.0, e = range / 200.0;
      curvature = std::max(curvature, std::abs(s.predict(x + e) - 2 * s.predict(x) + s.predict(x - e)) / (e * e));
    }
    for (double a : { 0.1, 0.7, 3.0 }) {
      const double st = a * range;
      const double below = s.predict(lo - 3 * st) - 2 * s.predict(lo - 2 * st) + s.predict(lo - st);
      const double above = s.predict(hi + st) - 2 * s.predict(hi + 2 * st) + s.predict(hi + 3 * st);
      worst_linear = std::max(worst_linear, std::max(std::abs(below), std::abs(above)) / (st * st * scale));
    }
    // one-sided second differences meeting at the knot; the Richardson
    // combination removes their O(step) drift
    auto jump = [&](double kn, double st) {
      const double left = (s.predict(kn) - 2 * s.predict(kn - st) + s.predict(kn - 2 * st)) / (st * st);
      const double right = (s.predict(kn) - 2 * s.predict(kn + st) + s.predict(kn + 2 * st)) / (st * st);
      return left - right;
    };
    const double st = 1e-4 * range;
    for (double kn : k)
      worst_c2 = std::max(worst_c2, std::abs(2 * jump(kn, st / 2) - jump(kn, st)) / curvature);
    // refit the same spline from points spread over the knots
    std::vector<double> y, t;
    for (int i = 0; i < 300; ++i) {
      y.push_back(lo - 0.1 * range + 1.2 * range * u(g) / 10.0);
      t.push_back(s.predict(y.back()));
    }
    for (double kn : k) {
      // a few points between every pair of knots keep the design full rank
      y.push_back(kn + 0.01);
      t.push_back(s.predict(y.back()));
    }
    const auto fit = fit_rcs(s.knots, y, t);
    double err = std::abs(fit.beta0 - s.beta0) + std::abs(fit.beta1 - s.beta1);
    for (std::size_t j = 0; j < s.gamma.size() && j < fit.gamma.size(); ++j)
      err = std::max(err, std::abs(fit.gamma[j] - s.gamma[j]));
    if (fit.gamma.size() != s.gamma.size() || fit.dropped_columns)
      err = 1;
    worst_recovery = std::max(worst_recovery, err);
  }
  const bool pass = worst_linear < 1e-8 && worst_c2 < 1e-4 && worst_recovery < 1e-8;
  return { pass,
           fmt("tail curvature %.1e, knot curvature jump %.1e, recovery error %.1e over 50 knot sets",
               worst_linear, worst_c2, worst_recovery) };
}

Outcome
timing()
{
  const auto gini = bench_timing(Functional::gini(), { 2000 }, 0.1, 3, 11);
  const auto der = bench_timing(Functional::der(0.5), { 800, 1400, 2100 }, 0.1, 3, 11);
  const bool monotone = der[0].ratio > der[1].ratio && der[1].ratio > der[2].ratio;
  std::ostringstream s;
  s << fmt("gini n=2000 ratio %.3f; der ratios", gini[0].ratio);
  for (const auto& r : der)
    s << fmt(" %.4f", r.ratio);
  // both routes repeat the same O(n^2) evaluation, so the expected ratio
  // is about (n* + 1) / (n + 1)
  s << " (cost model";
  for (const auto& r : der)
    s << fmt(" %.4f", (r.n_star + 1.0) / (r.n + 1.0));
  s << ")";
  return { gini[0].ratio < 0.25 && monotone, s.str() };
}

} // namespace

int
main(int argc, char** argv)
{
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
    { "population variance effect", population_variance },
    { "location-scale variance Monte Carlo", locscale_variance_mc },
    { "bimodal variance Monte Carlo", bimodal_variance_mc },
    { "RIF and RSC slopes agree", rif_rsc_equivalence },
    { "spline-interpolated RSC fidelity", spline_fidelity },
    { "DER population values", der_population },
    { "algebraic identities", algebraic_identities },
    { "SC approaches IF at rate 1/n", sc_if_convergence },
    { "spline structure", spline_structure },
    { "timing ratios", timing },
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i)
    only.insert(std::stoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id))
      continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = { false, std::string("error: ") + e.what() };
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << " (" << fmt("%.1f", since(t0))
              << " s): " << o.detail << std::endl;
  }
  return failed ? 1 : 0;
}
