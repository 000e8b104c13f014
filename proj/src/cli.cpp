#include "rsc/cli.hpp"

#include "rsc/error.hpp"
#include "rsc/functionals.hpp"
#include "rsc/influence.hpp"
#include "rsc/montecarlo.hpp"
#include "rsc/regression.hpp"
#include "rsc/sample.hpp"
#include "rsc/spline.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

namespace rsc::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string
sha256_file(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::UnparseableFile, "cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

namespace {

// Shortest round-trip text; keeps output files byte-stable.
std::string
num(double v)
{
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void
write_text(const fs::path& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
}

struct Options
{
  std::string out = ".";
  int threads = 0;
};

struct KdeArgs
{
  double bandwidth = 0.0;
  std::string loo = "recompute";
  bool normalize_mean = false;

  void add(CLI::App* cmd)
  {
    cmd->add_option("--bandwidth", bandwidth, "Fixed kernel bandwidth (default: Silverman's rule)");
    cmd->add_option("--loo-bandwidth", loo, "Bandwidth under leave-one-out")
      ->check(CLI::IsMember({ "recompute", "freeze" }));
    cmd->add_flag("--normalize-mean", normalize_mean, "DER on y / mean(y)");
  }

  Functional make(const std::string& name) const
  {
    Functional f = Functional::parse(name);
    if (bandwidth < 0.0)
      throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
    if (bandwidth > 0.0)
      f.kde = KdeConfig::fixed(bandwidth);
    if (loo == "freeze")
      f.kde.loo = KdeConfig::LooBandwidth::Freeze;
    f.normalize_mean = normalize_mean && f.kind == Functional::Kind::Der;
    return f;
  }

  json to_json() const
  {
    return { { "bandwidth", bandwidth }, { "loo_bandwidth", loo }, { "normalize_mean", normalize_mean } };
  }
};

InfluenceMethod
parse_method(const std::string& s)
{
  if (s == "rif")
    return InfluenceMethod::AnalyticRif;
  if (s == "rsc")
    return InfluenceMethod::LooRsc;
  if (s == "rsc-sp")
    return InfluenceMethod::SplineRsc;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + s + "'");
}

DgpModel::Kind
parse_model(const std::string& s)
{
  if (s == "locscale")
    return DgpModel::Kind::LocationScale;
  if (s == "bimodal")
    return DgpModel::Kind::LocationBimodal;
  throw Error(ErrorCode::InvalidArgument, "unknown model '" + s + "'");
}

ScReference
parse_reference(const std::string& s)
{
  return s == "subsample" ? ScReference::Subsample : ScReference::FullSample;
}

void
add_reference_option(CLI::App* cmd, std::string& target)
{
  cmd->add_option("--sc-reference", target, "Spline target: leave-one-out from the full sample or within the subsample")
    ->check(CLI::IsMember({ "full", "subsample" }))
    ->capture_default_str();
}

class Manifest
{
public:
  explicit Manifest(std::string command)
    : start_(std::chrono::steady_clock::now())
  {
    doc_["command"] = std::move(command);
    doc_["version"] = RSC_VERSION;
  }

  void flags(json j) { doc_["flags"] = std::move(j); }
  void seeds(std::vector<std::uint64_t> s) { doc_["seeds"] = std::move(s); }
  void input(const fs::path& p)
  {
    doc_["input"] = { { "path", p.string() }, { "sha256", sha256_file(p) } };
  }
  void output(const std::string& name) { outputs_.push_back(name); }

  void write(const fs::path& dir)
  {
    doc_["outputs"] = outputs_;
    doc_["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_text(dir / "manifest.json", doc_.dump(2) + "\n");
  }

private:
  std::chrono::steady_clock::time_point start_;
  json doc_;
  std::vector<std::string> outputs_;
};

// ---------------------------------------------------------------------------

struct RegressArgs
{
  std::string data, outcome;
  std::vector<std::string> covariates;
  std::string functional = "mean", method = "rsc", spec = "linear", sc_reference = "full";
  std::size_t subsample = 0, knots = kDefaultKnots;
  std::uint64_t seed = 1;
  double scale = 1.0;
  KdeArgs kde;
};

int
cmd_regress(const RegressArgs& a, const Options& opt)
{
  const Functional f = a.kde.make(a.functional);
  const InfluenceMethod method = parse_method(a.method);
  const ModelSpec spec = ModelSpec::parse(a.spec);
  Manifest manifest("regress");
  json flags = { { "data", a.data },         { "outcome", a.outcome },     { "covariates", a.covariates },
                 { "functional", f.name() }, { "method", a.method },       { "spec", spec.name() },
                 { "subsample", a.subsample }, { "knots", a.knots },     { "seed", a.seed },
                 { "scale", a.scale },       { "sc_reference", a.sc_reference } };
  flags.update(a.kde.to_json());
  manifest.flags(std::move(flags));
  manifest.seeds({ a.seed });
  manifest.input(a.data);

  const Dataset data = load_csv(a.data, a.outcome, a.covariates);
  SplineOptions spline;
  spline.n_star = a.subsample;
  spline.knots = a.knots;
  spline.seed = a.seed;
  spline.reference = parse_reference(a.sc_reference);
  if (method == InfluenceMethod::SplineRsc && a.subsample > data.outcome.size())
    throw Error(ErrorCode::InvalidArgument, "--subsample exceeds the number of usable rows");
  const auto report = rif_regress(data, f, method, spec, spline);

  const auto se = report.se();
  std::ostringstream csv;
  csv << "term,coef,se,ape,ape_se\n";
  std::cout << f.name() << " via " << to_string(method) << ", " << spec.name() << " spec, n = " << report.n_used
            << " (" << data.dropped_rows << " rows dropped), v_n = " << report.v_n << "\n";
  std::cout << std::left << std::setw(24) << "term" << std::right << std::setw(14) << "coef" << std::setw(14) << "se"
            << std::setw(14) << "ape" << std::setw(14) << "ape_se" << "\n";
  for (std::size_t t = 0; t < report.terms.size(); ++t) {
    const auto& term = report.terms[t];
    const auto cov = std::find(report.covariate_names.begin(), report.covariate_names.end(), term);
    std::string ape, ape_se;
    if (cov != report.covariate_names.end()) {
      const auto k = static_cast<std::size_t>(cov - report.covariate_names.begin());
      ape = num(a.scale * report.ape[k]);
      ape_se = num(a.scale * report.se_ape[k]);
    }
    const double coef = a.scale * report.coefficients(static_cast<Eigen::Index>(t));
    csv << '"' << term << "\"," << num(coef) << ',' << num(a.scale * se[t]) << ',' << ape << ',' << ape_se << "\n";
    std::cout << std::left << std::setw(24) << term << std::right << std::setw(14) << coef << std::setw(14)
              << a.scale * se[t] << std::setw(14) << ape << std::setw(14) << ape_se << "\n";
  }
  write_text(fs::path(opt.out) / "effects.csv", csv.str());
  manifest.output("effects.csv");
  manifest.write(opt.out);
  return Ok;
}

// ---------------------------------------------------------------------------

struct McArgs
{
  std::string model = "locscale", functional = "variance", spec = "linear", sc_reference = "full";
  std::vector<std::string> methods{ "rif", "rsc" };
  std::size_t n = 500, reps = 200, pop_n = 1'000'000, subsample = 0, knots = kDefaultKnots;
  double epsilon = 1e-4, scale = 1.0;
  std::optional<double> population;
  std::uint64_t seed = 1;
  KdeArgs kde;
};

int
cmd_mc(const McArgs& a, const Options& opt)
{
  McConfig c;
  c.model = parse_model(a.model);
  c.functional = a.kde.make(a.functional);
  c.n = a.n;
  c.reps = a.reps;
  c.methods.clear();
  for (const auto& m : a.methods)
    c.methods.push_back(parse_method(m));
  c.spec = ModelSpec::parse(a.spec);
  c.n_star = a.subsample;
  c.knots = a.knots;
  c.base_seed = a.seed;
  c.epsilon = a.epsilon;
  c.pop_n = a.pop_n;
  c.population = a.population;
  c.reference = parse_reference(a.sc_reference);
  c.validate();
  if (a.subsample > a.n)
    throw Error(ErrorCode::InvalidArgument, "--subsample exceeds --n");

  Manifest manifest("mc");
  json flags = { { "model", a.model },   { "functional", c.functional.name() }, { "n", a.n },
                 { "reps", a.reps },     { "methods", a.methods },              { "spec", c.spec.name() },
                 { "pop_n", a.pop_n },   { "epsilon", a.epsilon },              { "subsample", a.subsample },
                 { "knots", a.knots },   { "seed", a.seed },                    { "scale", a.scale },
                 { "sc_reference", a.sc_reference } };
  flags["population"] = a.population ? json(*a.population) : json(nullptr);
  flags.update(a.kde.to_json());
  manifest.flags(std::move(flags));
  manifest.seeds({ a.seed });

  const auto report = run_mc(c);
  const double s = a.scale;

  std::ostringstream csv, apes, timing;
  csv << "statistic";
  apes << "rep";
  timing << "method,seconds\n";
  for (const auto& m : report.methods) {
    csv << ',' << to_string(m.method);
    apes << ',' << to_string(m.method);
    timing << to_string(m.method) << ',' << num(m.seconds) << "\n";
  }
  timing << "population," << num(report.population_seconds) << "\n";
  csv << "\n";
  apes << "\n";
  auto row = [&](const char* label, auto get) {
    csv << label;
    for (const auto& m : report.methods)
      csv << ',' << num(get(m));
    csv << "\n";
  };
  row("Population", [&](const McMethodResult&) { return s * report.population; });
  row("Mean", [&](const McMethodResult& m) { return s * m.mean; });
  row("Bias", [&](const McMethodResult& m) { return s * m.bias; });
  row("Var", [&](const McMethodResult& m) { return s * s * m.variance; });
  row("MSE", [&](const McMethodResult& m) { return s * s * m.mse; });
  for (std::size_t r = 0; r < c.reps; ++r) {
    apes << r;
    for (const auto& m : report.methods)
      apes << ',' << num(s * m.apes[r]);
    apes << "\n";
  }
  const fs::path dir(opt.out);
  write_text(dir / "mc_report.csv", csv.str());
  write_text(dir / "mc_apes.csv", apes.str());
  write_text(dir / "mc_timing.csv", timing.str());
  manifest.output("mc_report.csv");
  manifest.output("mc_apes.csv");
  manifest.output("mc_timing.csv");

  std::cout << c.functional.name() << ", " << a.model << ", n = " << c.n << ", " << c.reps << " replications\n";
  std::cout << std::left << std::setw(12) << "" << std::right;
  for (const auto& m : report.methods)
    std::cout << std::setw(12) << to_string(m.method);
  std::cout << "\n" << std::setprecision(4) << std::fixed;
  auto line = [&](const char* label, auto get) {
    std::cout << std::left << std::setw(12) << label << std::right;
    for (const auto& m : report.methods)
      std::cout << std::setw(12) << get(m);
    std::cout << "\n";
  };
  line("Population", [&](const McMethodResult&) { return s * report.population; });
  line("Mean", [&](const McMethodResult& m) { return s * m.mean; });
  line("Bias", [&](const McMethodResult& m) { return s * m.bias; });
  line("Var", [&](const McMethodResult& m) { return s * s * m.variance; });
  line("MSE", [&](const McMethodResult& m) { return s * s * m.mse; });
  line("MC-SE", [&](const McMethodResult& m) { return s * m.mc_se; });
  line("Seconds", [&](const McMethodResult& m) { return m.seconds; });
  manifest.write(dir);
  return Ok;
}

// ---------------------------------------------------------------------------

struct BenchArgs
{
  std::string functional = "gini", sc_reference = "full";
  std::vector<std::size_t> sizes{ 500, 1000, 2000 };
  double frac = 0.1;
  std::size_t reps = 5;
  std::uint64_t seed = 1;
  KdeArgs kde;
};

int
cmd_bench(const BenchArgs& a, const Options& opt)
{
  const Functional f = a.kde.make(a.functional);
  if (a.reps == 0)
    throw Error(ErrorCode::InvalidArgument, "--reps must be at least 1");
  if (a.sizes.empty())
    throw Error(ErrorCode::InvalidArgument, "--sizes is empty");
  Manifest manifest("bench");
  json flags = { { "functional", f.name() }, { "sizes", a.sizes }, { "subsample_frac", a.frac },
                 { "reps", a.reps },        { "seed", a.seed },         { "sc_reference", a.sc_reference } };
  flags.update(a.kde.to_json());
  manifest.flags(std::move(flags));
  manifest.seeds({ a.seed });

  const auto rows = bench_timing(f, a.sizes, a.frac, a.reps, a.seed, parse_reference(a.sc_reference));
  std::ostringstream csv, plot;
  csv << "size,n_star,method,seconds,ratio\n";
  plot << "size,method,seconds\n";
  std::cout << std::setw(8) << "size" << std::setw(8) << "n*" << std::setw(14) << "RSC" << std::setw(14) << "RSC(sp)"
            << std::setw(10) << "ratio" << "\n";
  for (const auto& r : rows) {
    csv << r.n << ',' << r.n_star << ",RSC," << num(r.rsc_seconds) << ',' << num(r.ratio) << "\n";
    csv << r.n << ',' << r.n_star << ",RSC(sp)," << num(r.spline_seconds) << ',' << num(r.ratio) << "\n";
    plot << r.n << ",RSC," << num(r.rsc_seconds) << "\n" << r.n << ",RSC(sp)," << num(r.spline_seconds) << "\n";
    std::cout << std::setw(8) << r.n << std::setw(8) << r.n_star << std::setw(14) << r.rsc_seconds << std::setw(14)
              << r.spline_seconds << std::setw(10) << r.ratio << "\n";
  }
  const fs::path dir(opt.out);
  write_text(dir / "timing.csv", csv.str());
  write_text(dir / "timing_plotdata.csv", plot.str());
  manifest.output("timing.csv");
  manifest.output("timing_plotdata.csv");
  manifest.write(dir);
  return Ok;
}

// ---------------------------------------------------------------------------

struct CurveArgs
{
  std::string data, outcome, model = "locscale", functional = "gini", sc_reference = "full";
  std::size_t n = 1000, subsample = 0, knots = kDefaultKnots;
  std::uint64_t seed = 1;
  KdeArgs kde;
};

int
cmd_curve(const CurveArgs& a, const Options& opt)
{
  const Functional f = a.kde.make(a.functional);
  Manifest manifest("curve");
  json flags = { { "functional", f.name() }, { "subsample", a.subsample }, { "knots", a.knots },
                 { "seed", a.seed },         { "sc_reference", a.sc_reference } };
  if (a.data.empty()) {
    flags["model"] = a.model;
    flags["n"] = a.n;
  } else {
    flags["data"] = a.data;
    flags["outcome"] = a.outcome;
  }
  flags.update(a.kde.to_json());
  manifest.flags(std::move(flags));
  manifest.seeds({ a.seed });

  std::optional<Sample> y;
  if (!a.data.empty()) {
    if (a.outcome.empty())
      throw Error(ErrorCode::InvalidArgument, "--data needs --outcome");
    manifest.input(a.data);
    y.emplace(load_csv(a.data, a.outcome, {}).outcome);
  } else {
    y.emplace(dgp_outcomes({ parse_model(a.model), 0.0 }, a.n, a.seed, stream_id(StreamPurpose::Data, 0)));
  }
  const std::size_t n_star = a.subsample ? a.subsample : default_n_star(y->size());
  if (n_star > y->size())
    throw Error(ErrorCode::InvalidArgument, "--subsample exceeds the sample size");

  const auto exact = rsc_full(f, *y);
  const auto model = fit_spline_rsc(f, *y, n_star, a.knots, a.seed, stream_id(StreamPurpose::Subsample, 0), LooStrategy::Exact,
                                    parse_reference(a.sc_reference));
  const auto spline = interpolate(model, *y);

  std::ostringstream csv;
  csv << "y,rsc_exact,rsc_spline\n";
  for (std::size_t i : y->sort_index())
    csv << num(y->values()[i]) << ',' << num(exact.values[i]) << ',' << num(spline.values[i]) << "\n";
  write_text(fs::path(opt.out) / "curve_plotdata.csv", csv.str());
  manifest.output("curve_plotdata.csv");
  std::cout << f.name() << ": " << y->size() << " points, n* = " << n_star << ", spline R^2 = " << model.fit_r2;
  if (model.dropped_columns)
    std::cout << " (" << model.dropped_columns << " spline terms dropped)";
  std::cout << "\n";
  manifest.write(opt.out);
  return Ok;
}

int
exit_code(ErrorCode code)
{
  if (is_data_error(code))
    return DataError;
  if (code == ErrorCode::InvalidArgument)
    return BadFlags;
  return NumericError;
}

} // namespace

int
run(const std::vector<std::string>& args)
{
  CLI::App app{ "Regression on recentered influence and sensitivity curves", "rscreg" };
  app.set_version_flag("--version", RSC_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("--out", opt.out, "Output directory")->capture_default_str();
  app.add_option("--threads", opt.threads, "Worker thread cap (0: OpenMP default)")->check(CLI::NonNegativeNumber);

  RegressArgs ra;
  auto* regress = app.add_subcommand("regress", "Distributional regression on a CSV file");
  regress->add_option("--data", ra.data, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  regress->add_option("--outcome", ra.outcome, "Outcome column")->required();
  regress->add_option("--covariates", ra.covariates, "Covariate columns")->required()->delimiter(',');
  regress->add_option("--functional", ra.functional, "mean | variance | gini | quantile:TAU | der:ALPHA")
    ->capture_default_str();
  regress->add_option("--method", ra.method, "Influence values")
    ->check(CLI::IsMember({ "rif", "rsc", "rsc-sp" }))
    ->capture_default_str();
  regress->add_option("--spec", ra.spec, "Covariate polynomial")
    ->check(CLI::IsMember({ "linear", "quad", "quadratic", "cubic" }))
    ->capture_default_str();
  regress->add_option("--subsample", ra.subsample, "Spline subsample size n* (default 10% in [200, 1000])");
  regress->add_option("--knots", ra.knots, "Spline knots")->check(CLI::Range(3, 50))->capture_default_str();
  regress->add_option("--seed", ra.seed, "Subsample seed")->capture_default_str();
  regress->add_option("--scale", ra.scale, "Multiply reported effects (e.g. 100)")->capture_default_str();
  ra.kde.add(regress);
  add_reference_option(regress, ra.sc_reference);

  McArgs ma;
  auto* mc = app.add_subcommand("mc", "Monte Carlo bias, variance and MSE of the APE");
  mc->add_option("--model", ma.model, "Design")->check(CLI::IsMember({ "locscale", "bimodal" }))->capture_default_str();
  mc->add_option("--functional", ma.functional, "Statistic")->capture_default_str();
  mc->add_option("--n", ma.n, "Sample size")->capture_default_str();
  mc->add_option("--reps", ma.reps, "Replications")->capture_default_str();
  mc->add_option("--methods", ma.methods, "rif, rsc, rsc-sp")
    ->delimiter(',')
    ->check(CLI::IsMember({ "rif", "rsc", "rsc-sp" }));
  mc->add_option("--spec", ma.spec, "Covariate polynomial")
    ->check(CLI::IsMember({ "linear", "quad", "quadratic", "cubic" }))
    ->capture_default_str();
  mc->add_option("--pop-n", ma.pop_n, "Population draw size")->capture_default_str();
  mc->add_option("--epsilon", ma.epsilon, "Shift for the population derivative")->capture_default_str();
  mc->add_option("--population", ma.population, "Known population effect (skips the population run)");
  mc->add_option("--subsample", ma.subsample, "Spline subsample size n*");
  mc->add_option("--knots", ma.knots, "Spline knots")->check(CLI::Range(3, 50))->capture_default_str();
  mc->add_option("--seed", ma.seed, "Base seed")->capture_default_str();
  mc->add_option("--scale", ma.scale, "Multiply reported effects")->capture_default_str();
  ma.kde.add(mc);
  add_reference_option(mc, ma.sc_reference);

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Timing of full versus spline-interpolated RSC");
  bench->add_option("--functional", ba.functional, "Statistic")->capture_default_str();
  bench->add_option("--sizes", ba.sizes, "Sample sizes")->delimiter(',');
  bench->add_option("--subsample-frac", ba.frac, "n* / n")->capture_default_str();
  bench->add_option("--reps", ba.reps, "Timed samples per size")->capture_default_str();
  bench->add_option("--seed", ba.seed, "Seed")->capture_default_str();
  ba.kde.add(bench);
  add_reference_option(bench, ba.sc_reference);

  CurveArgs ca;
  auto* curve = app.add_subcommand("curve", "RSC and its spline interpolation, as plot data");
  auto* data_opt = curve->add_option("--data", ca.data, "CSV file")->check(CLI::ExistingFile);
  curve->add_option("--outcome", ca.outcome, "Outcome column")->needs(data_opt);
  auto* model_opt = curve->add_option("--model", ca.model, "Synthetic design")
                      ->check(CLI::IsMember({ "locscale", "bimodal" }))
                      ->excludes(data_opt);
  curve->add_option("--n", ca.n, "Synthetic sample size")->excludes(data_opt);
  (void)model_opt;
  curve->add_option("--functional", ca.functional, "Statistic")->capture_default_str();
  curve->add_option("--subsample", ca.subsample, "Spline subsample size n*");
  curve->add_option("--knots", ca.knots, "Spline knots")->check(CLI::Range(3, 50))->capture_default_str();
  curve->add_option("--seed", ca.seed, "Seed")->capture_default_str();
  ca.kde.add(curve);
  add_reference_option(curve, ca.sc_reference);

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Ok : BadFlags;
  }

  try {
    if (opt.threads > 0)
      omp_set_num_threads(opt.threads);
    fs::create_directories(opt.out);
    if (regress->parsed())
      return cmd_regress(ra, opt);
    if (mc->parsed())
      return cmd_mc(ma, opt);
    if (bench->parsed())
      return cmd_bench(ba, opt);
    if (curve->parsed())
      return cmd_curve(ca, opt);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return NumericError;
  }
  return BadFlags;
}

int
run(int argc, char** argv)
{
  return run(std::vector<std::string>(argv, argv + argc));
}

} // namespace rsc::cli
